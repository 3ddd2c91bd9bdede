#include "anon/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "anon/error.hpp"
#include "anon/parallel.hpp"
#include "anon/rng.hpp"

namespace anon::forest {

using nlohmann::json;

void ForestConfig::validate(std::size_t dim) const {
  if (n_trees < 1) throw_config("InvalidConfig", "forest.n_trees must be >= 1");
  if (min_samples_leaf < 1) throw_config("InvalidConfig", "forest.min_samples_leaf must be >= 1");
  if (max_depth && *max_depth < 1) throw_config("InvalidConfig", "forest.max_depth must be >= 1");
  if (features_per_split == FeatureSubset::Fixed && (fixed_features < 1 || fixed_features > dim)) {
    throw_config("InvalidConfig", "forest.features_per_split Fixed(k) needs 1 <= k <= dim");
  }
}

std::size_t ForestConfig::features_per_node(std::size_t dim) const {
  switch (features_per_split) {
    case FeatureSubset::All: return dim;
    case FeatureSubset::Fixed: return fixed_features;
    case FeatureSubset::Sqrt: break;
  }
  const auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(dim)));
  return std::max<std::size_t>(1, k);
}

namespace {

double gini(const std::vector<std::uint32_t>& counts, std::size_t total) {
  double impurity = 1.0;
  const double n = static_cast<double>(total);
  for (const auto c : counts) {
    const double p = static_cast<double>(c) / n;
    impurity -= p * p;
  }
  return impurity;
}

struct TreeBuilder {
  const std::vector<std::vector<double>>& columns;  // [feature][record]
  const std::vector<std::uint32_t>& labels;
  std::size_t n_classes;
  const ForestConfig& cfg;
  std::size_t n_features;
  std::size_t subset_size;
  std::size_t root_size;
  Rng rng;

  Tree tree;
  std::vector<double> importances;

  TreeBuilder(const std::vector<std::vector<double>>& columns,
              const std::vector<std::uint32_t>& labels, std::size_t n_classes,
              const ForestConfig& cfg, std::uint64_t stream_seed)
      : columns(columns),
        labels(labels),
        n_classes(n_classes),
        cfg(cfg),
        n_features(columns.size()),
        subset_size(cfg.features_per_node(columns.size())),
        root_size(labels.size()),
        rng(stream_seed),
        importances(columns.size(), 0.0) {}

  void build() {
    std::vector<std::uint32_t> sample;
    const auto n = static_cast<std::uint32_t>(labels.size());
    sample.reserve(n);
    if (cfg.bootstrap) {
      for (std::uint32_t i = 0; i < n; ++i) {
        sample.push_back(static_cast<std::uint32_t>(rng.uniform_index(n)));
      }
    } else {
      for (std::uint32_t i = 0; i < n; ++i) sample.push_back(i);
    }
    grow(sample, 0);
  }

  std::int32_t make_leaf(const std::vector<std::uint32_t>& counts) {
    TreeNode node;
    node.class_counts = counts;
    tree.nodes.push_back(std::move(node));
    return static_cast<std::int32_t>(tree.nodes.size() - 1);
  }

  // Returns the node index for this sample subset.
  std::int32_t grow(std::vector<std::uint32_t>& sample, std::size_t depth) {
    std::vector<std::uint32_t> counts(n_classes, 0);
    for (const auto i : sample) ++counts[labels[i]];
    const std::size_t n = sample.size();

    const bool pure =
        std::count_if(counts.begin(), counts.end(), [](std::uint32_t c) { return c > 0; }) <= 1;
    const bool deep = cfg.max_depth && depth >= *cfg.max_depth;
    if (pure || deep || n < 2 * cfg.min_samples_leaf) return make_leaf(counts);

    const double parent_gini = gini(counts, n);

    // Candidate features, ascending so equal gains resolve to the
    // lowest feature index / threshold.
    const auto candidates = rng.sample_distinct(subset_size, n_features);

    double best_gain = 0.0;
    std::int32_t best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, std::uint32_t>> ordered;
    ordered.reserve(n);
    std::vector<std::uint32_t> left_counts(n_classes, 0);

    for (const auto feature : candidates) {
      const auto& column = columns[feature];
      ordered.clear();
      for (const auto i : sample) ordered.emplace_back(column[i], labels[i]);
      std::sort(ordered.begin(), ordered.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (ordered.front().first == ordered.back().first) continue;

      std::fill(left_counts.begin(), left_counts.end(), 0);
      for (std::size_t i = 1; i < n; ++i) {
        ++left_counts[ordered[i - 1].second];
        if (ordered[i].first == ordered[i - 1].first) continue;
        const std::size_t n_left = i;
        const std::size_t n_right = n - i;
        if (n_left < cfg.min_samples_leaf || n_right < cfg.min_samples_leaf) continue;

        double left_impurity = 1.0;
        double right_impurity = 1.0;
        for (std::size_t c = 0; c < n_classes; ++c) {
          const double pl = static_cast<double>(left_counts[c]) / static_cast<double>(n_left);
          const double pr = static_cast<double>(counts[c] - left_counts[c]) /
                            static_cast<double>(n_right);
          left_impurity -= pl * pl;
          right_impurity -= pr * pr;
        }
        const double weighted = (static_cast<double>(n_left) * left_impurity +
                                 static_cast<double>(n_right) * right_impurity) /
                                static_cast<double>(n);
        const double gain = parent_gini - weighted;
        if (gain > best_gain + 1e-15) {
          best_gain = gain;
          best_feature = static_cast<std::int32_t>(feature);
          const double lo = ordered[i - 1].first;
          const double hi = ordered[i].first;
          double threshold = lo + (hi - lo) / 2.0;
          if (!(threshold >= lo && threshold < hi)) threshold = lo;
          best_threshold = threshold;
        }
      }
    }

    if (best_feature < 0) return make_leaf(counts);

    importances[static_cast<std::size_t>(best_feature)] +=
        best_gain * static_cast<double>(n) / static_cast<double>(root_size);

    const auto& column = columns[static_cast<std::size_t>(best_feature)];
    const auto boundary = std::stable_partition(
        sample.begin(), sample.end(),
        [&](std::uint32_t i) { return column[i] <= best_threshold; });
    std::vector<std::uint32_t> right_sample(boundary, sample.end());
    sample.erase(boundary, sample.end());

    TreeNode node;
    node.feature = best_feature;
    node.threshold = best_threshold;
    tree.nodes.push_back(std::move(node));
    const auto index = static_cast<std::int32_t>(tree.nodes.size() - 1);

    const auto left = grow(sample, depth + 1);
    const auto right = grow(right_sample, depth + 1);
    tree.nodes[static_cast<std::size_t>(index)].left = left;
    tree.nodes[static_cast<std::size_t>(index)].right = right;
    return index;
  }
};

const std::vector<std::uint32_t>& leaf_counts(const Tree& tree, std::span<const double> features) {
  std::int32_t at = 0;
  for (;;) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(at)];
    if (node.feature < 0) return node.class_counts;
    at = features[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                            : node.right;
  }
}

}  // namespace

ClassifierModel train(const data::Dataset& dataset, const std::string& attribute,
                      const ForestConfig& cfg) {
  if (dataset.records.empty()) throw_data("EmptyDataset", "cannot train on an empty dataset");
  cfg.validate(dataset.dim());

  const data::LabelIndex labels = data::index_labels(dataset, attribute);
  if (labels.classes.size() < 2) {
    throw_data("SingleClass",
               "attribute '" + attribute + "' has fewer than two classes in the training data");
  }

  const std::size_t d = dataset.dim();
  std::vector<std::vector<double>> columns(d);
  for (std::size_t j = 0; j < d; ++j) columns[j] = data::feature_column(dataset, j);

  ClassifierModel model;
  model.attribute = attribute;
  model.classes = labels.classes;
  model.n_features = d;
  model.trees.resize(cfg.n_trees);

  std::vector<std::vector<double>> per_tree_importances(cfg.n_trees);
  parallel_for(cfg.n_trees, [&](std::size_t t) {
    TreeBuilder builder(columns, labels.codes, labels.classes.size(), cfg, mix64(cfg.seed, t));
    builder.build();
    model.trees[t] = std::move(builder.tree);
    per_tree_importances[t] = std::move(builder.importances);
  });

  model.importances.assign(d, 0.0);
  for (const auto& tree_importances : per_tree_importances) {
    for (std::size_t j = 0; j < d; ++j) model.importances[j] += tree_importances[j];
  }
  const double total = std::accumulate(model.importances.begin(), model.importances.end(), 0.0);
  if (total > 0.0) {
    for (auto& v : model.importances) v /= total;
  }
  return model;
}

std::vector<double> predict_proba(const ClassifierModel& model, std::span<const double> features) {
  if (!model.trained()) throw_data("UntrainedModel", "model has no trees");
  if (features.size() != model.n_features) {
    throw_data("DimensionMismatch", "feature vector has " + std::to_string(features.size()) +
                                        " dims, model expects " +
                                        std::to_string(model.n_features));
  }
  std::vector<double> proba(model.classes.size(), 0.0);
  for (const auto& tree : model.trees) {
    const auto& counts = leaf_counts(tree, features);
    const double total = static_cast<double>(
        std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
    for (std::size_t c = 0; c < proba.size(); ++c) {
      proba[c] += static_cast<double>(counts[c]) / total;
    }
  }
  const double n_trees = static_cast<double>(model.trees.size());
  for (auto& p : proba) p /= n_trees;
  return proba;
}

std::string predict(const ClassifierModel& model, std::span<const double> features) {
  const std::vector<double> proba = predict_proba(model, features);
  std::size_t best = 0;
  for (std::size_t c = 1; c < proba.size(); ++c) {
    if (proba[c] > proba[best]) best = c;
  }
  return model.classes[best];
}

double accuracy(const ClassifierModel& model, const data::Dataset& dataset) {
  if (!dataset.schema.has_attribute(model.attribute)) {
    throw_data("UnknownAttribute",
               "dataset schema has no attribute '" + model.attribute + "'");
  }
  if (dataset.records.empty()) throw_data("EmptyDataset", "cannot score an empty dataset");
  std::vector<std::uint8_t> hits(dataset.size(), 0);
  parallel_for(dataset.size(), [&](std::size_t i) {
    const auto& rec = dataset.records[i];
    hits[i] = predict(model, rec.features) == rec.labels.at(model.attribute) ? 1 : 0;
  });
  std::size_t correct = 0;
  for (const auto h : hits) correct += h;
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

void save_model(const ClassifierModel& model, const std::string& path) {
  json j;
  j["version"] = 1;
  j["attribute"] = model.attribute;
  j["classes"] = model.classes;
  j["n_features"] = model.n_features;
  j["importances"] = model.importances;
  json trees = json::array();
  for (const auto& tree : model.trees) {
    json nodes = json::array();
    for (const auto& node : tree.nodes) {
      if (node.feature < 0) {
        nodes.push_back(json{{"c", node.class_counts}});
      } else {
        nodes.push_back(json::array({node.feature, node.threshold, node.left, node.right}));
      }
    }
    trees.push_back(json{{"nodes", std::move(nodes)}});
  }
  j["trees"] = std::move(trees);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("IoError", "cannot write model file '" + path + "'");
  out << j.dump() << '\n';
  if (!out) throw_data("IoError", "write failure on model file '" + path + "'");
}

ClassifierModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("IoError", "cannot open model file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw_data("InvalidModel", std::string("model JSON parse failure: ") + e.what());
  }

  try {
    if (j.at("version").get<int>() != 1) {
      throw_data("InvalidModel", "unsupported model version in '" + path + "'");
    }
    ClassifierModel model;
    model.attribute = j.at("attribute").get<std::string>();
    model.classes = j.at("classes").get<std::vector<std::string>>();
    model.n_features = j.at("n_features").get<std::size_t>();
    model.importances = j.value("importances", std::vector<double>{});
    for (const auto& tree_json : j.at("trees")) {
      Tree tree;
      for (const auto& node_json : tree_json.at("nodes")) {
        TreeNode node;
        if (node_json.is_array()) {
          node.feature = node_json.at(0).get<std::int32_t>();
          node.threshold = node_json.at(1).get<double>();
          node.left = node_json.at(2).get<std::int32_t>();
          node.right = node_json.at(3).get<std::int32_t>();
        } else {
          node.class_counts = node_json.at("c").get<std::vector<std::uint32_t>>();
        }
        tree.nodes.push_back(std::move(node));
      }
      model.trees.push_back(std::move(tree));
    }
    return model;
  } catch (const json::exception& e) {
    throw_data("InvalidModel", std::string("malformed model file: ") + e.what());
  }
}

}  // namespace anon::forest
