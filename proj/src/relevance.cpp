#include "anon/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "anon/error.hpp"

namespace anon::relevance {

void SelectionConfig::validate() const {
  auto check = [](double r, const std::string& name) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw_config("InvalidConfig", "retention ratio " + name + " must lie in [0, 1]");
    }
  };
  check(retention_interest, "r_p");
  check(retention_sensitive, "r_s");
  for (const auto& [attribute, ratio] : retention_additional) check(ratio, "r_q[" + attribute + "]");
}

std::vector<std::size_t> SelectionMask::selected_indices() const {
  std::vector<std::size_t> indices;
  indices.reserve(selected_count);
  for (std::size_t j = 0; j < included.size(); ++j) {
    if (included[j]) indices.push_back(j);
  }
  return indices;
}

std::string SelectionMask::digest() const {
  // FNV-1a over the bit pattern.
  std::uint64_t h = 1469598103934665603ULL;
  auto absorb = [&](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ULL;
  };
  absorb(included.size());
  for (std::size_t j = 0; j < included.size(); ++j) {
    if (included[j]) absorb(j + 1);
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(h));
  return buffer;
}

SelectionMask full_mask(std::size_t dim) {
  SelectionMask mask;
  mask.included.assign(dim, true);
  mask.selected_count = dim;
  return mask;
}

double mutual_information(std::span<const double> feature_values,
                          std::span<const std::uint32_t> labels, std::size_t n_bins) {
  if (feature_values.size() != labels.size()) {
    throw_data("LengthMismatch", "feature has " + std::to_string(feature_values.size()) +
                                     " values, labels have " + std::to_string(labels.size()));
  }
  if (feature_values.size() < 2) {
    throw_data("LengthMismatch", "mutual information needs at least 2 samples");
  }
  if (n_bins < 2) throw_config("InvalidConfig", "n_bins must be >= 2");

  const std::size_t n = feature_values.size();
  const auto [min_it, max_it] = std::minmax_element(feature_values.begin(), feature_values.end());
  const double lo = *min_it;
  const double hi = *max_it;

  std::vector<std::size_t> bin_of(n, 0);
  std::size_t used_bins = 1;
  if (hi > lo) {
    used_bins = n_bins;
    const double span = hi - lo;
    for (std::size_t i = 0; i < n; ++i) {
      const double scaled = (feature_values[i] - lo) / span * static_cast<double>(n_bins);
      auto b = static_cast<std::size_t>(scaled);
      if (b >= n_bins) b = n_bins - 1;
      bin_of[i] = b;
    }
  }

  const std::uint32_t n_classes = 1 + *std::max_element(labels.begin(), labels.end());
  std::vector<std::uint64_t> joint(used_bins * n_classes, 0);
  std::vector<std::uint64_t> bin_totals(used_bins, 0);
  std::vector<std::uint64_t> class_totals(n_classes, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++joint[bin_of[i] * n_classes + labels[i]];
    ++bin_totals[bin_of[i]];
    ++class_totals[labels[i]];
  }

  double mi = 0.0;
  const double total = static_cast<double>(n);
  for (std::size_t b = 0; b < used_bins; ++b) {
    for (std::uint32_t c = 0; c < n_classes; ++c) {
      const std::uint64_t count = joint[b * n_classes + c];
      if (count == 0) continue;
      const double p_joint = static_cast<double>(count) / total;
      const double p_bin = static_cast<double>(bin_totals[b]) / total;
      const double p_class = static_cast<double>(class_totals[c]) / total;
      mi += p_joint * std::log(p_joint / (p_bin * p_class));
    }
  }
  return std::max(mi, 0.0);
}

RelevanceScores relevance_mi(const data::Dataset& dataset, const std::string& attribute,
                             std::size_t n_bins) {
  const data::LabelIndex labels = data::index_labels(dataset, attribute);
  RelevanceScores scores;
  scores.attribute = attribute;
  scores.method = Method::MutualInformation;
  scores.scores.resize(dataset.dim());
  for (std::size_t j = 0; j < dataset.dim(); ++j) {
    const std::vector<double> column = data::feature_column(dataset, j);
    scores.scores[j] = mutual_information(column, labels.codes, n_bins);
  }
  return scores;
}

RelevanceScores relevance_model(const forest::ClassifierModel& model,
                                const std::string& attribute) {
  if (model.attribute != attribute) {
    throw_config("ModelLacksImportances", "model was trained for attribute '" + model.attribute +
                                              "', not '" + attribute + "'");
  }
  if (model.importances.size() != model.n_features) {
    throw_config("ModelLacksImportances",
                 "model carries no importance vector of the feature dimension");
  }
  RelevanceScores scores;
  scores.attribute = attribute;
  scores.method = Method::GiniImportance;
  scores.scores = model.importances;
  return scores;
}

std::vector<std::size_t> top_k_indices(std::span<const double> scores, std::size_t k) {
  k = std::min(k, scores.size());
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(k);
  return order;
}

namespace {

std::size_t retention_count(double ratio, std::size_t dim) {
  return static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(dim)));
}

}  // namespace

SelectionMask select_features(const RelevanceScores& interest,
                              const std::vector<RelevanceScores>& additional,
                              const std::optional<RelevanceScores>& sensitive,
                              const SelectionConfig& cfg) {
  cfg.validate();
  const std::size_t dim = interest.scores.size();
  auto check_length = [&](const RelevanceScores& scores) {
    if (scores.scores.size() != dim) {
      throw_data("LengthMismatch", "relevance for '" + scores.attribute + "' has " +
                                       std::to_string(scores.scores.size()) +
                                       " entries, expected " + std::to_string(dim));
    }
  };

  std::set<std::size_t> selected;
  for (const auto j : top_k_indices(interest.scores, retention_count(cfg.retention_interest, dim))) {
    selected.insert(j);
  }
  for (const auto& scores : additional) {
    check_length(scores);
    const auto it = cfg.retention_additional.find(scores.attribute);
    const double ratio = it == cfg.retention_additional.end() ? 0.0 : it->second;
    for (const auto j : top_k_indices(scores.scores, retention_count(ratio, dim))) {
      selected.insert(j);
    }
  }
  if (sensitive) {
    check_length(*sensitive);
    for (const auto j :
         top_k_indices(sensitive->scores, retention_count(cfg.retention_sensitive, dim))) {
      selected.erase(j);
    }
  }

  SelectionMask mask;
  mask.included.assign(dim, false);
  for (const auto j : selected) mask.included[j] = true;
  mask.selected_count = selected.size();
  return mask;
}

}  // namespace anon::relevance
