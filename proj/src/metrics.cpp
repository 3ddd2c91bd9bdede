#include "anon/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "anon/error.hpp"
#include "anon/parallel.hpp"

namespace anon::metrics {

using nlohmann::json;

std::string attack_name(Attack attack) {
  return attack == Attack::CosineMatch ? "cosine" : "classifier";
}

Attack parse_attack(const std::string& name) {
  if (name == "cosine") return Attack::CosineMatch;
  if (name == "classifier") return Attack::ClassifierAttack;
  throw_config("InvalidConfig", "attack must be 'cosine' or 'classifier', got '" + name + "'");
}

double utility(double accuracy_interest, const std::map<std::string, double>& accuracy_additional,
               const UtilityWeights& weights, std::vector<std::string>* warnings) {
  double total = accuracy_interest;
  for (const auto& [attribute, accuracy] : accuracy_additional) {
    const auto it = weights.alphas.find(attribute);
    if (it == weights.alphas.end()) {
      if (warnings) {
        warnings->push_back("no utility weight for additional attribute '" + attribute +
                            "', using alpha=0");
      }
      continue;
    }
    total += it->second * accuracy;
  }
  return total;
}

double mixture(double sensitive_accuracy) {
  if (!(sensitive_accuracy >= 0.0 && sensitive_accuracy <= 1.0)) {
    throw_data("OutOfRange", "sensitive accuracy must lie in [0, 1]");
  }
  return 1.0 - sensitive_accuracy;
}

std::vector<std::vector<std::uint32_t>> reidentify_cosine(const data::Dataset& anonymized,
                                                          const data::Dataset& originals) {
  if (originals.records.empty()) throw_data("EmptyDataset", "no originals to match against");
  if (anonymized.dim() != originals.dim()) {
    throw_data("DimensionMismatch", "anonymized and original feature dimensions differ");
  }

  const std::size_t n_orig = originals.size();
  std::vector<double> orig_norms(n_orig);
  for (std::size_t i = 0; i < n_orig; ++i) {
    const auto& v = originals.records[i].features;
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (norm == 0.0) {
      throw_data("ZeroNormVector", "original record '" + originals.records[i].id +
                                       "' has zero norm; cosine distance undefined");
    }
    orig_norms[i] = norm;
  }

  std::vector<std::vector<std::uint32_t>> ranked(anonymized.size());
  parallel_for(anonymized.size(), [&](std::size_t i) {
    const auto& probe = anonymized.records[i].features;
    const double probe_norm =
        std::sqrt(std::inner_product(probe.begin(), probe.end(), probe.begin(), 0.0));
    if (probe_norm == 0.0) {
      throw_data("ZeroNormVector", "anonymized record '" + anonymized.records[i].id +
                                       "' has zero norm; cosine distance undefined");
    }

    std::vector<double> distance(n_orig);
    for (std::size_t j = 0; j < n_orig; ++j) {
      const auto& gallery = originals.records[j].features;
      const double dot =
          std::inner_product(probe.begin(), probe.end(), gallery.begin(), 0.0);
      distance[j] = 1.0 - dot / (probe_norm * orig_norms[j]);
    }

    std::vector<std::uint32_t> order(n_orig);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return distance[a] < distance[b];
    });
    ranked[i] = std::move(order);
  });
  return ranked;
}

double topk_hit_rate(const std::vector<std::vector<std::uint32_t>>& ranked,
                     const std::vector<std::uint32_t>& truth, std::size_t k) {
  if (ranked.empty()) throw_data("EmptyDataset", "no rankings to score");
  if (ranked.size() != truth.size()) {
    throw_data("LengthMismatch", "rankings and truth have different lengths");
  }
  const std::size_t n_candidates = ranked.front().size();
  if (k < 1 || k > n_candidates) {
    throw_data("KOutOfRange",
               "k=" + std::to_string(k) + " outside [1, " + std::to_string(n_candidates) + "]");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& candidates = ranked[i];
    for (std::size_t r = 0; r < k; ++r) {
      if (candidates[r] == truth[i]) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(ranked.size());
}

double kl_from_uniform(std::span<const double> proba, bool reverse) {
  if (proba.empty()) throw_data("NotADistribution", "empty probability vector");
  double sum = 0.0;
  for (const double p : proba) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw_data("NotADistribution", "probabilities must be finite and nonnegative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw_data("NotADistribution", "probabilities sum to " + std::to_string(sum) + ", not 1");
  }

  const double n = static_cast<double>(proba.size());
  double kl = 0.0;
  if (reverse) {
    // D(uniform || p); the floor keeps empty-leaf zeros finite.
    const double u = 1.0 / n;
    for (const double p : proba) kl += u * std::log(u / std::max(p, 1e-12));
  } else {
    for (const double p : proba) {
      if (p > 0.0) kl += p * std::log(p * n);
    }
  }
  return std::max(kl, 0.0);
}

const forest::ClassifierModel* ModelSet::find(const std::string& attribute) const {
  for (const auto& model : models) {
    if (model.attribute == attribute) return &model;
  }
  return nullptr;
}

const forest::ClassifierModel& ModelSet::require(const std::string& attribute) const {
  const auto* model = find(attribute);
  if (!model) throw_data("UntrainedModel", "no trained model for attribute '" + attribute + "'");
  if (!model->trained()) {
    throw_data("UntrainedModel", "model for attribute '" + attribute + "' has no trees");
  }
  return *model;
}

namespace {

std::vector<std::size_t> default_topk_grid(std::size_t n) {
  const std::size_t seeds[] = {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000};
  std::set<std::size_t> grid;
  for (const auto k : seeds) {
    if (k <= n) grid.insert(k);
  }
  grid.insert(n);
  return {grid.begin(), grid.end()};
}

double model_accuracy_on(const forest::ClassifierModel& model, const data::Dataset& dataset) {
  return forest::accuracy(model, dataset);
}

// Ranking of class indices by descending probability, earlier class
// first on ties.
std::vector<std::uint32_t> rank_classes(const std::vector<double>& proba) {
  std::vector<std::uint32_t> order(proba.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return proba[a] > proba[b]; });
  return order;
}

}  // namespace

EvaluationReport evaluate(const data::Dataset& original, const data::Dataset& anonymized,
                          const ModelSet& models, const EvaluateOptions& options) {
  if (original.size() != anonymized.size()) {
    throw_data("MisalignedDatasets", "original and anonymized record counts differ");
  }
  for (std::size_t i = 0; i < original.size(); ++i) {
    if (original.records[i].id != anonymized.records[i].id) {
      throw_data("MisalignedDatasets", "record ids diverge at row " + std::to_string(i));
    }
  }
  if (original.records.empty()) throw_data("EmptyDataset", "nothing to evaluate");

  const data::Schema& schema = anonymized.schema;
  EvaluationReport report;
  report.attack = attack_name(options.attack);
  report.params_digest = options.params_digest;
  report.kl_reverse = options.kl_reverse;

  report.accuracy_interest =
      model_accuracy_on(models.require(schema.attribute_of_interest), anonymized);
  for (const auto& attribute : schema.additional_attributes) {
    if (const auto* model = models.find(attribute)) {
      report.accuracy_additional[attribute] = model_accuracy_on(*model, anonymized);
    } else {
      report.warnings.push_back("no model for additional attribute '" + attribute +
                                "'; skipped in the report");
    }
  }
  report.utility = utility(report.accuracy_interest, report.accuracy_additional, options.weights,
                           &report.warnings);

  if (options.attack == Attack::CosineMatch) {
    // Every record counts as its own identity: the attack succeeds
    // when the matching original ranks among the top k.
    const auto ranked = reidentify_cosine(anonymized, original);
    std::vector<std::uint32_t> truth(original.size());
    std::iota(truth.begin(), truth.end(), 0);

    const auto grid =
        options.topk_grid.empty() ? default_topk_grid(original.size()) : options.topk_grid;
    for (const auto k : grid) {
      TopKPoint point;
      point.k = k;
      point.hit_rate = topk_hit_rate(ranked, truth, k);
      point.random_baseline = static_cast<double>(k) / static_cast<double>(original.size());
      report.topk_curve.push_back(point);
    }

    const double rank1 = report.topk_curve.front().k == 1
                             ? report.topk_curve.front().hit_rate
                             : topk_hit_rate(ranked, truth, 1);
    report.sensitive_accuracy["identity"] = rank1;
    report.mixture["identity"] = mixture(rank1);
    report.kl_attribute.clear();
    report.mean_kl_nats.reset();
    return report;
  }

  // Classifier attack: the owner's sensitive-attribute models applied
  // to the anonymized records.
  bool first_sensitive = true;
  for (const auto& attribute : schema.sensitive_attributes) {
    const auto* model = models.find(attribute);
    if (!model) {
      report.warnings.push_back("no model for sensitive attribute '" + attribute +
                                "'; skipped in the report");
      continue;
    }
    const double acc = model_accuracy_on(*model, anonymized);
    report.sensitive_accuracy[attribute] = acc;
    report.mixture[attribute] = mixture(acc);

    if (first_sensitive) {
      first_sensitive = false;
      report.kl_attribute = attribute;

      const data::LabelIndex labels = data::index_labels(anonymized, attribute);
      std::vector<std::uint32_t> truth(anonymized.size());
      std::vector<std::uint32_t> label_to_class(labels.classes.size());
      for (std::uint32_t c = 0; c < labels.classes.size(); ++c) {
        const auto it = std::find(model->classes.begin(), model->classes.end(),
                                  labels.classes[c]);
        if (it == model->classes.end()) {
          throw_data("UntrainedModel", "model for '" + attribute +
                                           "' never saw class '" + labels.classes[c] + "'");
        }
        label_to_class[c] = static_cast<std::uint32_t>(it - model->classes.begin());
      }

      std::vector<double> per_record_kl(anonymized.size());
      std::vector<std::vector<std::uint32_t>> ranked(anonymized.size());
      parallel_for(anonymized.size(), [&](std::size_t i) {
        const auto proba = forest::predict_proba(*model, anonymized.records[i].features);
        per_record_kl[i] = kl_from_uniform(proba, options.kl_reverse);
        ranked[i] = rank_classes(proba);
        truth[i] = label_to_class[labels.codes[i]];
      });
      report.mean_kl_nats =
          std::accumulate(per_record_kl.begin(), per_record_kl.end(), 0.0) /
          static_cast<double>(per_record_kl.size());

      const std::size_t n_classes = model->classes.size();
      const auto grid =
          options.topk_grid.empty() ? default_topk_grid(n_classes) : options.topk_grid;
      for (const auto k : grid) {
        if (k > n_classes) continue;
        TopKPoint point;
        point.k = k;
        point.hit_rate = topk_hit_rate(ranked, truth, k);
        point.random_baseline = static_cast<double>(k) / static_cast<double>(n_classes);
        report.topk_curve.push_back(point);
      }
    }
  }
  if (first_sensitive) {
    report.warnings.push_back("classifier attack ran with no sensitive-attribute model");
  }
  return report;
}

namespace {

json report_json(const EvaluationReport& report) {
  json j;
  j["accuracy_interest"] = report.accuracy_interest;
  j["accuracy_additional"] = report.accuracy_additional;
  j["utility"] = report.utility;
  j["sensitive_accuracy"] = report.sensitive_accuracy;
  j["mixture"] = report.mixture;
  json curve = json::array();
  for (const auto& point : report.topk_curve) {
    curve.push_back(json{{"k", point.k},
                         {"hit_rate", point.hit_rate},
                         {"random_baseline", point.random_baseline}});
  }
  j["topk_curve"] = std::move(curve);
  if (report.mean_kl_nats) {
    j["mean_kl_nats"] = *report.mean_kl_nats;
  } else {
    j["mean_kl_nats"] = nullptr;
  }
  j["kl_attribute"] = report.kl_attribute;
  j["kl_direction"] = report.kl_reverse ? "uniform_vs_predicted" : "predicted_vs_uniform";
  j["attack"] = report.attack;
  j["params_digest"] = report.params_digest;
  j["warnings"] = report.warnings;
  return j;
}

std::string format_double_csv(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

}  // namespace

std::string report_to_json(const EvaluationReport& report) { return report_json(report).dump(2); }

void save_report(const EvaluationReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("IoError", "cannot write report file '" + path + "'");
  out << report_to_json(report) << '\n';
  if (!out) throw_data("IoError", "write failure on report file '" + path + "'");
}

void save_topk_csv(const EvaluationReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("IoError", "cannot write top-k file '" + path + "'");
  out << "k,hit_rate,random_baseline\n";
  for (const auto& point : report.topk_curve) {
    out << point.k << ',' << format_double_csv(point.hit_rate) << ','
        << format_double_csv(point.random_baseline) << '\n';
  }
  if (!out) throw_data("IoError", "write failure on top-k file '" + path + "'");
}

}  // namespace anon::metrics
