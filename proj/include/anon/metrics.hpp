#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anon/dataset.hpp"
#include "anon/forest.hpp"

namespace anon::metrics {

struct UtilityWeights {
  std::map<std::string, double> alphas;  // additional attribute -> alpha
};

enum class Attack { CosineMatch, ClassifierAttack };

std::string attack_name(Attack attack);
Attack parse_attack(const std::string& name);

struct TopKPoint {
  std::size_t k = 0;
  double hit_rate = 0.0;
  double random_baseline = 0.0;  // k / N
};

struct EvaluationReport {
  double accuracy_interest = 0.0;
  std::map<std::string, double> accuracy_additional;
  double utility = 0.0;
  std::map<std::string, double> sensitive_accuracy;
  std::map<std::string, double> mixture;  // 1 - sensitive accuracy
  std::vector<TopKPoint> topk_curve;
  std::optional<double> mean_kl_nats;  // unset for the cosine attack
  std::string kl_attribute;            // which sensitive classifier the KL refers to
  bool kl_reverse = false;             // true: D(uniform || predicted)
  std::string attack;
  std::string params_digest;
  std::vector<std::string> warnings;
};

// U = P + sum_i alpha_i * Q_i. Missing weights count as 0 and add a
// warning instead of failing.
double utility(double accuracy_interest, const std::map<std::string, double>& accuracy_additional,
               const UtilityWeights& weights, std::vector<std::string>* warnings = nullptr);

// M = 1 - S.
double mixture(double sensitive_accuracy);

// For each probe record, all original record indices ranked ascending
// by cosine distance; ties keep original order.
std::vector<std::vector<std::uint32_t>> reidentify_cosine(const data::Dataset& anonymized,
                                                          const data::Dataset& originals);

// Fraction of records whose true index appears in the first k
// candidates.
double topk_hit_rate(const std::vector<std::vector<std::uint32_t>>& ranked,
                     const std::vector<std::uint32_t>& truth, std::size_t k);

// D_KL(proba || uniform) in nats; with reverse, D_KL(uniform || proba).
double kl_from_uniform(std::span<const double> proba, bool reverse = false);

struct ModelSet {
  std::vector<forest::ClassifierModel> models;

  const forest::ClassifierModel* find(const std::string& attribute) const;
  const forest::ClassifierModel& require(const std::string& attribute) const;
};

struct EvaluateOptions {
  Attack attack = Attack::ClassifierAttack;
  UtilityWeights weights;
  bool kl_reverse = false;
  std::string params_digest;
  std::vector<std::size_t> topk_grid;  // empty = default grid
};

// Owner-side protocol: models pretrained on original-distribution
// data, applied to the anonymized dataset; originals provide the
// ground truth and the cosine-attack gallery.
EvaluationReport evaluate(const data::Dataset& original, const data::Dataset& anonymized,
                          const ModelSet& models, const EvaluateOptions& options);

std::string report_to_json(const EvaluationReport& report);
void save_report(const EvaluationReport& report, const std::string& path);
void save_topk_csv(const EvaluationReport& report, const std::string& path);

}  // namespace anon::metrics
