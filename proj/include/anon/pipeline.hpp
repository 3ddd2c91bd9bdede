#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "anon/dataset.hpp"
#include "anon/forest.hpp"
#include "anon/metrics.hpp"
#include "anon/relevance.hpp"
#include "anon/transform.hpp"

namespace anon::pipeline {

enum class RelevanceMethod { Model, MutualInfo };

std::string relevance_method_name(RelevanceMethod method);
RelevanceMethod parse_relevance_method(const std::string& name);

// One experiment end to end: relevance estimation -> feature selection
// -> random-set weighted-mean transform -> owner-side evaluation.
struct ExperimentConfig {
  transform::AnonymizationParams params;
  relevance::SelectionConfig selection;
  // Sensitive attribute whose relevance drives rejection; empty means
  // the first schema sensitive attribute. Only used when
  // retention_sensitive > 0.
  std::string rejection_attribute;
  RelevanceMethod relevance_method = RelevanceMethod::Model;
  std::size_t mi_bins = relevance::kDefaultMiBins;
  forest::ForestConfig forest;
  metrics::UtilityWeights weights;
  metrics::Attack attack = metrics::Attack::ClassifierAttack;
  bool kl_reverse = false;
  // Sensitive attributes the classifier attack runs against; empty
  // means all schema sensitive attributes.
  std::vector<std::string> classifier_sensitive;
  double train_fraction = 0.8;
  std::uint64_t split_seed = 0;

  std::string digest() const;  // stable hex digest over all fields
};

struct RelevanceBundle {
  relevance::RelevanceScores interest;
  std::vector<relevance::RelevanceScores> additional;
  std::optional<relevance::RelevanceScores> sensitive;
};

// Scores per Alg. 1 lines 1-3, from forest importances or MI.
// model_source supplies pretrained forests for the Model method; when
// null (or an attribute is missing there) forests are trained on
// `dataset` with cfg.forest.
RelevanceBundle compute_relevance(const data::Dataset& dataset, const ExperimentConfig& cfg,
                                  const metrics::ModelSet* model_source = nullptr);

relevance::SelectionMask build_mask(const RelevanceBundle& bundle, const ExperimentConfig& cfg);

struct AnonymizeRun {
  data::Dataset dataset;
  relevance::SelectionMask mask;
  std::size_t clamped_records = 0;
  std::string relevance_method;
};

// The product pipeline: anonymize a whole dataset, relevance computed
// from the dataset itself.
AnonymizeRun run_anonymize(const data::Dataset& dataset, const ExperimentConfig& cfg);

// Models the owner trains on the original data: interest + additional
// always, sensitive per cfg (attack targets and the rejection source).
metrics::ModelSet train_models(const data::Dataset& train, const ExperimentConfig& cfg);

struct ExperimentResult {
  metrics::EvaluationReport report;
  std::size_t clamped_records = 0;
  std::size_t mask_selected = 0;
  bool degenerate_split = false;
};

// The owner-side measurement protocol: stratified split, models on the
// train half, anonymize the eval half, score models on it.
ExperimentResult run_experiment(const data::Dataset& dataset, const ExperimentConfig& cfg);

// Same protocol with pretrained models / precomputed relevance, so
// sweeps can reuse them across cells that share a repetition.
ExperimentResult run_experiment_with_models(const data::Dataset& eval_half,
                                            const metrics::ModelSet& models,
                                            const RelevanceBundle& bundle,
                                            const ExperimentConfig& cfg);

}  // namespace anon::pipeline
