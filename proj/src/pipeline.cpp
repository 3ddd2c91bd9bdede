#include "anon/pipeline.hpp"

#include <algorithm>
#include <cstdio>

#include "anon/error.hpp"
#include "anon/rng.hpp"

namespace anon::pipeline {

std::string relevance_method_name(RelevanceMethod method) {
  return method == RelevanceMethod::Model ? "model" : "mutual_info";
}

RelevanceMethod parse_relevance_method(const std::string& name) {
  if (name == "model") return RelevanceMethod::Model;
  if (name == "mutual_info") return RelevanceMethod::MutualInfo;
  throw_config("InvalidConfig",
               "relevance method must be 'model' or 'mutual_info', got '" + name + "'");
}

std::string ExperimentConfig::digest() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto absorb_bytes = [&](const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  auto absorb_u64 = [&](std::uint64_t v) { absorb_bytes(&v, sizeof(v)); };
  auto absorb_double = [&](double v) { absorb_bytes(&v, sizeof(v)); };
  auto absorb_string = [&](const std::string& s) {
    absorb_u64(s.size());
    absorb_bytes(s.data(), s.size());
  };

  absorb_u64(params.set_size);
  absorb_double(params.purity);
  absorb_double(params.weight);
  absorb_u64(params.seed);
  absorb_double(selection.retention_interest);
  for (const auto& [attribute, ratio] : selection.retention_additional) {
    absorb_string(attribute);
    absorb_double(ratio);
  }
  absorb_double(selection.retention_sensitive);
  absorb_string(rejection_attribute);
  absorb_u64(static_cast<std::uint64_t>(relevance_method));
  absorb_u64(mi_bins);
  absorb_u64(forest.n_trees);
  absorb_u64(forest.max_depth ? *forest.max_depth + 1 : 0);
  absorb_u64(forest.min_samples_leaf);
  absorb_u64(static_cast<std::uint64_t>(forest.features_per_split));
  absorb_u64(forest.fixed_features);
  absorb_u64(forest.bootstrap ? 1 : 0);
  absorb_u64(forest.seed);
  for (const auto& [attribute, alpha] : weights.alphas) {
    absorb_string(attribute);
    absorb_double(alpha);
  }
  absorb_u64(static_cast<std::uint64_t>(attack));
  absorb_u64(kl_reverse ? 1 : 0);
  for (const auto& attribute : classifier_sensitive) absorb_string(attribute);
  absorb_double(train_fraction);
  absorb_u64(split_seed);

  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(h));
  return buffer;
}

namespace {

std::string rejection_source(const data::Schema& schema, const ExperimentConfig& cfg) {
  if (!cfg.rejection_attribute.empty()) {
    if (!schema.has_attribute(cfg.rejection_attribute)) {
      throw_data("UnknownAttribute",
                 "rejection attribute '" + cfg.rejection_attribute + "' is not in the schema");
    }
    return cfg.rejection_attribute;
  }
  if (schema.sensitive_attributes.empty()) {
    throw_config("InvalidConfig",
                 "retention_sensitive > 0 needs a sensitive attribute in the schema");
  }
  return schema.sensitive_attributes.front();
}

std::vector<std::string> attack_targets(const data::Schema& schema, const ExperimentConfig& cfg) {
  if (cfg.classifier_sensitive.empty()) return schema.sensitive_attributes;
  for (const auto& attribute : cfg.classifier_sensitive) {
    if (!schema.has_attribute(attribute)) {
      throw_data("UnknownAttribute",
                 "classifier_sensitive attribute '" + attribute + "' is not in the schema");
    }
  }
  return cfg.classifier_sensitive;
}

relevance::RelevanceScores scores_for(const data::Dataset& dataset, const std::string& attribute,
                                      const ExperimentConfig& cfg,
                                      const metrics::ModelSet* model_source) {
  if (cfg.relevance_method == RelevanceMethod::MutualInfo) {
    return relevance::relevance_mi(dataset, attribute, cfg.mi_bins);
  }
  if (model_source) {
    if (const auto* model = model_source->find(attribute)) {
      return relevance::relevance_model(*model, attribute);
    }
  }
  const auto model = forest::train(dataset, attribute, cfg.forest);
  return relevance::relevance_model(model, attribute);
}

}  // namespace

RelevanceBundle compute_relevance(const data::Dataset& dataset, const ExperimentConfig& cfg,
                                  const metrics::ModelSet* model_source) {
  const data::Schema& schema = dataset.schema;
  RelevanceBundle bundle;
  bundle.interest = scores_for(dataset, schema.attribute_of_interest, cfg, model_source);
  for (const auto& attribute : schema.additional_attributes) {
    const auto it = cfg.selection.retention_additional.find(attribute);
    if (it == cfg.selection.retention_additional.end() || it->second <= 0.0) continue;
    bundle.additional.push_back(scores_for(dataset, attribute, cfg, model_source));
  }
  if (cfg.selection.retention_sensitive > 0.0) {
    bundle.sensitive = scores_for(dataset, rejection_source(schema, cfg), cfg, model_source);
  }
  return bundle;
}

relevance::SelectionMask build_mask(const RelevanceBundle& bundle, const ExperimentConfig& cfg) {
  return relevance::select_features(bundle.interest, bundle.additional, bundle.sensitive,
                                    cfg.selection);
}

AnonymizeRun run_anonymize(const data::Dataset& dataset, const ExperimentConfig& cfg) {
  cfg.params.validate();
  cfg.selection.validate();
  const RelevanceBundle bundle = compute_relevance(dataset, cfg);
  AnonymizeRun run;
  run.mask = build_mask(bundle, cfg);
  run.relevance_method = relevance_method_name(cfg.relevance_method);
  auto result = transform::anonymize(dataset, cfg.params, run.mask);
  run.dataset = std::move(result.dataset);
  run.clamped_records = result.clamped_records;
  return run;
}

metrics::ModelSet train_models(const data::Dataset& train, const ExperimentConfig& cfg) {
  const data::Schema& schema = train.schema;
  metrics::ModelSet models;
  models.models.push_back(forest::train(train, schema.attribute_of_interest, cfg.forest));
  for (const auto& attribute : schema.additional_attributes) {
    models.models.push_back(forest::train(train, attribute, cfg.forest));
  }
  std::vector<std::string> sensitive;
  if (cfg.attack == metrics::Attack::ClassifierAttack) {
    sensitive = attack_targets(schema, cfg);
  }
  if (cfg.selection.retention_sensitive > 0.0 &&
      cfg.relevance_method == RelevanceMethod::Model) {
    const std::string source = rejection_source(schema, cfg);
    if (std::find(sensitive.begin(), sensitive.end(), source) == sensitive.end()) {
      sensitive.push_back(source);
    }
  }
  for (const auto& attribute : sensitive) {
    models.models.push_back(forest::train(train, attribute, cfg.forest));
  }
  return models;
}

ExperimentResult run_experiment_with_models(const data::Dataset& eval_half,
                                            const metrics::ModelSet& models,
                                            const RelevanceBundle& bundle,
                                            const ExperimentConfig& cfg) {
  const relevance::SelectionMask mask = build_mask(bundle, cfg);
  auto anonymized = transform::anonymize(eval_half, cfg.params, mask);

  metrics::EvaluateOptions options;
  options.attack = cfg.attack;
  options.weights = cfg.weights;
  options.kl_reverse = cfg.kl_reverse;
  options.params_digest = cfg.digest();

  ExperimentResult result;
  result.report = metrics::evaluate(eval_half, anonymized.dataset, models, options);
  result.clamped_records = anonymized.clamped_records;
  result.mask_selected = mask.selected_count;
  return result;
}

ExperimentResult run_experiment(const data::Dataset& dataset, const ExperimentConfig& cfg) {
  cfg.params.validate();
  cfg.selection.validate();
  const data::SplitResult parts = data::split(dataset, cfg.train_fraction, cfg.split_seed);
  const metrics::ModelSet models = train_models(parts.train, cfg);
  const RelevanceBundle bundle = compute_relevance(parts.train, cfg, &models);
  ExperimentResult result = run_experiment_with_models(parts.eval, models, bundle, cfg);
  result.degenerate_split = parts.degenerate;
  return result;
}

}  // namespace anon::pipeline
