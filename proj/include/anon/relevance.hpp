#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anon/dataset.hpp"
#include "anon/forest.hpp"

namespace anon::relevance {

enum class Method { GiniImportance, MutualInformation };

// Per-feature relevance of one attribute (nonnegative, length = dim).
struct RelevanceScores {
  std::string attribute;
  Method method = Method::MutualInformation;
  std::vector<double> scores;
};

struct SelectionConfig {
  double retention_interest = 1.0;                       // r_p
  std::map<std::string, double> retention_additional;    // attribute -> r_q
  double retention_sensitive = 0.0;                      // r_s, fraction rejected

  void validate() const;  // all ratios in [0, 1]
};

// Indicator vector over feature indices chosen by the selection
// function; selected features get the anchored weighted mean.
struct SelectionMask {
  std::vector<bool> included;
  std::size_t selected_count = 0;

  std::vector<std::size_t> selected_indices() const;
  std::string digest() const;  // stable hex digest for run sidecars
};

SelectionMask full_mask(std::size_t dim);

// Plug-in discrete MI (nats) after equal-width binning of the feature
// over [min, max]; a constant feature maps to a single bin.
double mutual_information(std::span<const double> feature_values,
                          std::span<const std::uint32_t> labels, std::size_t n_bins);

constexpr std::size_t kDefaultMiBins = 16;

RelevanceScores relevance_mi(const data::Dataset& dataset, const std::string& attribute,
                             std::size_t n_bins = kDefaultMiBins);

// Gini importances of a trained forest, as relevance for its attribute.
RelevanceScores relevance_model(const forest::ClassifierModel& model, const std::string& attribute);

// Top-ceil(r*dim) by score (descending, lower index wins ties) for the
// interest and each additional attribute, minus the top sensitive set.
SelectionMask select_features(const RelevanceScores& interest,
                              const std::vector<RelevanceScores>& additional,
                              const std::optional<RelevanceScores>& sensitive,
                              const SelectionConfig& cfg);

// Indices of the k best scores, descending, lower index first on ties.
std::vector<std::size_t> top_k_indices(std::span<const double> scores, std::size_t k);

}  // namespace anon::relevance
