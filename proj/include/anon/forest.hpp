#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anon/dataset.hpp"

namespace anon::forest {

enum class FeatureSubset { Sqrt, All, Fixed };

struct ForestConfig {
  std::size_t n_trees = 100;
  std::optional<std::size_t> max_depth;  // unset = grow until pure
  std::size_t min_samples_leaf = 1;
  FeatureSubset features_per_split = FeatureSubset::Sqrt;
  std::size_t fixed_features = 0;  // used when features_per_split == Fixed
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void validate(std::size_t dim) const;
  std::size_t features_per_node(std::size_t dim) const;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<std::uint32_t> class_counts;  // filled for leaves
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root
};

// A trained recognition model for one attribute. Immutable once
// trained; prediction is safe from concurrent callers.
struct ClassifierModel {
  std::string attribute;
  std::vector<std::string> classes;  // sorted; tie-breaks prefer earlier entries
  std::size_t n_features = 0;
  std::vector<Tree> trees;
  std::vector<double> importances;  // mean decrease in Gini impurity, sums to 1

  bool trained() const { return !trees.empty(); }
};

// CART-style trees on bootstrap samples, Gini split criterion over a
// per-node random feature subset, thresholds at midpoints of sorted
// distinct values. Tree t uses the RNG stream derived from
// (cfg.seed, t), so training parallelizes without changing the model.
ClassifierModel train(const data::Dataset& dataset, const std::string& attribute,
                      const ForestConfig& cfg);

std::vector<double> predict_proba(const ClassifierModel& model, std::span<const double> features);

// Argmax of predict_proba; ties break toward the earlier class.
std::string predict(const ClassifierModel& model, std::span<const double> features);

double accuracy(const ClassifierModel& model, const data::Dataset& dataset);

void save_model(const ClassifierModel& model, const std::string& path);
ClassifierModel load_model(const std::string& path);

}  // namespace anon::forest
