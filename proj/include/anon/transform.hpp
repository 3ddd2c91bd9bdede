#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "anon/dataset.hpp"
#include "anon/relevance.hpp"
#include "anon/rng.hpp"

namespace anon::transform {

struct AnonymizationParams {
  std::size_t set_size = 1;  // g
  double purity = 1.0;       // t; effective range is [1/g, 1] after clamping
  double weight = 1.0;       // w
  std::uint64_t seed = 0;

  void validate() const;  // throws Error(Config, "InvalidConfig")
};

// Per-record random set: g distinct record indices including the
// target, matching_count of which share the target's
// attribute-of-interest value.
struct RandomSet {
  std::vector<std::uint32_t> member_indices;  // target first
  std::size_t matching_count = 0;
  bool clamped = false;  // purity was infeasible for the available pools
};

// Record indices grouped by attribute-of-interest class, so random
// sets draw from the matching / non-matching pools in O(g log n).
class ClassPools {
 public:
  explicit ClassPools(const data::Dataset& dataset);

  std::size_t n_records() const { return class_of_.size(); }
  std::size_t pool_size(std::uint32_t cls) const { return pools_[cls].size(); }

  RandomSet assemble(std::uint32_t target_index, const AnonymizationParams& params,
                     Rng& stream) const;

 private:
  std::uint32_t map_other(std::uint32_t target_class, std::uint64_t virtual_index) const;

  std::vector<std::vector<std::uint32_t>> pools_;   // per class, ascending record indices
  std::vector<std::uint32_t> class_of_;             // per record
  std::vector<std::uint32_t> position_in_pool_;     // per record
};

// Convenience wrapper building pools and the per-record stream
// (hash of params.seed and target_index) for a single call.
RandomSet assemble_random_set(const data::Dataset& dataset, std::uint32_t target_index,
                              const AnonymizationParams& params);

// Alg core: anchored weighted mean on mask-selected coordinates, plain
// member mean elsewhere. members must include the target.
std::vector<double> weighted_mean_transform(std::span<const double> target,
                                            const std::vector<std::span<const double>>& members,
                                            double weight, const relevance::SelectionMask& mask);

struct AnonymizeResult {
  data::Dataset dataset;
  std::size_t clamped_records = 0;
};

// Transforms every record against the original dataset (records are
// mutually independent; safe to process concurrently). Ids and labels
// are preserved; only features change.
AnonymizeResult anonymize(const data::Dataset& dataset, const AnonymizationParams& params,
                          const relevance::SelectionMask& mask);

}  // namespace anon::transform
