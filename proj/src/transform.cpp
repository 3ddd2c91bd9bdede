#include "anon/transform.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "anon/error.hpp"
#include "anon/parallel.hpp"

namespace anon::transform {

void AnonymizationParams::validate() const {
  if (set_size < 1) throw_config("InvalidConfig", "set_size g must be >= 1");
  if (!(purity >= 0.0 && purity <= 1.0)) {
    throw_config("InvalidConfig", "purity t must lie in [0, 1]");
  }
  if (!(weight >= 1.0)) throw_config("InvalidConfig", "weight w must be >= 1");
}

ClassPools::ClassPools(const data::Dataset& dataset) {
  const data::LabelIndex labels =
      data::index_labels(dataset, dataset.schema.attribute_of_interest);
  pools_.resize(labels.classes.size());
  class_of_ = labels.codes;
  position_in_pool_.resize(dataset.size());
  for (std::uint32_t i = 0; i < dataset.size(); ++i) {
    position_in_pool_[i] = static_cast<std::uint32_t>(pools_[class_of_[i]].size());
    pools_[class_of_[i]].push_back(i);
  }
}

std::uint32_t ClassPools::map_other(std::uint32_t target_class,
                                    std::uint64_t virtual_index) const {
  for (std::uint32_t cls = 0; cls < pools_.size(); ++cls) {
    if (cls == target_class) continue;
    if (virtual_index < pools_[cls].size()) {
      return pools_[cls][virtual_index];
    }
    virtual_index -= pools_[cls].size();
  }
  throw_runtime("InternalError", "virtual index beyond the non-matching pool");
}

RandomSet ClassPools::assemble(std::uint32_t target_index, const AnonymizationParams& params,
                               Rng& stream) const {
  const std::size_t n = n_records();
  if (n == 0) throw_data("EmptyDataset", "cannot assemble a random set from an empty dataset");
  if (params.set_size > n) {
    throw_data("SetTooLarge", "set_size g=" + std::to_string(params.set_size) +
                                  " exceeds the dataset size " + std::to_string(n));
  }

  const std::uint32_t cls = class_of_[target_index];
  const std::size_t same_available = pools_[cls].size();       // includes the target
  const std::size_t other_available = n - same_available;
  const std::size_t g = params.set_size;

  // m counts the target itself, which always matches its own class.
  const auto requested =
      static_cast<long long>(std::llround(params.purity * static_cast<double>(g)));
  const long long lowest = std::max<long long>(1, static_cast<long long>(g) -
                                                      static_cast<long long>(other_available));
  const long long highest =
      std::min<long long>(static_cast<long long>(g), static_cast<long long>(same_available));
  const long long m = std::clamp(requested, lowest, highest);

  RandomSet set;
  set.matching_count = static_cast<std::size_t>(m);
  set.clamped = m != requested;
  set.member_indices.reserve(g);
  set.member_indices.push_back(target_index);

  // Matching members beyond the target, drawn from the same-class pool
  // with the target's slot skipped.
  const std::uint32_t target_pos = position_in_pool_[target_index];
  for (const auto p : stream.sample_distinct(static_cast<std::uint64_t>(m - 1),
                                             same_available - 1)) {
    const auto shifted = static_cast<std::uint32_t>(p >= target_pos ? p + 1 : p);
    set.member_indices.push_back(pools_[cls][shifted]);
  }

  for (const auto p :
       stream.sample_distinct(static_cast<std::uint64_t>(g) - static_cast<std::uint64_t>(m),
                              other_available)) {
    set.member_indices.push_back(map_other(cls, p));
  }
  return set;
}

RandomSet assemble_random_set(const data::Dataset& dataset, std::uint32_t target_index,
                              const AnonymizationParams& params) {
  params.validate();
  if (target_index >= dataset.size()) {
    throw_data("DimensionMismatch", "target index out of range");
  }
  const ClassPools pools(dataset);
  Rng stream(mix64(params.seed, target_index));
  return pools.assemble(target_index, params, stream);
}

std::vector<double> weighted_mean_transform(std::span<const double> target,
                                            const std::vector<std::span<const double>>& members,
                                            double weight,
                                            const relevance::SelectionMask& mask) {
  if (members.empty()) throw_data("EmptyMembers", "the random set must contain the target");
  const std::size_t dim = target.size();
  if (mask.included.size() != dim) {
    throw_data("DimensionMismatch", "mask length " + std::to_string(mask.included.size()) +
                                        " differs from feature dimension " + std::to_string(dim));
  }
  for (const auto& member : members) {
    if (member.size() != dim) {
      throw_data("DimensionMismatch", "random-set member dimension differs from the target");
    }
  }

  // Single member means G = {d}: both branches reduce to d itself, so
  // return it bit-exactly rather than through the arithmetic.
  if (members.size() == 1) return std::vector<double>(target.begin(), target.end());

  const double g = static_cast<double>(members.size());
  const double anchored_denominator = (weight - 1.0) + g;

  std::vector<double> result(dim, 0.0);
  for (const auto& member : members) {
    for (std::size_t j = 0; j < dim; ++j) result[j] += member[j];
  }
  for (std::size_t j = 0; j < dim; ++j) {
    if (mask.included[j]) {
      result[j] = ((weight - 1.0) * target[j] + result[j]) / anchored_denominator;
    } else {
      result[j] /= g;
    }
  }
  return result;
}

AnonymizeResult anonymize(const data::Dataset& dataset, const AnonymizationParams& params,
                          const relevance::SelectionMask& mask) {
  params.validate();
  if (dataset.records.empty()) throw_data("EmptyDataset", "nothing to anonymize");
  if (params.set_size > dataset.size()) {
    throw_data("SetTooLarge", "set_size g=" + std::to_string(params.set_size) +
                                  " exceeds the dataset size " + std::to_string(dataset.size()));
  }
  if (mask.included.size() != dataset.dim()) {
    throw_data("DimensionMismatch", "mask length does not match the feature dimension");
  }

  const ClassPools pools(dataset);

  AnonymizeResult result;
  result.dataset.schema = dataset.schema;
  result.dataset.records.resize(dataset.size());

  std::atomic<std::size_t> clamped{0};
  parallel_for(dataset.size(), [&](std::size_t i) {
    Rng stream(mix64(params.seed, i));
    const RandomSet set = pools.assemble(static_cast<std::uint32_t>(i), params, stream);
    if (set.clamped) clamped.fetch_add(1, std::memory_order_relaxed);

    std::vector<std::span<const double>> members;
    members.reserve(set.member_indices.size());
    for (const auto m : set.member_indices) {
      members.emplace_back(dataset.records[m].features);
    }

    data::Record& out = result.dataset.records[i];
    out.id = dataset.records[i].id;
    out.labels = dataset.records[i].labels;
    out.features =
        weighted_mean_transform(dataset.records[i].features, members, params.weight, mask);
  });

  result.clamped_records = clamped.load();
  return result;
}

}  // namespace anon::transform
