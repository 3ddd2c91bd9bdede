#pragma once

#include <cstdint>
#include <utility>

#include "anon/dataset.hpp"

namespace anon::data {

// Gaussian-cluster benchmark generator. Three disjoint dim blocks carry
// the interest / identity / sensitive structure, everything else is
// pure noise. Stands in for the embedding datasets the transform is
// normally run on, at desk scale.
struct SynthConfig {
  std::size_t n_records = 0;
  std::size_t n_features = 0;
  std::size_t n_identities = 0;
  std::size_t n_interest_classes = 0;
  std::size_t n_sensitive_classes = 0;
  std::pair<std::size_t, std::size_t> interest_dims;   // half-open [lo, hi)
  std::pair<std::size_t, std::size_t> identity_dims;   // half-open
  std::pair<std::size_t, std::size_t> sensitive_dims;  // half-open
  double class_separation = 1.0;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;

  void validate() const;  // throws Error(Config, "InvalidConfig")
};

// Deterministic in cfg (bit-identical for equal configs). Schema:
// features f0..f{n-1}, attribute_of_interest "interest",
// sensitive_attributes {"identity", "sensitive"}, id column "id".
Dataset generate_synthetic(const SynthConfig& cfg);

}  // namespace anon::data
