#include "anon/synthetic.hpp"

#include <algorithm>
#include <string>

#include "anon/error.hpp"
#include "anon/rng.hpp"

namespace anon::data {

namespace {

void check_range(const std::pair<std::size_t, std::size_t>& range, std::size_t n_features,
                 const char* name) {
  if (range.first > range.second || range.second > n_features) {
    throw_config("InvalidConfig", std::string(name) + " must be a range within [0, n_features)");
  }
}

bool overlaps(const std::pair<std::size_t, std::size_t>& a,
              const std::pair<std::size_t, std::size_t>& b) {
  return a.first < b.second && b.first < a.second;
}

// Balanced class assignment: exact round-robin counts, then a seeded
// shuffle so the three attributes are not phase-locked to each other.
std::vector<std::uint32_t> balanced_assignment(std::size_t n, std::size_t n_classes, Rng rng) {
  std::vector<std::uint32_t> classes(n);
  for (std::size_t i = 0; i < n; ++i) classes[i] = static_cast<std::uint32_t>(i % n_classes);
  rng.shuffle(classes);
  return classes;
}

// Class mean within a dim block. Two classes sit at -sep/2 / +sep/2 on
// every block dim; k>2 classes use a one-vs-rest tile: dim j carries
// sep for the class (j - lo) mod k and 0 for the rest.
double block_mean(std::size_t dim, const std::pair<std::size_t, std::size_t>& block,
                  std::uint32_t cls, std::size_t n_classes, double separation) {
  if (dim < block.first || dim >= block.second || n_classes < 2) return 0.0;
  if (n_classes == 2) return cls == 0 ? -separation / 2.0 : separation / 2.0;
  const std::size_t governed = (dim - block.first) % n_classes;
  return governed == cls ? separation : 0.0;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_records == 0 || n_features == 0 || n_interest_classes == 0 || n_sensitive_classes == 0) {
    throw_config("InvalidConfig", "n_records, n_features and class counts must be positive");
  }
  if (n_identities < 2 || n_records < n_identities) {
    throw_config("InvalidConfig", "need n_records >= n_identities >= 2");
  }
  check_range(interest_dims, n_features, "interest_dims");
  check_range(identity_dims, n_features, "identity_dims");
  check_range(sensitive_dims, n_features, "sensitive_dims");
  if (overlaps(interest_dims, identity_dims) || overlaps(interest_dims, sensitive_dims) ||
      overlaps(identity_dims, sensitive_dims)) {
    throw_config("InvalidConfig", "interest_dims, identity_dims, sensitive_dims must be disjoint");
  }
  if (!(class_separation > 0.0)) throw_config("InvalidConfig", "class_separation must be positive");
  if (!(noise_sigma > 0.0)) throw_config("InvalidConfig", "noise_sigma must be positive");
}

Dataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();

  Dataset dataset;
  Schema& schema = dataset.schema;
  schema.feature_names.reserve(cfg.n_features);
  for (std::size_t j = 0; j < cfg.n_features; ++j) {
    schema.feature_names.push_back("f" + std::to_string(j));
  }
  schema.attribute_of_interest = "interest";
  schema.sensitive_attributes = {"identity", "sensitive"};
  schema.id_column = "id";

  const auto interest = balanced_assignment(cfg.n_records, cfg.n_interest_classes,
                                            Rng(mix64(cfg.seed, 0x1a01)));
  const auto identity =
      balanced_assignment(cfg.n_records, cfg.n_identities, Rng(mix64(cfg.seed, 0x1a02)));
  const auto sensitive = balanced_assignment(cfg.n_records, cfg.n_sensitive_classes,
                                             Rng(mix64(cfg.seed, 0x1a03)));

  dataset.records.resize(cfg.n_records);
  for (std::size_t i = 0; i < cfg.n_records; ++i) {
    Record& rec = dataset.records[i];
    rec.id = "r" + std::to_string(i);
    rec.labels["interest"] = "p" + std::to_string(interest[i]);
    rec.labels["identity"] = "id" + std::to_string(identity[i]);
    rec.labels["sensitive"] = "s" + std::to_string(sensitive[i]);

    Rng stream(mix64(cfg.seed, 0xfea7, i));
    rec.features.resize(cfg.n_features);
    for (std::size_t j = 0; j < cfg.n_features; ++j) {
      const double mean =
          block_mean(j, cfg.interest_dims, interest[i], cfg.n_interest_classes,
                     cfg.class_separation) +
          block_mean(j, cfg.identity_dims, identity[i], cfg.n_identities, cfg.class_separation) +
          block_mean(j, cfg.sensitive_dims, sensitive[i], cfg.n_sensitive_classes,
                     cfg.class_separation);
      rec.features[j] = stream.normal(mean, cfg.noise_sigma);
    }
  }
  return dataset;
}

}  // namespace anon::data
