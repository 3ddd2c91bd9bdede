#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anon/dataset.hpp"
#include "anon/pipeline.hpp"

namespace anon::sweep {

// Axis names follow the ablation parameters: t (purity), g (set size),
// w (weight), r_p / r_q / r_s (retention ratios).
extern const std::vector<std::string> kAxisNames;

// The published scan grid for each axis, used when a config asks for
// the default values.
const std::vector<double>& default_axis(const std::string& name);

struct SweepGrid {
  std::map<std::string, std::vector<double>> axes;  // iterated in sorted name order
  std::size_t repetitions = 1;
  std::size_t max_cells = 10000;
  pipeline::ExperimentConfig base;
  std::string cache_dir;  // empty disables caching

  void validate() const;  // throws GridTooLarge / InvalidConfig
  std::size_t n_cells() const;
};

struct SweepRow {
  std::map<std::string, double> params;  // all six axis params, resolved
  std::size_t rep = 0;
  double accuracy_interest = 0.0;
  std::map<std::string, double> accuracy_additional;
  std::map<std::string, double> mixture;
  std::optional<double> mean_kl_nats;
};

// Rows in deterministic order: cells lexicographic over sorted axis
// names (each axis in its listed value order), repetitions innermost.
// Cells run concurrently up to the worker cap; finished cells are
// cached under cache_dir keyed by their config digest, so an
// interrupted sweep resumes without recomputing.
std::vector<SweepRow> run_sweep(const data::Dataset& dataset, const SweepGrid& grid);

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

// Resolved per-cell config: base with one axis value applied per axis.
pipeline::ExperimentConfig cell_config(const SweepGrid& grid, const data::Schema& schema,
                                       const std::map<std::string, double>& values);

}  // namespace anon::sweep
