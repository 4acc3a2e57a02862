#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fsgdm/optimizer.hpp"
#include "fsgdm/problems.hpp"

namespace fsgdm {

// Runs abort once |loss| exceeds this or becomes non-finite.
inline constexpr double kDivergenceThreshold = 1e12;

struct EpochMetrics {
  std::int64_t epoch = 0;
  double train_acc = 0.0;
  double test_acc = 0.0;
};

struct RunRecord {
  std::uint64_t seed = 0;
  // Per step, length total_steps unless the run diverged.
  std::vector<std::int64_t> step;
  std::vector<double> loss;  // minibatch loss at the pre-update parameters
  std::vector<double> lr;
  std::vector<double> u;  // effective signed coefficient
  std::vector<double> v;
  std::vector<double> grad_norm;      // raw minibatch gradient
  std::vector<double> momentum_norm;  // buffer after the update
  std::vector<EpochMetrics> epochs;   // classification problems only

  std::vector<double> final_params;
  double final_loss = 0.0;  // full training objective at final_params
  // Final-epoch test accuracy for classifiers, final_loss otherwise.
  double final_metric = 0.0;
  std::string metric_name;
  bool diverged = false;
  std::int64_t diverged_at = 0;
};

// total_steps = epochs * batches_per_epoch, carried into the config.
OptimizerConfig with_epochs(OptimizerConfig config, const Problem& problem, std::int64_t epochs);

// Deterministic in (problem, config, seed). The seed drives the initial point
// and the per-epoch minibatch shuffle. config.total_steps must be a whole
// number of epochs.
RunRecord run_training(const Problem& problem, const OptimizerConfig& config, std::uint64_t seed);

struct Aggregate {
  std::string label;
  double mean = 0.0;
  double stderr_ = 0.0;  // sample std / sqrt(n) over non-diverged seeds
  std::size_t num_seeds = 0;
  std::size_t diverged_count = 0;
  double mean_train_acc = 0.0;  // NaN for non-classifiers
  std::vector<double> values;
};

Aggregate aggregate(std::string label, std::span<const RunRecord> runs);

struct LabeledConfig {
  std::string label;
  OptimizerConfig config;
};

// Needs at least two seeds. `jobs` > 1 runs seeds in parallel; results do
// not depend on it.
std::vector<Aggregate> compare_variants(const Problem& problem,
                                        std::span<const LabeledConfig> configs,
                                        std::span<const std::uint64_t> seeds,
                                        std::size_t jobs = 1);

inline constexpr double kOptimalZoneConstant = 30.992;

// Solves zone_constant / v = 1 + 1/c for c. Throws std::invalid_argument
// unless 0 < v < zone_constant.
double optimal_zone_curve(double v, double zone_constant = kOptimalZoneConstant);

struct SweepCell {
  double c = 0.0;
  double v = 0.0;
  Aggregate result;
};

struct SweepResult {
  std::vector<double> c_values;
  std::vector<double> v_values;
  std::vector<std::uint64_t> seeds;
  std::vector<SweepCell> cells;  // c-major: cells[i * v_values.size() + j]
  std::vector<double> zone_c;    // optimal_zone_curve at each v, NaN if undefined

  const SweepCell& at(std::size_t ci, std::size_t vi) const {
    return cells[ci * v_values.size() + vi];
  }
};

// One FSGDM run per (c, v, seed) on top of `base`.
SweepResult sweep(const Problem& problem, std::span<const double> c_values,
                  std::span<const double> v_values, std::span<const std::uint64_t> seeds,
                  const OptimizerConfig& base, std::size_t jobs = 1);

void write_run_csv(std::ostream& out, const RunRecord& record);
void write_epoch_csv(std::ostream& out, const RunRecord& record);
void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_zone_csv(std::ostream& out, const SweepResult& result);

}  // namespace fsgdm
