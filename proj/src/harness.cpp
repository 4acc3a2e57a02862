#include "fsgdm/harness.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "fsgdm/kernels.hpp"

namespace fsgdm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs task(i) for i in [0, count) on up to `jobs` threads.
template <typename Task>
void parallel_for(std::size_t count, std::size_t jobs, Task&& task) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            task(i);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

OptimizerConfig with_epochs(OptimizerConfig config, const Problem& problem, std::int64_t epochs) {
  config.total_steps = epochs * static_cast<std::int64_t>(problem.batches_per_epoch());
  if (config.schedule && !(config.schedule->plan() == StagePlan(config.total_steps, config.num_stages))) {
    throw std::invalid_argument("generalized schedule plan does not match the training length");
  }
  return config;
}

RunRecord run_training(const Problem& problem, const OptimizerConfig& config, std::uint64_t seed) {
  const auto per_epoch = static_cast<std::int64_t>(problem.batches_per_epoch());
  if (config.total_steps % per_epoch != 0) {
    throw std::invalid_argument("total_steps " + std::to_string(config.total_steps) +
                                " is not a whole number of epochs (" + std::to_string(per_epoch) +
                                " batches each)");
  }
  const Optimizer optimizer(config);
  Rng rng(seed);
  ParameterGroup group(problem.initial_point(rng));

  RunRecord record;
  record.seed = seed;
  record.metric_name = problem.is_classifier() ? "test_accuracy" : "final_loss";
  const auto steps = static_cast<std::size_t>(config.total_steps);
  for (auto* series : {&record.loss, &record.lr, &record.u, &record.v, &record.grad_norm,
                       &record.momentum_norm}) {
    series->reserve(steps);
  }
  record.step.reserve(steps);

  std::vector<std::size_t> order(problem.num_train());
  std::vector<double> g(problem.dimension());
  const std::int64_t epochs = config.total_steps / per_epoch;
  for (std::int64_t epoch = 1; epoch <= epochs && !record.diverged; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += problem.batch_size()) {
      const std::size_t len = std::min(problem.batch_size(), order.size() - start);
      const std::span<const std::size_t> batch(order.data() + start, len);
      const double loss = problem.gradient(group.params, batch, g);
      const double gnorm = kernels::norm2(g);
      if (!std::isfinite(loss) || std::abs(loss) > kDivergenceThreshold || !std::isfinite(gnorm)) {
        record.diverged = true;
        record.diverged_at = group.step + 1;
        break;
      }
      const StepInfo info = optimizer.step(group, g);
      record.step.push_back(info.step);
      record.loss.push_back(loss);
      record.lr.push_back(info.lr);
      record.u.push_back(info.coefficients.effective_u());
      record.v.push_back(info.coefficients.v);
      record.grad_norm.push_back(gnorm);
      record.momentum_norm.push_back(kernels::norm2(group.momentum.buffer));
    }
    if (!record.diverged && problem.is_classifier()) {
      record.epochs.push_back({epoch, problem.accuracy(group.params, Split::kTrain),
                               problem.accuracy(group.params, Split::kTest)});
    }
  }
  record.final_params = group.params;
  if (record.diverged) {
    record.final_loss = kNaN;
    record.final_metric = kNaN;
  } else {
    record.final_loss = problem.loss(group.params, Split::kTrain);
    record.final_metric = problem.is_classifier() ? record.epochs.back().test_acc : record.final_loss;
  }
  return record;
}

Aggregate aggregate(std::string label, std::span<const RunRecord> runs) {
  Aggregate agg;
  agg.label = std::move(label);
  double train_sum = 0.0;
  for (const auto& run : runs) {
    if (run.diverged) {
      ++agg.diverged_count;
      continue;
    }
    agg.values.push_back(run.final_metric);
    train_sum += run.epochs.empty() ? kNaN : run.epochs.back().train_acc;
  }
  agg.num_seeds = agg.values.size();
  if (agg.num_seeds == 0) {
    agg.mean = agg.stderr_ = agg.mean_train_acc = kNaN;
    return agg;
  }
  const double n = static_cast<double>(agg.num_seeds);
  agg.mean = std::accumulate(agg.values.begin(), agg.values.end(), 0.0) / n;
  agg.mean_train_acc = train_sum / n;
  if (agg.num_seeds < 2) {
    agg.stderr_ = kNaN;
    return agg;
  }
  double ss = 0.0;
  for (double x : agg.values) ss += (x - agg.mean) * (x - agg.mean);
  agg.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return agg;
}

std::vector<Aggregate> compare_variants(const Problem& problem,
                                        std::span<const LabeledConfig> configs,
                                        std::span<const std::uint64_t> seeds, std::size_t jobs) {
  if (seeds.size() < 2) throw std::invalid_argument("compare_variants needs at least two seeds");
  std::vector<RunRecord> runs(configs.size() * seeds.size());
  parallel_for(runs.size(), jobs, [&](std::size_t i) {
    runs[i] = run_training(problem, configs[i / seeds.size()].config, seeds[i % seeds.size()]);
  });
  std::vector<Aggregate> out;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    out.push_back(aggregate(configs[c].label,
                            std::span(runs).subspan(c * seeds.size(), seeds.size())));
  }
  return out;
}

double optimal_zone_curve(double v, double zone_constant) {
  if (!(v > 0.0)) throw std::invalid_argument("optimal zone curve needs v > 0");
  if (!(v < zone_constant)) {
    throw std::invalid_argument("optimal zone curve is undefined for v >= zone constant");
  }
  return 1.0 / (zone_constant / v - 1.0);
}

SweepResult sweep(const Problem& problem, std::span<const double> c_values,
                  std::span<const double> v_values, std::span<const std::uint64_t> seeds,
                  const OptimizerConfig& base, std::size_t jobs) {
  if (c_values.empty() || v_values.empty()) throw std::invalid_argument("sweep grid is empty");
  if (seeds.size() < 2) throw std::invalid_argument("sweep needs at least two seeds");
  for (double c : c_values) {
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("sweep c values must lie in (0, 1)");
  }
  for (double v : v_values) {
    if (!(v > 0.0)) throw std::invalid_argument("sweep v values must be positive");
  }
  SweepResult result;
  result.c_values.assign(c_values.begin(), c_values.end());
  result.v_values.assign(v_values.begin(), v_values.end());
  result.seeds.assign(seeds.begin(), seeds.end());

  const std::size_t cells = c_values.size() * v_values.size();
  std::vector<RunRecord> runs(cells * seeds.size());
  parallel_for(runs.size(), jobs, [&](std::size_t i) {
    const std::size_t cell = i / seeds.size();
    OptimizerConfig config = base;
    config.variant = Variant::kFsgdm;
    config.schedule.reset();
    config.c = c_values[cell / v_values.size()];
    config.v = v_values[cell % v_values.size()];
    runs[i] = run_training(problem, config, seeds[i % seeds.size()]);
  });
  for (std::size_t cell = 0; cell < cells; ++cell) {
    SweepCell out;
    out.c = c_values[cell / v_values.size()];
    out.v = v_values[cell % v_values.size()];
    out.result = aggregate("c=" + format_double(out.c) + " v=" + format_double(out.v),
                           std::span(runs).subspan(cell * seeds.size(), seeds.size()));
    result.cells.push_back(std::move(out));
  }
  for (double v : v_values) {
    result.zone_c.push_back(v < kOptimalZoneConstant ? optimal_zone_curve(v) : kNaN);
  }
  return result;
}

void write_run_csv(std::ostream& out, const RunRecord& r) {
  out << "step,loss,lr,u,v,grad_norm,momentum_norm\n";
  for (std::size_t i = 0; i < r.step.size(); ++i) {
    out << r.step[i] << ',' << format_double(r.loss[i]) << ',' << format_double(r.lr[i]) << ','
        << format_double(r.u[i]) << ',' << format_double(r.v[i]) << ','
        << format_double(r.grad_norm[i]) << ',' << format_double(r.momentum_norm[i]) << '\n';
  }
}

void write_epoch_csv(std::ostream& out, const RunRecord& r) {
  out << "epoch,train_acc,test_acc\n";
  for (const auto& e : r.epochs) {
    out << e.epoch << ',' << format_double(e.train_acc) << ',' << format_double(e.test_acc) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "c,v,mean_metric,stderr,num_seeds,diverged_count\n";
  for (const auto& cell : result.cells) {
    out << format_double(cell.c) << ',' << format_double(cell.v) << ','
        << format_double(cell.result.mean) << ',' << format_double(cell.result.stderr_) << ','
        << cell.result.num_seeds << ',' << cell.result.diverged_count << '\n';
  }
}

void write_zone_csv(std::ostream& out, const SweepResult& result) {
  out << "v,c\n";
  for (std::size_t i = 0; i < result.v_values.size(); ++i) {
    out << format_double(result.v_values[i]) << ',' << format_double(result.zone_c[i]) << '\n';
  }
}

}  // namespace fsgdm
