#include "fsgdm/signal_demo.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "fsgdm/config.hpp"
#include "fsgdm/frequency.hpp"
#include "fsgdm/rng.hpp"

namespace fsgdm {

void validate(const SignalSpec& spec) {
  if (spec.length < 100) throw std::invalid_argument("signal length must be at least 100");
  if (!(spec.amplitude > 0.0)) throw std::invalid_argument("signal amplitude must be positive");
  if (!(spec.omega > 0.0 && spec.omega < std::numbers::pi)) {
    throw std::invalid_argument("signal frequency must lie strictly inside (0, pi)");
  }
  if (!(spec.noise_std >= 0.0)) throw std::invalid_argument("noise_std must be non-negative");
}

Signal generate(const SignalSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  Signal s;
  const auto n = static_cast<std::size_t>(spec.length);
  s.clean.resize(n);
  s.noisy.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.clean[i] = spec.amplitude * std::sin(spec.omega * static_cast<double>(i + 1));
    // Draw even when sigma is zero so the stream does not depend on it.
    const double z = rng.normal();
    s.noisy[i] = spec.noise_std == 0.0 ? s.clean[i] : s.clean[i] + spec.noise_std * z;
  }
  return s;
}

std::vector<double> filter_signal(std::span<const double> noisy, const CoefficientSchedule& schedule) {
  const auto n = static_cast<std::int64_t>(noisy.size());
  if (schedule.plan().total_steps() < n) {
    throw std::invalid_argument("schedule covers " + std::to_string(schedule.plan().total_steps()) +
                                " steps but the signal has " + std::to_string(n) + " samples");
  }
  std::vector<double> out(noisy.size());
  double m = 0.0;
  for (std::int64_t t = 1; t <= n; ++t) {
    const auto& k = schedule.at_step(t);
    m = k.effective_u() * m + k.v * noisy[static_cast<std::size_t>(t - 1)];
    out[static_cast<std::size_t>(t - 1)] = m;
  }
  return out;
}

namespace {

double tail_rmse(std::span<const double> a, std::span<const double> b) {
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(ss / static_cast<double>(a.size()));
}

}  // namespace

DemoMetrics demo_metrics(std::span<const double> clean, std::span<const double> noisy,
                         std::span<const double> filtered, double tail_fraction, double omega) {
  if (clean.size() != noisy.size() || clean.size() != filtered.size()) {
    throw std::invalid_argument("demo_metrics needs equal-length signals");
  }
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw std::invalid_argument("tail_fraction must lie in (0, 1]");
  }
  const std::size_t n = clean.size();
  const auto tail = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n))));
  const std::size_t start = n - std::min(tail, n);
  DemoMetrics m;
  m.tail_start = static_cast<std::int64_t>(start + 1);
  m.rmse_noisy = tail_rmse(noisy.subspan(start), clean.subspan(start));
  m.rmse_filtered = tail_rmse(filtered.subspan(start), clean.subspan(start));
  const auto fc = fit_sinusoid(clean.subspan(start), omega, m.tail_start);
  const auto ff = fit_sinusoid(filtered.subspan(start), omega, m.tail_start);
  m.amplitude_ratio = fc.amplitude > 0.0 ? ff.amplitude / fc.amplitude
                                         : std::numeric_limits<double>::quiet_NaN();
  return m;
}

std::string_view to_string(DemoPreset preset) {
  switch (preset) {
    case DemoPreset::kDynamicLowPass: return "dynamic_lowpass";
    case DemoPreset::kDynamicHighPass: return "dynamic_highpass";
    case DemoPreset::kLowPassGain: return "lowpass_gain";
    case DemoPreset::kHighPassGain: return "highpass_gain";
  }
  return "?";
}

DemoPreset parse_demo_preset(std::string_view text) {
  for (auto p : {DemoPreset::kDynamicLowPass, DemoPreset::kDynamicHighPass, DemoPreset::kLowPassGain,
                 DemoPreset::kHighPassGain}) {
    if (text == to_string(p)) return p;
  }
  throw std::invalid_argument("unknown demo preset '" + std::string(text) + "'");
}

CoefficientSchedule demo_schedule(DemoPreset preset, StagePlan plan) {
  SequenceParams p;
  switch (preset) {
    case DemoPreset::kDynamicLowPass:
    case DemoPreset::kDynamicHighPass:
      p.kind = SequenceKind::kIncreasing;
      p.mu = kDemoRiseFraction * static_cast<double>(plan.total_steps());
      p.v_rule = VRule::kCoupled;
      p.sign = preset == DemoPreset::kDynamicLowPass ? 1 : -1;
      break;
    case DemoPreset::kLowPassGain:
    case DemoPreset::kHighPassGain:
      p.kind = SequenceKind::kFixed;
      p.fixed_value = 0.9;
      p.v_rule = VRule::kConstant;
      p.v_value = 1.0;
      p.sign = preset == DemoPreset::kLowPassGain ? 1 : -1;
      break;
  }
  return CoefficientSchedule(p, plan);
}

void write_demo_csv(std::ostream& out, const Signal& signal, std::span<const double> filtered) {
  out << "t,clean,noisy,filtered\n";
  for (std::size_t i = 0; i < filtered.size(); ++i) {
    out << (i + 1) << ',' << format_double(signal.clean[i]) << ',' << format_double(signal.noisy[i])
        << ',' << format_double(filtered[i]) << '\n';
  }
}

}  // namespace fsgdm
