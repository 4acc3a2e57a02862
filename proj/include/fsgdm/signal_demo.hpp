#pragma once

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "fsgdm/schedule.hpp"

namespace fsgdm {

struct SignalSpec {
  std::int64_t length = 2000;
  double amplitude = 1.0;
  double omega = 0.04 * std::numbers::pi;
  double noise_std = 0.3;
  std::uint64_t seed = 0;
};

void validate(const SignalSpec& spec);

struct Signal {
  std::vector<double> clean;  // clean[i] = amplitude * sin(omega * (i + 1))
  std::vector<double> noisy;
};

Signal generate(const SignalSpec& spec);

// m_t = u_t m_{t-1} + v_t y_t with the schedule's stage coefficients, t = 1..n.
// The schedule must cover at least noisy.size() steps.
std::vector<double> filter_signal(std::span<const double> noisy, const CoefficientSchedule& schedule);

struct DemoMetrics {
  double rmse_noisy = 0.0;
  double rmse_filtered = 0.0;
  // Fitted tail amplitude of filtered over clean at the signal frequency.
  double amplitude_ratio = 0.0;
  std::int64_t tail_start = 0;  // first 1-based index in the tail
};

DemoMetrics demo_metrics(std::span<const double> clean, std::span<const double> noisy,
                         std::span<const double> filtered, double tail_fraction, double omega);

// The four regimes: dynamic low-pass and high-pass (coupled, u rising from 0),
// and fixed low-pass and high-pass gain filters at |u| = 0.9, v = 1.
enum class DemoPreset { kDynamicLowPass, kDynamicHighPass, kLowPassGain, kHighPassGain };

inline constexpr double kDemoRiseFraction = 0.5;  // mu = fraction * total_steps

std::string_view to_string(DemoPreset preset);
DemoPreset parse_demo_preset(std::string_view text);
CoefficientSchedule demo_schedule(DemoPreset preset, StagePlan plan);

void write_demo_csv(std::ostream& out, const Signal& signal, std::span<const double> filtered);

}  // namespace fsgdm
