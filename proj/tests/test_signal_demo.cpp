#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "fsgdm/frequency.hpp"
#include "fsgdm/signal_demo.hpp"

using namespace fsgdm;

namespace {

SequenceParams fixed(double u, double v, int sign = 1, VRule rule = VRule::kConstant) {
  SequenceParams p;
  p.fixed_value = u;
  p.v_value = v;
  p.sign = sign;
  p.v_rule = rule;
  return p;
}

}  // namespace

TEST(Signal, ZeroNoiseIsClean) {
  SignalSpec spec;
  spec.noise_std = 0.0;
  spec.seed = 17;
  const auto s = generate(spec);
  EXPECT_EQ(s.noisy, s.clean);
  EXPECT_DOUBLE_EQ(s.clean[0], std::sin(spec.omega));
}

TEST(Signal, DeterministicPerSeed) {
  SignalSpec spec;
  spec.seed = 3;
  EXPECT_EQ(generate(spec).noisy, generate(spec).noisy);
  auto other = spec;
  other.seed = 4;
  EXPECT_NE(generate(spec).noisy, generate(other).noisy);
}

TEST(Signal, NoiseLevel) {
  SignalSpec spec;
  spec.length = 10000;
  spec.noise_std = 0.5;
  const auto s = generate(spec);
  double mean = 0, ss = 0;
  for (std::size_t i = 0; i < s.clean.size(); ++i) mean += s.noisy[i] - s.clean[i];
  mean /= 10000;
  for (std::size_t i = 0; i < s.clean.size(); ++i) {
    const double d = s.noisy[i] - s.clean[i] - mean;
    ss += d * d;
  }
  EXPECT_NEAR(std::sqrt(ss / 9999), 0.5, 0.025);
}

TEST(Signal, SpecValidation) {
  SignalSpec spec;
  spec.length = 99;
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec.length = 200;
  spec.omega = std::numbers::pi;
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec.omega = 0.1;
  spec.noise_std = -1;
  EXPECT_THROW(generate(spec), std::invalid_argument);
}

TEST(Filter, AllPassIsIdentity) {
  SignalSpec spec;
  const auto s = generate(spec);
  const CoefficientSchedule id(fixed(0.0, 1.0), StagePlan(2000, 300));
  EXPECT_EQ(filter_signal(s.noisy, id), s.noisy);
}

TEST(Filter, DcGain) {
  const std::vector<double> dc(500, 2.0);
  const CoefficientSchedule s(fixed(0.9, 1.0), StagePlan(500, 100));
  const auto out = filter_signal(dc, s);
  EXPECT_NEAR(out.back(), 20.0, 1e-12);
}

TEST(Filter, ScheduleMustCoverSignal) {
  const std::vector<double> x(300, 1.0);
  const CoefficientSchedule s(fixed(0.5, 1.0), StagePlan(200, 100));
  EXPECT_THROW(filter_signal(x, s), std::invalid_argument);
}

TEST(Metrics, TrivialCases) {
  SignalSpec spec;
  const auto s = generate(spec);
  auto m = demo_metrics(s.clean, s.noisy, s.clean, 0.25, spec.omega);
  EXPECT_EQ(m.rmse_filtered, 0.0);
  EXPECT_NEAR(m.amplitude_ratio, 1.0, 1e-12);
  EXPECT_EQ(m.tail_start, 1501);
  m = demo_metrics(s.clean, s.noisy, s.noisy, 0.25, spec.omega);
  EXPECT_EQ(m.rmse_filtered, m.rmse_noisy);
  EXPECT_THROW(demo_metrics(s.clean, s.noisy, s.noisy, 0.0, spec.omega), std::invalid_argument);
  EXPECT_THROW(demo_metrics(s.clean, std::span(s.noisy).first(10), s.noisy, 0.5, spec.omega),
               std::invalid_argument);
}

TEST(Metrics, GainFilterAmplitudeMatchesMagnitude) {
  SignalSpec spec;
  spec.noise_std = 0.0;
  const auto s = generate(spec);
  const auto f = filter_signal(s.noisy, demo_schedule(DemoPreset::kLowPassGain, StagePlan(2000, 300)));
  const auto m = demo_metrics(s.clean, s.noisy, f, 0.25, spec.omega);
  const double expect = magnitude(0.9, 1.0, spec.omega);
  EXPECT_NEAR(m.amplitude_ratio, expect, 0.02 * expect);
}

TEST(Metrics, HighPassSuppressesSlowSinusoid) {
  SignalSpec spec;
  spec.noise_std = 0.0;
  spec.omega = 0.05 * std::numbers::pi;
  const auto s = generate(spec);
  for (double u : {0.9, 0.95, 0.99}) {
    const CoefficientSchedule hp(fixed(u, 0.0, -1, VRule::kCoupled), StagePlan(2000, 300));
    const auto f = filter_signal(s.noisy, hp);
    EXPECT_LT(demo_metrics(s.clean, s.noisy, f, 0.25, spec.omega).amplitude_ratio, 0.2) << u;
  }
}

TEST(Metrics, DynamicLowPassReducesNoise) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SignalSpec spec;
    spec.seed = seed;
    const auto s = generate(spec);
    const auto f = filter_signal(s.noisy, demo_schedule(DemoPreset::kDynamicLowPass, StagePlan(2000, 300)));
    const auto m = demo_metrics(s.clean, s.noisy, f, 0.25, spec.omega);
    if (m.rmse_filtered < m.rmse_noisy) ++wins;
  }
  EXPECT_GE(wins, 19);
}

TEST(Presets, NamesAndShapes) {
  const StagePlan plan(2000, 300);
  for (auto p : {DemoPreset::kDynamicLowPass, DemoPreset::kDynamicHighPass, DemoPreset::kLowPassGain,
                 DemoPreset::kHighPassGain}) {
    EXPECT_EQ(parse_demo_preset(to_string(p)), p);
  }
  EXPECT_THROW(parse_demo_preset("bandpass"), std::invalid_argument);
  const auto dyn = demo_schedule(DemoPreset::kDynamicHighPass, plan);
  EXPECT_EQ(dyn.stage(1).u, 0.0);
  EXPECT_LT(dyn.stage(300).effective_u(), -0.5);
  EXPECT_EQ(dyn.stage(300).v, 1.0 - dyn.stage(300).u);
  const auto hpg = demo_schedule(DemoPreset::kHighPassGain, plan);
  EXPECT_EQ(hpg.stage(7).effective_u(), -0.9);
  EXPECT_EQ(hpg.stage(7).v, 1.0);
}

TEST(Csv, Layout) {
  SignalSpec spec;
  spec.length = 100;
  const auto s = generate(spec);
  std::ostringstream os;
  write_demo_csv(os, s, s.noisy);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,clean,noisy,filtered");
  std::getline(is, line);
  EXPECT_EQ(line.substr(0, 2), "1,");
}
