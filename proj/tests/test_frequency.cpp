#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include "fsgdm/frequency.hpp"
#include "fsgdm/kernels.hpp"

using namespace fsgdm;

namespace {

constexpr double kPi = std::numbers::pi;

// Extended-precision complex evaluation of v / (1 - u e^{-jw}).
std::complex<long double> oracle(double u, double v, double w) {
  const std::complex<long double> z = std::polar(1.0L, -static_cast<long double>(w));
  return static_cast<long double>(v) / (1.0L - static_cast<long double>(u) * z);
}

double phase_diff(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2 * kPi);
  return std::min(d, 2 * kPi - d);
}

}  // namespace

TEST(Transfer, Examples) {
  auto h = transfer_at(0.0, 1.0, kPi / 3);
  EXPECT_DOUBLE_EQ(h.real(), 1.0);
  EXPECT_NEAR(h.imag(), 0.0, 1e-16);
  h = transfer_at(0.9, 1.0, 0.0);
  EXPECT_NEAR(h.real(), 10.0, 1e-13);
  h = transfer_at(0.5, 1.0, kPi / 2);
  EXPECT_NEAR(h.real(), 0.8, 1e-15);
  EXPECT_NEAR(h.imag(), -0.4, 1e-15);
}

TEST(Magnitude, Examples) {
  EXPECT_NEAR(magnitude(0.9, 0.1, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(magnitude(0.9, 1.0, kPi), 1.0 / 1.9, 1e-15);
  EXPECT_NEAR(magnitude(0.5, 1.0, kPi / 2), 0.8944271909999159, 1e-15);
  EXPECT_NEAR(magnitude(0.9, 1.0, 0.0), 10.0, 1e-12);
  EXPECT_THROW(magnitude(1.0, 1.0, 0.1), std::invalid_argument);
}

TEST(Phase, Examples) {
  EXPECT_EQ(phase(0.0, 1.0, 1.234), 0.0);
  EXPECT_DOUBLE_EQ(phase(0.0, -1.0, 1.234), kPi);
  EXPECT_NEAR(phase(0.9, 1.0, kPi / 2), -0.7328151017865066, 1e-15);
  EXPECT_THROW(phase(0.5, 0.0, 1.0), std::invalid_argument);
  EXPECT_DOUBLE_EQ(wrap_phase(-kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_phase(3 * kPi), kPi);
  EXPECT_NEAR(wrap_phase(2 * kPi + 0.5), 0.5, 1e-15);
}

TEST(Magnitude, AgreesWithExtendedPrecisionOracle) {
  const auto grid = FrequencyGrid::uniform(1000);
  double worst_mag = 0, worst_phase = 0;
  for (int iu = -99; iu <= 99; ++iu) {
    const double u = iu / 100.0;
    for (double v : {0.1, 0.5, 1.0, 2.0, 3.0, -1.5}) {
      for (double w : grid.omegas()) {
        const auto h = oracle(u, v, w);
        worst_mag = std::max(worst_mag, std::abs(magnitude(u, v, w) - static_cast<double>(std::abs(h))));
        worst_phase = std::max(worst_phase, phase_diff(phase(u, v, w), static_cast<double>(std::arg(h))));
      }
    }
  }
  EXPECT_LT(worst_mag, 1e-12);
  EXPECT_LT(worst_phase, 1e-12);
}

TEST(Magnitude, GridKernelMatchesPointwiseBitwise) {
  const auto grid = FrequencyGrid::uniform(333);
  std::vector<double> out(grid.size());
  const auto saved = kernels::active_backend();
  for (auto backend : {kernels::Backend::kScalar, kernels::Backend::kAvx2}) {
    if (!kernels::backend_available(backend)) continue;
    kernels::set_backend(backend);
    for (double u : {-0.97, -0.3, 0.0, 0.42, 0.999}) {
      magnitude_response(u, 1.7, grid, out);
      for (std::size_t i = 0; i < grid.size(); ++i) ASSERT_EQ(out[i], magnitude(u, 1.7, grid[i]));
    }
  }
  kernels::set_backend(saved);
}

TEST(Magnitude, MonotoneAndSymmetric) {
  const auto grid = FrequencyGrid::uniform(400);
  for (double u : {-0.95, -0.5, -0.01, 0.01, 0.5, 0.95}) {
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double a = magnitude(u, 1.0, grid[i - 1]), b = magnitude(u, 1.0, grid[i]);
      if (u > 0) ASSERT_LT(b, a);
      else ASSERT_GT(b, a);
    }
    for (double w : grid.omegas()) {
      ASSERT_NEAR(magnitude(-u, 2.0, w), magnitude(u, 2.0, kPi - w), 1e-12);
    }
  }
  for (double w : grid.omegas()) ASSERT_EQ(magnitude(0.0, 1.3, w), 1.3);
}

TEST(Magnitude, CoupledIsOrthodoxWithDcPeak) {
  const auto grid = FrequencyGrid::uniform(256);
  for (double u = 0.0; u < 1.0; u += 0.05) {
    double peak = 0;
    for (double w : grid.omegas()) peak = std::max(peak, magnitude(u, 1.0 - u, w));
    EXPECT_NEAR(peak, 1.0, 1e-12);
    EXPECT_NEAR(magnitude(u, 1.0 - u, 0.0), 1.0, 1e-12);
    EXPECT_NEAR(magnitude(u, 1.0, 0.0), 1.0 / (1.0 - u), 1e-12 / (1.0 - u));
  }
}

TEST(Grid, UniformAndValidation) {
  const auto g = FrequencyGrid::uniform();
  EXPECT_EQ(g.size(), 512u);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[511], kPi);
  EXPECT_THROW(FrequencyGrid({0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(FrequencyGrid({-0.1}), std::invalid_argument);
  EXPECT_THROW(FrequencyGrid({4.0}), std::invalid_argument);
}

TEST(Classify, Taxonomy) {
  auto c = classify(0.9, 0.1);
  EXPECT_EQ(c.pass_band, PassBand::kLowPass);
  EXPECT_EQ(c.regime, Regime::kOrthodox);
  c = classify(0.9, 1.0);
  EXPECT_EQ(c.pass_band, PassBand::kLowPass);
  EXPECT_EQ(c.regime, Regime::kUnorthodox);
  EXPECT_NEAR(c.peak_gain, 10.0, 1e-12);
  c = classify(-0.9, 0.1);
  EXPECT_EQ(c.pass_band, PassBand::kHighPass);
  EXPECT_EQ(c.regime, Regime::kOrthodox);
  c = classify(0.0, 1.0);
  EXPECT_EQ(c.pass_band, PassBand::kAllPass);
  EXPECT_EQ(c.regime, Regime::kOrthodox);
  EXPECT_EQ(classify(-0.9, 1.0).regime, Regime::kUnorthodox);
  EXPECT_THROW(classify(0.5, -1.0), std::invalid_argument);
}

TEST(StageResponses, FsgdmEndpoints) {
  const auto s = make_fsgdm_schedule(0.033, 1.0, StagePlan(3000, 300));
  const auto grid = FrequencyGrid::uniform(64);
  const auto first = stage_response(s, 1, grid);
  for (double m : first.magnitude) EXPECT_EQ(m, 1.0);
  const auto last = stage_response(s, 300, grid);
  EXPECT_NEAR(last.magnitude[0], 31.20202020202023, 1e-11);
  const std::vector<std::int64_t> ks{1, 150, 300};
  const auto dyn = dynamic_response(s, grid, ks);
  ASSERT_EQ(dyn.size(), 3u);
  EXPECT_EQ(dyn[1].stage, 150);
  EXPECT_THROW(stage_response(s, 301, grid), std::out_of_range);
}

TEST(StageResponses, TimeInvariantScheduleRepeats) {
  SequenceParams p;
  p.fixed_value = 0.9;
  const CoefficientSchedule s(p, StagePlan(3000, 300));
  const auto grid = FrequencyGrid::uniform(32);
  const auto a = stage_response(s, 1, grid), b = stage_response(s, 300, grid);
  EXPECT_EQ(a.magnitude, b.magnitude);
  EXPECT_EQ(a.phase, b.phase);
}

TEST(StageResponses, Lp2hpShapes) {
  const auto s = CoefficientSchedule::preset(TransitionPreset::kLp2hp, StagePlan(3000, 300));
  EXPECT_EQ(classify(s.stage(1).effective_u(), s.stage(1).v).pass_band, PassBand::kLowPass);
  EXPECT_EQ(classify(s.stage(300).effective_u(), s.stage(300).v).pass_band, PassBand::kHighPass);
}

TEST(StageResponses, CsvLayout) {
  const auto s = make_fsgdm_schedule(0.033, 1.0, StagePlan(3000, 300));
  const auto grid = FrequencyGrid::uniform(3);
  const std::vector<std::int64_t> ks{1, 300};
  std::ostringstream os;
  write_response_csv(os, dynamic_response(s, grid, ks), grid);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "stage,k,u,v,omega,magnitude,phase");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 6);
}

TEST(Sinusoid, FitRecoversAmplitudeAndPhase) {
  std::vector<double> y;
  const double w = 0.3, a = 2.5, ph = -1.1;
  for (int t = 50; t < 450; ++t) y.push_back(a * std::sin(w * t + ph));
  const auto fit = fit_sinusoid(y, w, 50);
  EXPECT_NEAR(fit.amplitude, a, 1e-12);
  EXPECT_NEAR(fit.phase, ph, 1e-12);
}

TEST(Sinusoid, EmpiricalResponseMatchesClosedForm) {
  const auto r0 = empirical_response(0.0, 1.0, kPi / 4, 400, 10);
  EXPECT_NEAR(r0.amp_ratio, 1.0, 1e-12);
  EXPECT_NEAR(r0.phase_shift, 0.0, 1e-12);
  const auto r1 = empirical_response(0.9, 1.0, kPi / 2, 2000, 200);
  EXPECT_NEAR(r1.amp_ratio, 0.7432941462471663, 0.01 * 0.7432941462471663);
  EXPECT_NEAR(r1.phase_shift, -0.7328151017865066, 0.02);
  const double expect = magnitude(-0.9, 1.0, 0.95 * kPi);
  EXPECT_NEAR(empirical_response(-0.9, 1.0, 0.95 * kPi, 2000, 200).amp_ratio, expect, 0.01 * expect);
  EXPECT_THROW(empirical_response(0.5, 1.0, 0.0, 100, 10), std::invalid_argument);
  EXPECT_THROW(empirical_response(0.5, 1.0, 0.01, 100, 10), std::invalid_argument);
}

TEST(StageInvariance, StageListsAreSigmaInvariant) {
  const std::vector<StagePlan> plans{StagePlan(3000, 300), StagePlan(30000, 300)};
  const auto rep = check_stage_invariance(0.033, plans);
  EXPECT_TRUE(rep.pass) << rep.message;
  EXPECT_LE(rep.max_closed_form_error, 1e-15);
  const std::vector<std::int64_t> sigmas{3000, 30000, 300000};
  EXPECT_TRUE(fsgdm_stages_invariant(0.033, 300, sigmas));
  const auto s = make_fsgdm_schedule(0.033, 1.0, StagePlan(30000, 300));
  EXPECT_NEAR(s.stage(2).u, 0.09174311926605504, 1e-16);
}

TEST(StageInvariance, NegativeControlReportsFirstMismatch) {
  const std::vector<StagePlan> plans{StagePlan(3000, 300), StagePlan(3000, 150)};
  const auto rep = check_stage_invariance(0.033, plans);
  EXPECT_FALSE(rep.pass);
  ASSERT_TRUE(rep.first_mismatch_stage.has_value());
  EXPECT_EQ(*rep.first_mismatch_stage, 2);
  EXPECT_EQ(rep.first_mismatch_run, 1u);
  const std::vector<StagePlan> bad{StagePlan(1000, 300)};
  EXPECT_THROW(check_stage_invariance(0.033, bad), std::invalid_argument);
}

TEST(Oracle, ClosedFormAgreementReport) {
  std::vector<double> us;
  for (int k = -99; k <= 99; ++k) us.push_back(k / 100.0);
  const std::vector<double> vs{0.1, 0.5, 1, 2, 3};
  const auto rep = closed_form_agreement(us, vs, FrequencyGrid::uniform(1000));
  EXPECT_EQ(rep.evaluations, us.size() * vs.size() * 1000);
  EXPECT_LT(rep.max_magnitude_error, 1e-12);
  EXPECT_LT(rep.max_phase_error, 1e-12);
}
