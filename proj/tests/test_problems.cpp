#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "fsgdm/problems.hpp"

using namespace fsgdm;

namespace {

std::vector<std::size_t> first_n(std::size_t n) {
  std::vector<std::size_t> b(n);
  std::iota(b.begin(), b.end(), 0);
  return b;
}

// Central differences, eps = 1e-5; returns max relative error against the
// analytic gradient, scaled by max(1, |g|).
double fd_error(const Problem& p, const std::vector<double>& x, std::span<const std::size_t> batch) {
  std::vector<double> g(p.dimension());
  p.gradient(x, batch, g);
  std::vector<double> scratch(p.dimension());
  double worst = 0.0;
  const double eps = 1e-5;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto xp = x, xm = x;
    xp[i] += eps;
    xm[i] -= eps;
    const double fd = (p.gradient(xp, batch, scratch) - p.gradient(xm, batch, scratch)) / (2 * eps);
    worst = std::max(worst, std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])));
  }
  return worst;
}

}  // namespace

TEST(Quadratic, IdentityExample) {
  const auto p = make_quadratic({1, 0, 0, 1}, {0, 0});
  std::vector<double> g(2);
  const std::vector<double> x{3, -4};
  const std::vector<std::size_t> batch{0};
  EXPECT_DOUBLE_EQ(p->gradient(x, batch, g), 12.5);
  EXPECT_EQ(g, (std::vector<double>{3, -4}));
  EXPECT_DOUBLE_EQ(p->loss(x), 12.5);
  EXPECT_TRUE(std::isnan(p->accuracy(x, Split::kTest)));
}

TEST(Quadratic, RejectsNonSpd) {
  EXPECT_THROW(make_quadratic({1, 2, 2, 1}, {0, 0}), std::invalid_argument);
  EXPECT_THROW(make_quadratic({1, 0.5, 0, 1}, {0, 0}), std::invalid_argument);
  EXPECT_THROW(make_quadratic({1, 0, 0}, {0, 0}), std::invalid_argument);
}

TEST(Quadratic, RandomInstanceHasRequestedConditioning) {
  const auto p = make_problem(ProblemSpec::quadratic_default());
  EXPECT_EQ(p->dimension(), 20u);
  EXPECT_EQ(p->batches_per_epoch(), 1u);
  // f(e) + f(-e) - 2 f(0) = e^T A e, which must lie in the spectrum range.
  const std::vector<double> zero(20, 0.0);
  for (std::size_t i = 0; i < 20; ++i) {
    std::vector<double> e(20, 0.0), minus(20, 0.0);
    e[i] = 1.0;
    minus[i] = -1.0;
    const double q = p->loss(e) + p->loss(minus) - 2.0 * p->loss(zero);
    EXPECT_GE(q, 0.01 - 1e-9);
    EXPECT_LE(q, 1.0 + 1e-9);
  }
  Rng rng(0);
  EXPECT_GT(p->loss(p->initial_point(rng)), 0.0);
}

TEST(Logistic, ZeroPointGradient) {
  const std::vector<double> f{1, 2, -1, 0.5, 3, -2, 0, 1};
  const std::vector<int> y{1, 0, 1, 0};
  const auto p = make_logistic(f, y, 4, 2);
  EXPECT_EQ(p->dimension(), 3u);
  std::vector<double> g(3);
  const auto batch = first_n(4);
  const double loss = p->gradient(std::vector<double>(3, 0.0), batch, g);
  EXPECT_NEAR(loss, std::log(2.0), 1e-15);
  std::vector<double> expect(3, 0.0);
  for (int i = 0; i < 4; ++i) {
    expect[0] += (0.5 - y[i]) * f[2 * i] / 4;
    expect[1] += (0.5 - y[i]) * f[2 * i + 1] / 4;
    expect[2] += (0.5 - y[i]) / 4;
  }
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(g[i], expect[i], 1e-15);
  EXPECT_THROW(make_logistic(f, {1, 0, 2, 0}, 4, 2), std::invalid_argument);
}

TEST(Logistic, StableAtLargeMargins) {
  const auto p = make_logistic({1.0}, {1}, 1, 1);
  std::vector<double> g(2);
  const std::vector<std::size_t> batch{0};
  const double loss = p->gradient(std::vector<double>{800.0, 0.0}, batch, g);
  EXPECT_TRUE(std::isfinite(loss));
  EXPECT_GE(loss, 0.0);
  EXPECT_TRUE(std::isfinite(p->gradient(std::vector<double>{-800.0, 0.0}, batch, g)));
  EXPECT_NEAR(g[0], -1.0, 1e-15);
}

TEST(Problems, DefaultShapes) {
  const auto lg = make_problem(ProblemSpec::logistic_default());
  EXPECT_EQ(lg->num_train(), 400u);
  EXPECT_EQ(lg->batches_per_epoch(), 8u);
  const auto mlp = make_problem(ProblemSpec::mlp_default());
  EXPECT_EQ(mlp->num_train(), 720u);
  EXPECT_EQ(mlp->batches_per_epoch(), 20u);
  EXPECT_EQ(mlp->activation(), "tanh");
  EXPECT_EQ(mlp->dimension(), 32u * 4 + 32 + 3 * 32 + 3);
}

TEST(Problems, DataDeterministicPerSeed) {
  auto spec = ProblemSpec::mlp_default();
  const auto a = make_problem(spec), b = make_problem(spec);
  spec.data_seed = 9;
  const auto c = make_problem(spec);
  Rng r1(1), r2(1), r3(1);
  const auto x = a->initial_point(r1);
  EXPECT_EQ(b->initial_point(r2), x);
  EXPECT_EQ(a->loss(x), b->loss(x));
  EXPECT_NE(a->loss(x), c->loss(c->initial_point(r3)));
}

TEST(Problems, BatchIndexChecked) {
  const auto p = make_problem(ProblemSpec::logistic_default());
  std::vector<double> g(p->dimension());
  const std::vector<std::size_t> bad{400};
  EXPECT_THROW(p->gradient(std::vector<double>(p->dimension(), 0.0), bad, g), std::out_of_range);
}

TEST(Problems, GradientsMatchFiniteDifferences) {
  for (auto spec : {ProblemSpec::quadratic_default(), ProblemSpec::logistic_default(),
                    ProblemSpec::mlp_default()}) {
    const auto p = make_problem(spec);
    Rng rng(42);
    const auto batch = first_n(std::min<std::size_t>(5, p->num_train()));
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x = p->initial_point(rng);
      for (auto& xi : x) xi += 0.5 * rng.normal();
      ASSERT_LT(fd_error(*p, x, batch), 1e-4) << to_string(spec.kind) << " trial " << trial;
    }
  }
}

TEST(Problems, AccuracyInUnitInterval) {
  const auto p = make_problem(ProblemSpec::mlp_default());
  Rng rng(0);
  const auto x = p->initial_point(rng);
  for (auto s : {Split::kTrain, Split::kTest}) {
    const double a = p->accuracy(x, s);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
  }
}
