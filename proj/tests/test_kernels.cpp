#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fsgdm/kernels.hpp"

namespace k = fsgdm::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> d(-scale, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

class BackendGuard {
 public:
  BackendGuard() : saved_(k::active_backend()) {}
  ~BackendGuard() { k::set_backend(saved_); }

 private:
  k::Backend saved_;
};

}  // namespace

TEST(Kernels, ScalarMatchesPlainLoops) {
  const auto& s = k::scalar_table();
  auto m = random_vec(13, 1), g = random_vec(13, 2);
  auto expect = m;
  for (std::size_t i = 0; i < m.size(); ++i) expect[i] = 0.7 * expect[i] + 0.3 * g[i];
  s.momentum_update(m.data(), g.data(), m.size(), 0.7, 0.3);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_TRUE(same_bits(m[i], expect[i]));

  auto y = random_vec(9, 3), x = random_vec(9, 4);
  auto ey = y;
  for (std::size_t i = 0; i < y.size(); ++i) ey[i] = ey[i] + -0.25 * x[i];
  s.axpy(y.data(), x.data(), y.size(), -0.25);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_TRUE(same_bits(y[i], ey[i]));
}

TEST(Kernels, DotIsExactOnIntegers) {
  std::vector<double> a(37), b(37);
  double expect = 0;
  for (int i = 0; i < 37; ++i) {
    a[i] = i - 10;
    b[i] = 2 * i + 1;
    expect += a[i] * b[i];
  }
  EXPECT_EQ(k::scalar_table().dot(a.data(), b.data(), a.size()), expect);
  EXPECT_EQ(k::scalar_table().dot(a.data(), b.data(), 0), 0.0);
}

TEST(Kernels, ScaledInverseSqrt) {
  std::vector<double> w{0.0, 0.5, 1.0}, out(3);
  k::scalar_table().scaled_inverse_sqrt(w.data(), out.data(), 3, 4.0, 12.0, 2.0);
  EXPECT_DOUBLE_EQ(out[0], 1.0);
  EXPECT_DOUBLE_EQ(out[1], 2.0 / std::sqrt(10.0));
  EXPECT_DOUBLE_EQ(out[2], 0.5);
}

TEST(Kernels, Avx2BitwiseEqualsScalar) {
  const auto* simd = k::table_for(k::Backend::kAvx2);
  if (simd == nullptr) GTEST_SKIP() << "AVX2 backend unavailable on this machine";
  const auto& ref = k::scalar_table();
  for (std::size_t n = 0; n <= 67; ++n) {
    const auto g = random_vec(n, 100 + n, 5.0);
    const auto x = random_vec(n, 200 + n, 3.0);
    auto m1 = random_vec(n, 300 + n), m2 = m1;
    ref.momentum_update(m1.data(), g.data(), n, -0.93, 0.07);
    simd->momentum_update(m2.data(), g.data(), n, -0.93, 0.07);
    auto y1 = random_vec(n, 400 + n), y2 = y1;
    ref.axpy(y1.data(), x.data(), n, -1.7);
    simd->axpy(y2.data(), x.data(), n, -1.7);
    std::vector<double> w(n), o1(n), o2(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::abs(x[i]);
    ref.scaled_inverse_sqrt(w.data(), o1.data(), n, 0.01, 3.96, 2.0);
    simd->scaled_inverse_sqrt(w.data(), o2.data(), n, 0.01, 3.96, 2.0);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_TRUE(same_bits(m1[i], m2[i])) << "momentum n=" << n << " i=" << i;
      ASSERT_TRUE(same_bits(y1[i], y2[i])) << "axpy n=" << n << " i=" << i;
      ASSERT_TRUE(same_bits(o1[i], o2[i])) << "inverse sqrt n=" << n << " i=" << i;
    }
    ASSERT_TRUE(same_bits(ref.dot(g.data(), x.data(), n), simd->dot(g.data(), x.data(), n)))
        << "dot n=" << n;
  }
}

TEST(Kernels, DispatchSelection) {
  BackendGuard guard;
  k::set_backend(k::Backend::kScalar);
  EXPECT_EQ(k::active_backend(), k::Backend::kScalar);
  EXPECT_EQ(&k::active(), &k::scalar_table());
  if (k::backend_available(k::Backend::kAvx2)) {
    k::set_backend(k::Backend::kAvx2);
    EXPECT_EQ(k::active().name, k::backend_name(k::Backend::kAvx2));
  } else {
    EXPECT_THROW(k::set_backend(k::Backend::kAvx2), std::invalid_argument);
  }
}

TEST(Kernels, SpanWrappersAgreeAcrossBackends) {
  if (!k::backend_available(k::Backend::kAvx2)) GTEST_SKIP();
  BackendGuard guard;
  const auto x = random_vec(101, 7);
  k::set_backend(k::Backend::kScalar);
  const double a = k::norm2(x);
  k::set_backend(k::Backend::kAvx2);
  EXPECT_TRUE(same_bits(a, k::norm2(x)));
}
