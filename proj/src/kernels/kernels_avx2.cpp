#include <immintrin.h>

#include <cmath>

#include "kernels_internal.hpp"

namespace fsgdm::kernels::detail {
namespace {

void momentum_update_avx2(double* m, const double* g, std::size_t n, double decay,
                          double gain) {
  const __m256d vdecay = _mm256_set1_pd(decay);
  const __m256d vgain = _mm256_set1_pd(gain);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vm = _mm256_loadu_pd(m + i);
    __m256d vg = _mm256_loadu_pd(g + i);
    vm = _mm256_add_pd(_mm256_mul_pd(vdecay, vm), _mm256_mul_pd(vgain, vg));
    _mm256_storeu_pd(m + i, vm);
  }
  for (; i < n; ++i) {
    m[i] = decay * m[i] + gain * g[i];
  }
}

void axpy_avx2(double* y, const double* x, std::size_t n, double alpha) {
  const __m256d valpha = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    __m256d vx = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(valpha, vx)));
  }
  for (; i < n; ++i) {
    y[i] = y[i] + alpha * x[i];
  }
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  // (l0 + l1) + (l2 + l3), matching the scalar lane order.
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  lo = _mm_add_sd(lo, _mm_unpackhi_pd(lo, lo));
  hi = _mm_add_sd(hi, _mm_unpackhi_pd(hi, hi));
  double sum = _mm_cvtsd_f64(_mm_add_sd(lo, hi));
  for (; i < n; ++i) {
    sum = sum + x[i] * y[i];
  }
  return sum;
}

void scaled_inverse_sqrt_avx2(const double* w, double* out, std::size_t n, double offset,
                              double slope, double scale) {
  const __m256d voffset = _mm256_set1_pd(offset);
  const __m256d vslope = _mm256_set1_pd(slope);
  const __m256d vscale = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vw = _mm256_loadu_pd(w + i);
    __m256d denom = _mm256_sqrt_pd(_mm256_add_pd(voffset, _mm256_mul_pd(vslope, vw)));
    _mm256_storeu_pd(out + i, _mm256_div_pd(vscale, denom));
  }
  for (; i < n; ++i) {
    out[i] = scale / std::sqrt(offset + slope * w[i]);
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{
      "avx2", momentum_update_avx2, axpy_avx2, dot_avx2, scaled_inverse_sqrt_avx2,
  };
  return table;
}

}  // namespace fsgdm::kernels::detail
