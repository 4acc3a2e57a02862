#include <cmath>

#include "fsgdm/kernels.hpp"

namespace fsgdm::kernels {
namespace {

void momentum_update_scalar(double* m, const double* g, std::size_t n, double decay,
                            double gain) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = decay * m[i] + gain * g[i];
  }
}

void axpy_scalar(double* y, const double* x, std::size_t n, double alpha) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = y[i] + alpha * x[i];
  }
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lane[0] = lane[0] + x[i] * y[i];
    lane[1] = lane[1] + x[i + 1] * y[i + 1];
    lane[2] = lane[2] + x[i + 2] * y[i + 2];
    lane[3] = lane[3] + x[i + 3] * y[i + 3];
  }
  double sum = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (; i < n; ++i) {
    sum = sum + x[i] * y[i];
  }
  return sum;
}

void scaled_inverse_sqrt_scalar(const double* w, double* out, std::size_t n, double offset,
                                double slope, double scale) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = scale / std::sqrt(offset + slope * w[i]);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{
      "scalar", momentum_update_scalar, axpy_scalar, dot_scalar, scaled_inverse_sqrt_scalar,
  };
  return table;
}

}  // namespace fsgdm::kernels
