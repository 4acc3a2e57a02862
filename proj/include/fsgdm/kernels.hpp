#pragma once

// Data-parallel inner loops used by the momentum recursion, the optimizer
// update, norm tracking and grid evaluation of the magnitude response.
//
// Every backend produces bitwise-identical results to the scalar reference:
// elementwise kernels use the same operation order without fused
// multiply-add, and reductions accumulate in four interleaved lanes that are
// combined as (l0 + l1) + (l2 + l3) before the tail is added sequentially.

#include <cstddef>
#include <span>
#include <string_view>

namespace fsgdm::kernels {

enum class Backend { kScalar, kAvx2 };

struct KernelTable {
  std::string_view name;
  // m[i] = decay * m[i] + gain * g[i]
  void (*momentum_update)(double* m, const double* g, std::size_t n, double decay, double gain);
  // y[i] = y[i] + alpha * x[i]
  void (*axpy)(double* y, const double* x, std::size_t n, double alpha);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // out[i] = scale / sqrt(offset + slope * w[i])
  void (*scaled_inverse_sqrt)(const double* w, double* out, std::size_t n, double offset,
                              double slope, double scale);
};

const KernelTable& scalar_table();

// nullptr when the backend was not compiled in or the CPU lacks support.
const KernelTable* table_for(Backend backend);

bool backend_available(Backend backend);

// Selects the backend used by the span wrappers below. Throws
// std::invalid_argument if it is unavailable on this machine.
void set_backend(Backend backend);

Backend active_backend();

const KernelTable& active();

std::string_view backend_name(Backend backend);

inline void momentum_update(std::span<double> m, std::span<const double> g, double decay,
                            double gain) {
  active().momentum_update(m.data(), g.data(), m.size(), decay, gain);
}

inline void axpy(std::span<double> y, double alpha, std::span<const double> x) {
  active().axpy(y.data(), x.data(), y.size(), alpha);
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}

double norm2(std::span<const double> x);

}  // namespace fsgdm::kernels
