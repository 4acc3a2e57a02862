#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kernels_internal.hpp"

namespace fsgdm::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(FSGDM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend detect_best() { return cpu_has_avx2() ? Backend::kAvx2 : Backend::kScalar; }

std::atomic<Backend>& selected() {
  static std::atomic<Backend> backend{detect_best()};
  return backend;
}

}  // namespace

const KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return &scalar_table();
    case Backend::kAvx2:
#if defined(FSGDM_HAVE_AVX2)
      if (cpu_has_avx2()) return &detail::avx2_table();
#endif
      return nullptr;
  }
  return nullptr;
}

bool backend_available(Backend backend) { return table_for(backend) != nullptr; }

void set_backend(Backend backend) {
  if (!backend_available(backend)) {
    throw std::invalid_argument("kernel backend '" + std::string(backend_name(backend)) +
                                "' is not available on this machine");
  }
  selected().store(backend);
}

Backend active_backend() { return selected().load(); }

const KernelTable& active() { return *table_for(active_backend()); }

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
  }
  return "unknown";
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

}  // namespace fsgdm::kernels
