#pragma once

#include "fsgdm/kernels.hpp"

namespace fsgdm::kernels::detail {

#if defined(FSGDM_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

}  // namespace fsgdm::kernels::detail
