#pragma once

#include "parabolic/kernels.hpp"

namespace parabolic::kernels::detail {

extern const KernelTable kScalarTable;

#if defined(PARABOLIC_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

}  // namespace parabolic::kernels::detail
