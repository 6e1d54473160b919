#pragma once

#include <cstddef>

namespace wsireg::kernels::detail {

struct OpsTable {
  double (*sum_sq_diff)(const float*, const float*, std::size_t);
  void (*convolve_row_f)(const float*, float*, std::size_t, const float*, int);
  void (*convolve_row_d)(const double*, double*, std::size_t, const double*, int);
  void (*axpy_f)(float, const float*, float*, std::size_t);
  void (*axpy_d)(double, const double*, double*, std::size_t);
  void (*downsample2x2)(const float*, const float*, float*, std::size_t);
  double (*warp_ssd_row)(const float*, int, const float*, int, int, double,
                         double, double, double, float);
};

const OpsTable& scalar_table();
#if WSIREG_HAVE_AVX2_SOURCES
const OpsTable& avx2_table();
#endif
#if WSIREG_HAVE_NEON_SOURCES
const OpsTable& neon_table();
#endif

}  // namespace wsireg::kernels::detail
