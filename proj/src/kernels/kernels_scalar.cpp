#include "kernels_impl.hpp"

#include "wsireg/detail/sampling.hpp"

namespace wsireg::kernels::detail {

namespace {

double sum_sq_diff_scalar(const float* a, const float* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const float d = a[i] - b[i];
    acc += static_cast<double>(d * d);
  }
  return acc;
}

template <typename T>
void convolve_row_scalar(const T* padded, T* dst, std::size_t n, const T* k,
                         int taps) {
  for (std::size_t i = 0; i < n; ++i) {
    T acc = T(0);
    for (int j = 0; j < taps; ++j) acc += padded[i + j] * k[j];
    dst[i] = acc;
  }
}

template <typename T>
void axpy_scalar(T a, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void downsample2x2_scalar(const float* r0, const float* r1, float* dst,
                          std::size_t pairs) {
  for (std::size_t i = 0; i < pairs; ++i) {
    dst[i] = (r0[2 * i] + r0[2 * i + 1] + r1[2 * i] + r1[2 * i + 1]) * 0.25f;
  }
}

double warp_ssd_row_scalar(const float* fixed_row, int n, const float* moving,
                           int mw, int mh, double sx0, double sy0,
                           double stepx, double stepy, float fill) {
  if (mw < 2 || mh < 2) {
    double acc = 0.0;
    for (int x = 0; x < n; ++x) {
      const float v = wsireg::detail::bilinear_at(moving, mw, mh,
                                                  sx0 + x * stepx,
                                                  sy0 + x * stepy, fill);
      const float d = fixed_row[x] - v;
      acc += static_cast<double>(d * d);
    }
    return acc;
  }
  double acc = 0.0;
  for (int x = 0; x < n; ++x) {
    // Coordinates quantized to float, matching the SIMD lanes.
    const float sx = static_cast<float>(sx0 + x * stepx);
    const float sy = static_cast<float>(sy0 + x * stepy);
    const float v = wsireg::detail::bilinear_at_f(moving, mw, mh, sx, sy, fill);
    const float d = fixed_row[x] - v;
    acc += static_cast<double>(d * d);
  }
  return acc;
}

}  // namespace

const OpsTable& scalar_table() {
  static const OpsTable t = {
      sum_sq_diff_scalar,
      convolve_row_scalar<float>,
      convolve_row_scalar<double>,
      axpy_scalar<float>,
      axpy_scalar<double>,
      downsample2x2_scalar,
      warp_ssd_row_scalar,
  };
  return t;
}

}  // namespace wsireg::kernels::detail
