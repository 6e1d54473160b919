#include "kernels_impl.hpp"

#if WSIREG_HAVE_NEON_SOURCES

#include <arm_neon.h>

#include "wsireg/detail/sampling.hpp"

namespace wsireg::kernels::detail {

namespace {

double sum_sq_diff_neon(const float* a, const float* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t d = vsubq_f32(vld1q_f32(a + i), vld1q_f32(b + i));
    const float32x4_t sq = vmulq_f32(d, d);
    acc0 = vaddq_f64(acc0, vcvt_f64_f32(vget_low_f32(sq)));
    acc1 = vaddq_f64(acc1, vcvt_f64_f32(vget_high_f32(sq)));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) {
    const float d = a[i] - b[i];
    acc += static_cast<double>(d * d);
  }
  return acc;
}

void convolve_row_f_neon(const float* padded, float* dst, std::size_t n,
                         const float* k, int taps) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float32x4_t acc = vdupq_n_f32(0.0f);
    for (int j = 0; j < taps; ++j) {
      acc = vfmaq_n_f32(acc, vld1q_f32(padded + i + j), k[j]);
    }
    vst1q_f32(dst + i, acc);
  }
  for (; i < n; ++i) {
    float acc = 0.0f;
    for (int j = 0; j < taps; ++j) acc += padded[i + j] * k[j];
    dst[i] = acc;
  }
}

void convolve_row_d_neon(const double* padded, double* dst, std::size_t n,
                         const double* k, int taps) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (int j = 0; j < taps; ++j) {
      acc = vfmaq_n_f64(acc, vld1q_f64(padded + i + j), k[j]);
    }
    vst1q_f64(dst + i, acc);
  }
  for (; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < taps; ++j) acc += padded[i + j] * k[j];
    dst[i] = acc;
  }
}

void axpy_f_neon(float a, const float* x, float* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    vst1q_f32(y + i, vfmaq_n_f32(vld1q_f32(y + i), vld1q_f32(x + i), a));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void axpy_d_neon(double a, const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_n_f64(vld1q_f64(y + i), vld1q_f64(x + i), a));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void downsample2x2_neon(const float* r0, const float* r1, float* dst,
                        std::size_t pairs) {
  std::size_t i = 0;
  for (; i + 4 <= pairs; i += 4) {
    const float32x4x2_t a = vld2q_f32(r0 + 2 * i);
    const float32x4x2_t b = vld2q_f32(r1 + 2 * i);
    const float32x4_t s = vaddq_f32(vaddq_f32(a.val[0], a.val[1]),
                                    vaddq_f32(b.val[0], b.val[1]));
    vst1q_f32(dst + i, vmulq_n_f32(s, 0.25f));
  }
  for (; i < pairs; ++i) {
    dst[i] = (r0[2 * i] + r0[2 * i + 1] + r1[2 * i] + r1[2 * i + 1]) * 0.25f;
  }
}

// No gather on NEON; the gather-heavy warp kernel stays scalar there.
double warp_ssd_row_neon(const float* fixed_row, int n, const float* moving,
                         int mw, int mh, double sx0, double sy0, double stepx,
                         double stepy, float fill) {
  return scalar_table().warp_ssd_row(fixed_row, n, moving, mw, mh, sx0, sy0,
                                     stepx, stepy, fill);
}

}  // namespace

const OpsTable& neon_table() {
  static const OpsTable t = {
      sum_sq_diff_neon,
      convolve_row_f_neon,
      convolve_row_d_neon,
      axpy_f_neon,
      axpy_d_neon,
      downsample2x2_neon,
      warp_ssd_row_neon,
  };
  return t;
}

}  // namespace wsireg::kernels::detail

#endif  // WSIREG_HAVE_NEON_SOURCES
