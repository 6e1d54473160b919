#include "kernels_impl.hpp"

#if WSIREG_HAVE_AVX2_SOURCES

#include <immintrin.h>

#include "wsireg/detail/sampling.hpp"

namespace wsireg::kernels::detail {

namespace {

inline double hsum256d(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double sum_sq_diff_avx2(const float* a, const float* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
    const __m256 sq = _mm256_mul_ps(d, d);
    acc0 = _mm256_add_pd(acc0, _mm256_cvtps_pd(_mm256_castps256_ps128(sq)));
    acc1 = _mm256_add_pd(acc1, _mm256_cvtps_pd(_mm256_extractf128_ps(sq, 1)));
  }
  double acc = hsum256d(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const float d = a[i] - b[i];
    acc += static_cast<double>(d * d);
  }
  return acc;
}

void convolve_row_f_avx2(const float* padded, float* dst, std::size_t n,
                         const float* k, int taps) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 acc = _mm256_setzero_ps();
    for (int j = 0; j < taps; ++j) {
      acc = _mm256_fmadd_ps(_mm256_loadu_ps(padded + i + j),
                            _mm256_set1_ps(k[j]), acc);
    }
    _mm256_storeu_ps(dst + i, acc);
  }
  for (; i < n; ++i) {
    float acc = 0.0f;
    for (int j = 0; j < taps; ++j) acc += padded[i + j] * k[j];
    dst[i] = acc;
  }
}

void convolve_row_d_avx2(const double* padded, double* dst, std::size_t n,
                         const double* k, int taps) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (int j = 0; j < taps; ++j) {
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(padded + i + j),
                            _mm256_set1_pd(k[j]), acc);
    }
    _mm256_storeu_pd(dst + i, acc);
  }
  for (; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < taps; ++j) acc += padded[i + j] * k[j];
    dst[i] = acc;
  }
}

void axpy_f_avx2(float a, const float* x, float* y, std::size_t n) {
  const __m256 av = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i),
                                            _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void axpy_d_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void downsample2x2_avx2(const float* r0, const float* r1, float* dst,
                        std::size_t pairs) {
  const __m256 quarter = _mm256_set1_ps(0.25f);
  std::size_t i = 0;
  for (; i + 8 <= pairs; i += 8) {
    // Two blocks of 16 input columns -> 8 outputs.
    const __m256 a = _mm256_add_ps(_mm256_loadu_ps(r0 + 2 * i),
                                   _mm256_loadu_ps(r1 + 2 * i));
    const __m256 b = _mm256_add_ps(_mm256_loadu_ps(r0 + 2 * i + 8),
                                   _mm256_loadu_ps(r1 + 2 * i + 8));
    // hadd interleaves 128-bit halves; put pair sums back in column order.
    const __m256 h = _mm256_hadd_ps(a, b);
    const __m256 pairsum = _mm256_castpd_ps(
        _mm256_permute4x64_pd(_mm256_castps_pd(h), _MM_SHUFFLE(3, 1, 2, 0)));
    _mm256_storeu_ps(dst + i, _mm256_mul_ps(pairsum, quarter));
  }
  for (; i < pairs; ++i) {
    dst[i] = (r0[2 * i] + r0[2 * i + 1] + r1[2 * i] + r1[2 * i + 1]) * 0.25f;
  }
}

double warp_ssd_row_avx2(const float* fixed_row, int n, const float* moving,
                         int mw, int mh, double sx0, double sy0, double stepx,
                         double stepy, float fill) {
  if (mw < 2 || mh < 2) {
    return scalar_table().warp_ssd_row(fixed_row, n, moving, mw, mh, sx0, sy0,
                                       stepx, stepy, fill);
  }
  const __m256d xoff_lo = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  const __m256d xoff_hi = _mm256_set_pd(7.0, 6.0, 5.0, 4.0);
  const __m256 zero = _mm256_setzero_ps();
  const __m256 xmax = _mm256_set1_ps(static_cast<float>(mw - 1));
  const __m256 ymax = _mm256_set1_ps(static_cast<float>(mh - 1));
  const __m256i x0cap = _mm256_set1_epi32(mw - 2);
  const __m256i y0cap = _mm256_set1_epi32(mh - 2);
  const __m256i izero = _mm256_setzero_si256();
  const __m256i mwv = _mm256_set1_epi32(mw);
  const __m256 fillv = _mm256_set1_ps(fill);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();

  int x = 0;
  for (; x + 8 <= n; x += 8) {
    const __m256d xbase = _mm256_set1_pd(static_cast<double>(x));
    const __m256d xlo = _mm256_add_pd(xbase, xoff_lo);
    const __m256d xhi = _mm256_add_pd(xbase, xoff_hi);
    const __m256d sxlo = _mm256_add_pd(_mm256_set1_pd(sx0),
                                       _mm256_mul_pd(xlo, _mm256_set1_pd(stepx)));
    const __m256d sxhi = _mm256_add_pd(_mm256_set1_pd(sx0),
                                       _mm256_mul_pd(xhi, _mm256_set1_pd(stepx)));
    const __m256d sylo = _mm256_add_pd(_mm256_set1_pd(sy0),
                                       _mm256_mul_pd(xlo, _mm256_set1_pd(stepy)));
    const __m256d syhi = _mm256_add_pd(_mm256_set1_pd(sy0),
                                       _mm256_mul_pd(xhi, _mm256_set1_pd(stepy)));
    const __m256 sx = _mm256_set_m128(_mm256_cvtpd_ps(sxhi), _mm256_cvtpd_ps(sxlo));
    const __m256 sy = _mm256_set_m128(_mm256_cvtpd_ps(syhi), _mm256_cvtpd_ps(sylo));

    const __m256 valid = _mm256_and_ps(
        _mm256_and_ps(_mm256_cmp_ps(sx, zero, _CMP_GE_OQ),
                      _mm256_cmp_ps(sx, xmax, _CMP_LE_OQ)),
        _mm256_and_ps(_mm256_cmp_ps(sy, zero, _CMP_GE_OQ),
                      _mm256_cmp_ps(sy, ymax, _CMP_LE_OQ)));

    __m256 sxf = _mm256_floor_ps(sx);
    __m256 syf = _mm256_floor_ps(sy);
    __m256i x0 = _mm256_cvtps_epi32(sxf);
    __m256i y0 = _mm256_cvtps_epi32(syf);
    // Clamp indices so gathers stay in bounds for invalid/edge lanes.
    x0 = _mm256_min_epi32(_mm256_max_epi32(x0, izero), x0cap);
    y0 = _mm256_min_epi32(_mm256_max_epi32(y0, izero), y0cap);
    const __m256 fx = _mm256_sub_ps(sx, _mm256_cvtepi32_ps(x0));
    const __m256 fy = _mm256_sub_ps(sy, _mm256_cvtepi32_ps(y0));

    const __m256i idx = _mm256_add_epi32(_mm256_mullo_epi32(y0, mwv), x0);
    const __m256 p00 = _mm256_i32gather_ps(moving, idx, 4);
    const __m256 p01 =
        _mm256_i32gather_ps(moving, _mm256_add_epi32(idx, _mm256_set1_epi32(1)), 4);
    const __m256 p10 =
        _mm256_i32gather_ps(moving, _mm256_add_epi32(idx, mwv), 4);
    const __m256 p11 = _mm256_i32gather_ps(
        moving, _mm256_add_epi32(idx, _mm256_add_epi32(mwv, _mm256_set1_epi32(1))), 4);

    const __m256 one = _mm256_set1_ps(1.0f);
    const __m256 gx = _mm256_sub_ps(one, fx);
    const __m256 gy = _mm256_sub_ps(one, fy);
    const __m256 v0 = _mm256_add_ps(_mm256_mul_ps(p00, gx), _mm256_mul_ps(p01, fx));
    const __m256 v1 = _mm256_add_ps(_mm256_mul_ps(p10, gx), _mm256_mul_ps(p11, fx));
    __m256 v = _mm256_add_ps(_mm256_mul_ps(v0, gy), _mm256_mul_ps(v1, fy));
    v = _mm256_blendv_ps(fillv, v, valid);

    const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(fixed_row + x), v);
    const __m256 sq = _mm256_mul_ps(d, d);
    acc0 = _mm256_add_pd(acc0, _mm256_cvtps_pd(_mm256_castps256_ps128(sq)));
    acc1 = _mm256_add_pd(acc1, _mm256_cvtps_pd(_mm256_extractf128_ps(sq, 1)));
  }
  double acc = hsum256d(_mm256_add_pd(acc0, acc1));
  for (; x < n; ++x) {
    const float sx = static_cast<float>(sx0 + x * stepx);
    const float sy = static_cast<float>(sy0 + x * stepy);
    const float v = wsireg::detail::bilinear_at_f(moving, mw, mh, sx, sy, fill);
    const float d = fixed_row[x] - v;
    acc += static_cast<double>(d * d);
  }
  return acc;
}

}  // namespace

const OpsTable& avx2_table() {
  static const OpsTable t = {
      sum_sq_diff_avx2,
      convolve_row_f_avx2,
      convolve_row_d_avx2,
      axpy_f_avx2,
      axpy_d_avx2,
      downsample2x2_avx2,
      warp_ssd_row_avx2,
  };
  return t;
}

}  // namespace wsireg::kernels::detail

#endif  // WSIREG_HAVE_AVX2_SOURCES
