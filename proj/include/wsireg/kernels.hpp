#pragma once

#include <cstddef>

namespace wsireg::kernels {

// Data-parallel inner loops used by the registration pipeline. Each op has a
// scalar reference implementation plus SIMD variants (AVX2 on x86-64, NEON on
// aarch64) selected at runtime; the unit suite checks the variants against
// the scalar reference on randomized inputs.

enum class Backend { scalar, avx2, neon };

// Picks the best backend supported by the running CPU.
void reset_auto();
// Returns false (and leaves the selection unchanged) if unsupported.
bool select(Backend b);
Backend active();
const char* name(Backend b);
bool available(Backend b);

// sum_i (a[i] - b[i])^2, accumulated in double.
double sum_sq_diff(const float* a, const float* b, std::size_t n);

// dst[i] = sum_j padded[i + j] * k[j], j in [0, taps). `padded` must hold
// n + taps - 1 values; border policy is the caller's business.
void convolve_row(const float* padded, float* dst, std::size_t n,
                  const float* k, int taps);
void convolve_row(const double* padded, double* dst, std::size_t n,
                  const double* k, int taps);

// y[i] += a * x[i]
void axpy(float a, const float* x, float* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);

// dst[i] = (r0[2i] + r0[2i+1] + r1[2i] + r1[2i+1]) / 4 for i in [0, pairs).
void downsample2x2(const float* r0, const float* r1, float* dst,
                   std::size_t pairs);

// Fused rigid warp + SSD over one output row: for x in [0, n),
// sample `moving` bilinearly at (sx0 + x*stepx, sy0 + x*stepy) with `fill`
// outside, and accumulate (fixed_row[x] - sample)^2 in double.
double warp_ssd_row(const float* fixed_row, int n, const float* moving,
                    int mw, int mh, double sx0, double sy0, double stepx,
                    double stepy, float fill);

}  // namespace wsireg::kernels
