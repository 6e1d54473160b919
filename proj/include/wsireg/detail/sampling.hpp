#pragma once

#include <cmath>

namespace wsireg::detail {

// Shared sampling helpers. warp_image and the fused warp+SSD kernels must
// agree per pixel, so they all go through these.

inline float bilinear_at(const float* img, int w, int h, double sx, double sy,
                         float fill) {
  if (!(sx >= 0.0 && sx <= w - 1 && sy >= 0.0 && sy <= h - 1)) return fill;
  if (w < 2 || h < 2) {
    return img[static_cast<std::size_t>(std::lround(sy)) * w +
               static_cast<std::size_t>(std::lround(sx))];
  }
  int x0 = static_cast<int>(sx);
  int y0 = static_cast<int>(sy);
  if (x0 > w - 2) x0 = w - 2;
  if (y0 > h - 2) y0 = h - 2;
  const float fx = static_cast<float>(sx - x0);
  const float fy = static_cast<float>(sy - y0);
  const float* r0 = img + static_cast<std::size_t>(y0) * w + x0;
  const float* r1 = r0 + w;
  // Two-coefficient form: exact at fx, fy in {0, 1}, so integer-coordinate
  // samples reproduce source pixels bit for bit.
  const float v0 = r0[0] * (1.0f - fx) + r0[1] * fx;
  const float v1 = r1[0] * (1.0f - fx) + r1[1] * fx;
  return v0 * (1.0f - fy) + v1 * fy;
}

// Float-coordinate variant used by the fused warp+SSD kernels. Coordinates
// are quantized to float so scalar and SIMD backends agree lane for lane.
inline float bilinear_at_f(const float* img, int w, int h, float sx, float sy,
                           float fill) {
  if (!(sx >= 0.0f && sx <= static_cast<float>(w - 1) && sy >= 0.0f &&
        sy <= static_cast<float>(h - 1)))
    return fill;
  int x0 = static_cast<int>(std::floor(sx));
  int y0 = static_cast<int>(std::floor(sy));
  if (x0 < 0) x0 = 0;
  if (y0 < 0) y0 = 0;
  if (x0 > w - 2) x0 = w - 2;
  if (y0 > h - 2) y0 = h - 2;
  const float fx = sx - static_cast<float>(x0);
  const float fy = sy - static_cast<float>(y0);
  const float* r0 = img + static_cast<std::size_t>(y0) * w + x0;
  const float* r1 = r0 + w;
  const float v0 = r0[0] * (1.0f - fx) + r0[1] * fx;
  const float v1 = r1[0] * (1.0f - fx) + r1[1] * fx;
  return v0 * (1.0f - fy) + v1 * fy;
}

inline float nearest_at(const float* img, int w, int h, double sx, double sy,
                        float fill) {
  const long x = std::lround(sx);
  const long y = std::lround(sy);
  if (x < 0 || x >= w || y < 0 || y >= h) return fill;
  return img[static_cast<std::size_t>(y) * w + x];
}

}  // namespace wsireg::detail
