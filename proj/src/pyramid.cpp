#include "wsireg/pyramid.hpp"

#include "wsireg/error.hpp"
#include "wsireg/kernels.hpp"

namespace wsireg {

GrayImage downsample_half(const GrayImage& img) {
  const int w = img.width(), h = img.height();
  const int ow = (w + 1) / 2, oh = (h + 1) / 2;
  GrayImage out(ow, oh);
  const int full_pairs = w / 2;
  for (int oy = 0; oy < oh; ++oy) {
    const int y0 = 2 * oy;
    const int y1 = (y0 + 1 < h) ? y0 + 1 : y0;
    const float* r0 = img.row(y0);
    const float* r1 = img.row(y1);
    float* dst = out.row(oy);
    // A ragged last row passes r0 twice, which averages existing pixels only.
    kernels::downsample2x2(r0, r1, dst, full_pairs);
    if (ow > full_pairs) {
      const int x0 = 2 * full_pairs;
      dst[full_pairs] = (y1 != y0) ? (r0[x0] + r1[x0]) * 0.5f : r0[x0];
    }
  }
  return out;
}

ImagePyramid build_pyramid(const GrayImage& img, int k) {
  if (k < 0) throw InvalidArgument("build_pyramid: k must be >= 0");
  const int min_dim = img.width() < img.height() ? img.width() : img.height();
  if (min_dim < (1 << k))
    throw InvalidArgument("build_pyramid: image too small for requested levels");
  ImagePyramid pyr;
  pyr.levels.reserve(k + 1);
  pyr.levels.push_back(img);
  for (int r = 1; r <= k; ++r)
    pyr.levels.push_back(downsample_half(pyr.levels.back()));
  return pyr;
}

}  // namespace wsireg
