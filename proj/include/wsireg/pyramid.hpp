#pragma once

#include <vector>

#include "wsireg/image.hpp"

namespace wsireg {

// Level r is downsampled from level 0 by a factor of 2^r via 2x2 area
// averaging; odd dimensions use ceil division with the ragged last row or
// column averaging only existing pixels.
struct ImagePyramid {
  std::vector<GrayImage> levels;

  const GrayImage& level(int r) const { return levels[r]; }
  int level_count() const { return static_cast<int>(levels.size()); }
};

GrayImage downsample_half(const GrayImage& img);

// k+1 levels. The image must be at least 2^k pixels in each dimension.
ImagePyramid build_pyramid(const GrayImage& img, int k);

}  // namespace wsireg
