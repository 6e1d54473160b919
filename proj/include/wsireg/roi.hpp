#pragma once

namespace wsireg {

struct IntRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
};

// Axis-aligned box around the region of interest, kept in floating point so
// centers survive repeated halving.
struct RoiBox {
  double cx = 0.0;
  double cy = 0.0;
  double width = 0.0;
  double height = 0.0;
};

// Box for pyramid level r: center divided by 2^r, width/height kept, then
// clipped so the box lies inside the level image.
RoiBox roi_for_level(const RoiBox& roi0, int level, int level_w, int level_h);

// Integral pixel rect of a box, clipped to the image. Never empty for a
// non-degenerate box inside the image.
IntRect roi_rect(const RoiBox& roi, int img_w, int img_h);

}  // namespace wsireg
