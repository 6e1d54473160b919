#include "wsireg/roi.hpp"

#include <algorithm>
#include <cmath>

namespace wsireg {

namespace {

RoiBox clip_box(double cx, double cy, double w, double h, double img_w,
                double img_h) {
  double x0 = std::max(0.0, cx - w / 2);
  double x1 = std::min(img_w, cx + w / 2);
  double y0 = std::max(0.0, cy - h / 2);
  double y1 = std::min(img_h, cy + h / 2);
  if (x1 <= x0) {
    const double c = std::clamp(cx, 0.5, img_w - 0.5);
    x0 = c - 0.5;
    x1 = c + 0.5;
  }
  if (y1 <= y0) {
    const double c = std::clamp(cy, 0.5, img_h - 0.5);
    y0 = c - 0.5;
    y1 = c + 0.5;
  }
  return {(x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0};
}

}  // namespace

RoiBox roi_for_level(const RoiBox& roi0, int level, int level_w, int level_h) {
  const double f = static_cast<double>(1 << level);
  return clip_box(roi0.cx / f, roi0.cy / f, roi0.width, roi0.height,
                  static_cast<double>(level_w), static_cast<double>(level_h));
}

IntRect roi_rect(const RoiBox& roi, int img_w, int img_h) {
  int x0 = static_cast<int>(std::lround(roi.cx - roi.width / 2));
  int y0 = static_cast<int>(std::lround(roi.cy - roi.height / 2));
  int w = static_cast<int>(std::lround(roi.width));
  int h = static_cast<int>(std::lround(roi.height));
  x0 = std::clamp(x0, 0, img_w - 1);
  y0 = std::clamp(y0, 0, img_h - 1);
  w = std::clamp(w, 1, img_w - x0);
  h = std::clamp(h, 1, img_h - y0);
  return {x0, y0, w, h};
}

}  // namespace wsireg
