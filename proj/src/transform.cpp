#include "wsireg/transform.hpp"

#include <cmath>

#include "wsireg/detail/sampling.hpp"
#include "wsireg/error.hpp"

namespace wsireg {

RigidTransform2D compose(const RigidTransform2D& a, const RigidTransform2D& b) {
  const auto ma = a.matrix();
  const auto mb = b.matrix();
  // R = Ra*Rb, t = Ra*tb + ta
  const double r00 = ma[0] * mb[0] + ma[1] * mb[3];
  const double r10 = ma[3] * mb[0] + ma[4] * mb[3];
  const double tx = ma[0] * mb[2] + ma[1] * mb[5] + ma[2];
  const double ty = ma[3] * mb[2] + ma[4] * mb[5] + ma[5];
  return {std::atan2(r10, r00), tx, ty};
}

RigidTransform2D inverse(const RigidTransform2D& t) {
  const double c = std::cos(t.theta), s = std::sin(t.theta);
  // R^T, -R^T t
  return {-t.theta, -(c * t.dx + s * t.dy), -(-s * t.dx + c * t.dy)};
}

RigidTransform2D scale_transform(const RigidTransform2D& t, double factor) {
  if (!(factor > 0.0))
    throw InvalidArgument("scale_transform: factor must be > 0");
  return {t.theta, t.dx * factor, t.dy * factor};
}

GrayImage warp_image(const GrayImage& img, const RigidTransform2D& t,
                     Interp interp) {
  const int w = img.width(), h = img.height();
  GrayImage out(w, h);
  const RigidTransform2D inv = inverse(t);
  const auto m = inv.matrix();
  const float* src = img.data();
  for (int y = 0; y < h; ++y) {
    float* dst = out.row(y);
    // Source coordinates advance linearly along the row.
    double sx = m[1] * y + m[2];
    double sy = m[4] * y + m[5];
    if (interp == Interp::bilinear) {
      for (int x = 0; x < w; ++x) {
        dst[x] = detail::bilinear_at(src, w, h, sx + m[0] * x, sy + m[3] * x,
                                     kBackgroundFill);
      }
    } else {
      for (int x = 0; x < w; ++x) {
        dst[x] = detail::nearest_at(src, w, h, sx + m[0] * x, sy + m[3] * x,
                                    kBackgroundFill);
      }
    }
  }
  return out;
}

}  // namespace wsireg
