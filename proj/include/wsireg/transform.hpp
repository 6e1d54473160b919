#pragma once

#include <array>
#include <cmath>

#include "wsireg/image.hpp"

namespace wsireg {

struct Point2d {
  double x = 0.0;
  double y = 0.0;
};

// Rotation + translation, no scale or shear. Realized as a 2x3 matrix on
// demand; composition is done in matrix form to avoid angle-wrapping bugs.
struct RigidTransform2D {
  double theta = 0.0;  // radians
  double dx = 0.0;     // pixels
  double dy = 0.0;     // pixels

  static RigidTransform2D identity() { return {}; }

  // Row-major 2x3: [a b tx; c d ty].
  std::array<double, 6> matrix() const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c, -s, dx, s, c, dy};
  }

  Point2d apply(Point2d p) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * p.x - s * p.y + dx, s * p.x + c * p.y + dy};
  }
};

// Result applied to a point equals `a` applied after `b`.
RigidTransform2D compose(const RigidTransform2D& a, const RigidTransform2D& b);

RigidTransform2D inverse(const RigidTransform2D& t);

// Keeps theta, multiplies the translation. factor must be > 0.
RigidTransform2D scale_transform(const RigidTransform2D& t, double factor);

enum class Interp { nearest, bilinear };

// Output has the source dimensions; pixels mapping outside the source fill
// with 255 (glass background).
GrayImage warp_image(const GrayImage& img, const RigidTransform2D& t,
                     Interp interp);

inline constexpr float kBackgroundFill = 255.0f;

}  // namespace wsireg
