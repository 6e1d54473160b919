#include "wsireg/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wsireg/detail/sampling.hpp"
#include "wsireg/error.hpp"
#include "wsireg/preprocess.hpp"

namespace wsireg::phantom {

namespace {

constexpr double kLumenAxisFactor = 0.65;
constexpr double kLumenIntensity = 235.0;
constexpr double kTissueBase = 190.0;

double smooth_edge(double dist_px, double feather = 1.5) {
  return std::clamp(0.5 - dist_px / feather, 0.0, 1.0);
}

// Feathered coverage of an axis-aligned ellipse at (cx, cy).
double ellipse_weight(double x, double y, double cx, double cy, double rx,
                      double ry) {
  const double ex = (x - cx) / rx;
  const double ey = (y - cy) / ry;
  const double s = std::sqrt(ex * ex + ey * ey);
  return smooth_edge((s - 1.0) * std::min(rx, ry));
}

bool inside_ellipse(double x, double y, double cx, double cy, double rx,
                    double ry) {
  const double ex = (x - cx) / rx;
  const double ey = (y - cy) / ry;
  return ex * ex + ey * ey <= 1.0;
}

struct Blob {
  double cx, cy, rx, ry, intensity;
};

struct Patch {
  double cx, cy, r;
  bool eraser;
};

Point2d vessel_center(const PhantomSpec& s, int slice) {
  const double cx = s.vessel_cx < 0 ? s.dims / 2.0 : s.vessel_cx;
  const double cy = s.vessel_cy < 0 ? s.dims / 2.0 : s.vessel_cy;
  return {cx + slice * s.vessel_drift_x, cy + slice * s.vessel_drift_y};
}

// Rigid transform rotating about the image center plus a shift, expressed
// in the origin frame.
RigidTransform2D about_center(double theta, double sx, double sy, double c) {
  const double co = std::cos(theta), si = std::sin(theta);
  return {theta, c - (co * c - si * c) + sx, c - (si * c + co * c) + sy};
}

}  // namespace

RoiBox default_roi(const PhantomSpec& spec) {
  Point2d lo = vessel_center(spec, 0);
  Point2d hi = vessel_center(spec, spec.slices - 1);
  if (lo.x > hi.x) std::swap(lo.x, hi.x);
  if (lo.y > hi.y) std::swap(lo.y, hi.y);
  const double margin = 1.3 * std::max(spec.vessel_rx, spec.vessel_ry);
  return {(lo.x + hi.x) / 2, (lo.y + hi.y) / 2,
          hi.x - lo.x + 2 * margin, hi.y - lo.y + 2 * margin};
}

PhantomStack generate(const PhantomSpec& spec) {
  if (spec.slices < 1 || spec.dims < 64)
    throw InvalidSpecError("phantom: need slices >= 1 and dims >= 64");
  if (spec.vessel_rx < 4 || spec.vessel_ry < 4)
    throw InvalidSpecError("phantom: vessel axes too small");
  if (spec.theta_max_deg > 30.0 || spec.shift_max > spec.dims / 8.0)
    throw InvalidSpecError("phantom: perturbations exceed the default search extents");
  const double d = spec.dims;
  const double rmax = std::max(spec.vessel_rx, spec.vessel_ry);
  for (int i = 0; i < spec.slices; ++i) {
    const Point2d c = vessel_center(spec, i);
    if (c.x - rmax < 8 || c.x + rmax > d - 8 || c.y - rmax < 8 ||
        c.y + rmax > d - 8)
      throw InvalidSpecError("phantom: vessel leaves the image");
  }

  std::mt19937_64 layout_rng(spec.seed * 0x9E3779B97F4A7C15ull + 1);
  std::mt19937_64 texture_rng(spec.seed * 0x9E3779B97F4A7C15ull + 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Shared texture field.
  GrayImage noise(spec.dims, spec.dims);
  for (std::size_t i = 0; i < noise.size(); ++i)
    noise.data()[i] = static_cast<float>(unit(texture_rng) * 255.0);
  GrayImage texture = preprocess::gaussian_blur(noise, spec.texture_corr);
  {
    double mean = texture.mean(), var = 0.0;
    for (std::size_t i = 0; i < texture.size(); ++i) {
      const double v = texture.data()[i] - mean;
      var += v * v;
    }
    const double stddev = std::sqrt(var / static_cast<double>(texture.size()));
    const double scale = stddev > 1e-9 ? spec.texture_amplitude / stddev : 0.0;
    for (std::size_t i = 0; i < texture.size(); ++i)
      texture.data()[i] =
          static_cast<float>((texture.data()[i] - mean) * scale);
  }

  // Tissue ellipse, fixed for the stack.
  const double tissue_rx = d * (0.40 + 0.04 * unit(layout_rng));
  const double tissue_ry = d * (0.37 + 0.04 * unit(layout_rng));
  const double tissue_cx = d / 2, tissue_cy = d / 2;

  // Shared anatomy blobs: structure for whole-tissue and coarse alignment.
  std::vector<Blob> blobs;
  for (int b = 0; b < 12; ++b) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      const double ang = unit(layout_rng) * 2 * M_PI;
      const double rad = std::sqrt(unit(layout_rng)) * 0.8;
      const double bx = tissue_cx + std::cos(ang) * rad * tissue_rx;
      const double by = tissue_cy + std::sin(ang) * rad * tissue_ry;
      const double brx = 12 + unit(layout_rng) * 26;
      const double bry = 12 + unit(layout_rng) * 26;
      const double inten = 80 + unit(layout_rng) * 70;
      const Point2d c0 = vessel_center(spec, 0);
      const Point2d c1 = vessel_center(spec, spec.slices - 1);
      const double min_dist = rmax + std::max(brx, bry) + 12;
      if (std::hypot(bx - c0.x, by - c0.y) < min_dist ||
          std::hypot(bx - c1.x, by - c1.y) < min_dist)
        continue;
      blobs.push_back({bx, by, brx, bry, inten});
      break;
    }
  }

  // Distractor patches: clear of the vessel trajectory and its ROI box.
  const RoiBox roi = default_roi(spec);
  std::vector<Patch> patches;
  for (int p = 0; p < spec.distractors; ++p) {
    bool placed = false;
    for (int attempt = 0; attempt < 5000 && !placed; ++attempt) {
      const double ang = unit(layout_rng) * 2 * M_PI;
      const double rad = std::sqrt(unit(layout_rng));
      const double px = tissue_cx + std::cos(ang) * rad * (tissue_rx - spec.distractor_radius * 0.5);
      const double py = tissue_cy + std::sin(ang) * rad * (tissue_ry - spec.distractor_radius * 0.5);
      bool ok = true;
      for (int i = 0; i < spec.slices && ok; ++i) {
        const Point2d c = vessel_center(spec, i);
        if (std::hypot(px - c.x, py - c.y) - spec.distractor_radius <
            2.0 * rmax)
          ok = false;
      }
      // Keep clear of the implied ROI box as well.
      const double hx = roi.width / 2 + spec.distractor_radius;
      const double hy = roi.height / 2 + spec.distractor_radius;
      if (std::abs(px - roi.cx) < hx && std::abs(py - roi.cy) < hy) ok = false;
      for (const Patch& q : patches)
        if (std::hypot(px - q.cx, py - q.cy) < spec.distractor_radius + q.r)
          ok = false;
      if (!ok) continue;
      patches.push_back({px, py, spec.distractor_radius, p == 0});
      placed = true;
    }
    if (!placed)
      throw InvalidSpecError("phantom: cannot place distractors clear of the vessel");
  }

  PhantomStack out;
  out.slices.reserve(spec.slices);
  out.lumen_masks.reserve(spec.slices);
  out.truth.reserve(spec.slices);
  for (const Patch& p : patches) out.distractor_centers.push_back({p.cx, p.cy});

  for (int s = 0; s < spec.slices; ++s) {
    std::mt19937_64 slice_rng(spec.seed * 0x9E3779B97F4A7C15ull + 100 + s);
    const Point2d vc = vessel_center(spec, s);
    const double stain_f =
        1.0 + spec.stain_variation * (2.0 * unit(slice_rng) - 1.0);

    // Canonical scene.
    GrayImage canon(spec.dims, spec.dims, 255.0f);
    for (int y = 0; y < spec.dims; ++y) {
      float* row = canon.row(y);
      const float* tex = texture.row(y);
      for (int x = 0; x < spec.dims; ++x) {
        const double wt =
            ellipse_weight(x, y, tissue_cx, tissue_cy, tissue_rx, tissue_ry);
        if (wt <= 0.0) continue;
        const double tissue =
            std::clamp((kTissueBase - tex[x]) * stain_f, 0.0, 250.0);
        row[x] = static_cast<float>(255.0 * (1 - wt) + tissue * wt);
      }
    }
    for (const Blob& b : blobs) {
      const int x0 = std::max(0, static_cast<int>(b.cx - b.rx - 2));
      const int x1 = std::min(spec.dims - 1, static_cast<int>(b.cx + b.rx + 2));
      const int y0 = std::max(0, static_cast<int>(b.cy - b.ry - 2));
      const int y1 = std::min(spec.dims - 1, static_cast<int>(b.cy + b.ry + 2));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          const double w = ellipse_weight(x, y, b.cx, b.cy, b.rx, b.ry);
          if (w > 0)
            canon.at(x, y) = static_cast<float>(canon.at(x, y) * (1 - w) +
                                                b.intensity * stain_f * w);
        }
    }
    // Vessel wall then lumen.
    {
      const int x0 = std::max(0, static_cast<int>(vc.x - spec.vessel_rx - 2));
      const int x1 = std::min(spec.dims - 1,
                              static_cast<int>(vc.x + spec.vessel_rx + 2));
      const int y0 = std::max(0, static_cast<int>(vc.y - spec.vessel_ry - 2));
      const int y1 = std::min(spec.dims - 1,
                              static_cast<int>(vc.y + spec.vessel_ry + 2));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          const double ww =
              ellipse_weight(x, y, vc.x, vc.y, spec.vessel_rx, spec.vessel_ry);
          if (ww > 0)
            canon.at(x, y) = static_cast<float>(
                canon.at(x, y) * (1 - ww) + spec.vessel_intensity * ww);
          const double wl = ellipse_weight(x, y, vc.x, vc.y,
                                           kLumenAxisFactor * spec.vessel_rx,
                                           kLumenAxisFactor * spec.vessel_ry);
          if (wl > 0)
            canon.at(x, y) = static_cast<float>(canon.at(x, y) * (1 - wl) +
                                                kLumenIntensity * wl);
        }
    }

    // Distractor deformations sample from a frozen copy of the scene.
    if (!patches.empty()) {
      const GrayImage frozen = canon;
      for (const Patch& p : patches) {
        const bool erase_now = p.eraser && (s % 2 == 1);
        const double phi = (unit(slice_rng) * 2 - 1) * (25.0 * M_PI / 180.0);
        const double tx = (unit(slice_rng) * 2 - 1) * 0.3 * p.r;
        const double ty = (unit(slice_rng) * 2 - 1) * 0.3 * p.r;
        const double sc = 0.85 + 0.3 * unit(slice_rng);
        const double co = std::cos(phi) * sc, si = std::sin(phi) * sc;
        const int x0 = std::max(0, static_cast<int>(p.cx - p.r - 2));
        const int x1 = std::min(spec.dims - 1, static_cast<int>(p.cx + p.r + 2));
        const int y0 = std::max(0, static_cast<int>(p.cy - p.r - 2));
        const int y1 = std::min(spec.dims - 1, static_cast<int>(p.cy + p.r + 2));
        for (int y = y0; y <= y1; ++y)
          for (int x = x0; x <= x1; ++x) {
            const double dist = std::hypot(x - p.cx, y - p.cy) - p.r;
            const double w = smooth_edge(dist, 8.0);
            if (w <= 0) continue;
            double v;
            if (erase_now) {
              v = 246.0;
            } else {
              const double rx = x - p.cx, ry = y - p.cy;
              const double sx = p.cx + co * rx - si * ry + tx;
              const double sy = p.cy + si * rx + co * ry + ty;
              v = detail::bilinear_at(frozen.data(), spec.dims, spec.dims, sx,
                                      sy, 246.0f);
            }
            canon.at(x, y) =
                static_cast<float>(canon.at(x, y) * (1 - w) + v * w);
          }
      }
    }

    // Off-tissue stain blobs on the glass.
    for (int a = 0; a < spec.artifact_stains; ++a) {
      for (int attempt = 0; attempt < 200; ++attempt) {
        const double sx = 20 + unit(slice_rng) * (d - 40);
        const double sy = 20 + unit(slice_rng) * (d - 40);
        const double sr = 8 + unit(slice_rng) * 22;
        if (inside_ellipse(sx, sy, tissue_cx, tissue_cy, tissue_rx + sr + 10,
                           tissue_ry + sr + 10))
          continue;
        const double inten = 50 + unit(slice_rng) * 70;
        const int x0 = std::max(0, static_cast<int>(sx - sr - 2));
        const int x1 = std::min(spec.dims - 1, static_cast<int>(sx + sr + 2));
        const int y0 = std::max(0, static_cast<int>(sy - sr - 2));
        const int y1 = std::min(spec.dims - 1, static_cast<int>(sy + sr + 2));
        for (int y = y0; y <= y1; ++y)
          for (int x = x0; x <= x1; ++x) {
            const double w = ellipse_weight(x, y, sx, sy, sr, sr);
            if (w > 0)
              canon.at(x, y) =
                  static_cast<float>(canon.at(x, y) * (1 - w) + inten * w);
          }
        break;
      }
    }

    // Ground-truth perturbation (identity for slice 0).
    RigidTransform2D g = RigidTransform2D::identity();
    if (s > 0) {
      const double theta =
          (unit(slice_rng) * 2 - 1) * spec.theta_max_deg * M_PI / 180.0;
      const double sx = (unit(slice_rng) * 2 - 1) * spec.shift_max;
      const double sy = (unit(slice_rng) * 2 - 1) * spec.shift_max;
      g = about_center(theta, sx, sy, d / 2.0);
    }
    const GrayImage warped = warp_image(canon, g, Interp::bilinear);

    // Lumen mask rasterized analytically in the warped frame.
    BinaryMask mask(spec.dims, spec.dims);
    const RigidTransform2D ginv = inverse(g);
    const auto m = ginv.matrix();
    for (int y = 0; y < spec.dims; ++y) {
      const double bx = m[1] * y + m[2];
      const double by = m[4] * y + m[5];
      for (int x = 0; x < spec.dims; ++x) {
        const double cx = bx + m[0] * x;
        const double cy = by + m[3] * x;
        if (inside_ellipse(cx, cy, vc.x, vc.y,
                           kLumenAxisFactor * spec.vessel_rx,
                           kLumenAxisFactor * spec.vessel_ry))
          mask.set(x, y, true);
      }
    }

    // Tint: brown/red cast on tissue, neutral glass.
    RgbImage rgb(spec.dims, spec.dims);
    for (int y = 0; y < spec.dims; ++y) {
      const float* row = warped.row(y);
      for (int x = 0; x < spec.dims; ++x) {
        const double gval = row[x];
        std::uint8_t* px = rgb.pixel(x, y);
        if (gval >= 250.0) {
          const auto v = static_cast<std::uint8_t>(std::lround(
              std::clamp(gval, 0.0, 255.0)));
          px[0] = px[1] = px[2] = v;
        } else {
          px[0] = static_cast<std::uint8_t>(
              std::lround(std::clamp(gval * 1.06 + 4.0, 0.0, 255.0)));
          px[1] = static_cast<std::uint8_t>(
              std::lround(std::clamp(gval * 0.94, 0.0, 255.0)));
          px[2] = static_cast<std::uint8_t>(
              std::lround(std::clamp(gval * 0.90 + 2.0, 0.0, 255.0)));
        }
      }
    }

    out.slices.push_back(std::move(rgb));
    out.lumen_masks.push_back(std::move(mask));
    out.truth.push_back(g);
  }
  return out;
}

}  // namespace wsireg::phantom
