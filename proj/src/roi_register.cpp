#include "wsireg/roi_register.hpp"

#include <algorithm>
#include <cmath>

#include "wsireg/error.hpp"
#include "wsireg/global_align.hpp"
#include "wsireg/parallel.hpp"
#include "wsireg/pyramid.hpp"

namespace wsireg::roi_register {

namespace {

GrayImage crop(const GrayImage& img, const IntRect& r) {
  GrayImage out(r.w, r.h);
  for (int y = 0; y < r.h; ++y) {
    const float* src = img.row(r.y + y) + r.x;
    std::copy(src, src + r.w, out.row(y));
  }
  return out;
}

double triangle_area(const Point2d& a, const Point2d& b, const Point2d& c) {
  return 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

double score_candidate(const GrayImage& fixed_crop, const GrayImage& moving,
                       const IntRect& rect, const RigidTransform2D& t) {
  const GrayImage warped = warp_image(moving, t, Interp::bilinear);
  return global_align::ssd(fixed_crop, crop(warped, rect));
}

}  // namespace

RigidTransform2D rigid_from_correspondences(const std::vector<Point2d>& src,
                                            const std::vector<Point2d>& dst) {
  if (src.size() != dst.size() || src.size() < 2)
    throw InvalidArgument("rigid_from_correspondences: need >= 2 point pairs");
  const double n = static_cast<double>(src.size());
  Point2d cs{0, 0}, cd{0, 0};
  for (std::size_t i = 0; i < src.size(); ++i) {
    cs.x += src[i].x;
    cs.y += src[i].y;
    cd.x += dst[i].x;
    cd.y += dst[i].y;
  }
  cs.x /= n;
  cs.y /= n;
  cd.x /= n;
  cd.y /= n;

  double sum_cross = 0.0, sum_dot = 0.0, spread = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double ax = src[i].x - cs.x, ay = src[i].y - cs.y;
    const double bx = dst[i].x - cd.x, by = dst[i].y - cd.y;
    sum_cross += ax * by - ay * bx;
    sum_dot += ax * bx + ay * by;
    spread += ax * ax + ay * ay;
  }
  if (spread < 1e-12)
    throw InvalidArgument(
        "rigid_from_correspondences: source points are coincident");

  const double theta = std::atan2(sum_cross, sum_dot);
  const double c = std::cos(theta), s = std::sin(theta);
  return {theta, cd.x - (c * cs.x - s * cs.y), cd.y - (s * cs.x + c * cs.y)};
}

LevelResult register_level(const GrayImage& fixed, const GrayImage& moving,
                           const RoiBox& roi, const sift::SiftConfig& cfg) {
  if (!fixed.same_dims(moving))
    throw InvalidArgument("register_level: dimension mismatch");
  const IntRect rect = roi_rect(roi, fixed.width(), fixed.height());
  const GrayImage fixed_crop = crop(fixed, rect);

  LevelResult result;
  std::vector<sift::Match> matches;
  std::vector<sift::Feature> feats_fixed, feats_moving;
  bool detect_failed = false;
  try {
    feats_fixed = sift::detect_and_describe(fixed, roi, cfg);
    feats_moving = sift::detect_and_describe(moving, roi, cfg);
    matches = sift::match_features(feats_fixed, feats_moving);
  } catch (const RoiTooSmallError&) {
    detect_failed = true;
  }

  // Candidate transforms: the identity is always hypothesis zero.
  std::vector<RigidTransform2D> candidates;
  candidates.push_back(RigidTransform2D::identity());

  const int m = static_cast<int>(matches.size());
  if (!detect_failed && m >= 3) {
    const double ox = rect.x, oy = rect.y;
    for (int i = 0; i < m - 2; ++i) {
      for (int j = i + 1; j < m - 1; ++j) {
        for (int k = j + 1; k < m; ++k) {
          std::vector<Point2d> src(3), dst(3);
          const int sel[3] = {i, j, k};
          for (int t = 0; t < 3; ++t) {
            const sift::Keypoint& kf = feats_fixed[matches[sel[t]].index_a].first;
            const sift::Keypoint& km =
                feats_moving[matches[sel[t]].index_b].first;
            src[t] = {km.x + ox, km.y + oy};
            dst[t] = {kf.x + ox, kf.y + oy};
          }
          if (triangle_area(src[0], src[1], src[2]) < kMinTriangleArea)
            continue;
          candidates.push_back(rigid_from_correspondences(src, dst));
        }
      }
    }
  }

  result.fallback = detect_failed || candidates.size() < 2;
  result.candidate_count = static_cast<int>(candidates.size());
  result.candidates.resize(candidates.size());
  parallel_for(static_cast<std::int64_t>(candidates.size()), [&](std::int64_t i) {
    result.candidates[i] = {candidates[i],
                            score_candidate(fixed_crop, moving, rect,
                                            candidates[i])};
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.candidates.size(); ++i)
    if (result.candidates[i].roi_ssd < result.candidates[best].roi_ssd)
      best = i;
  result.transform = result.candidates[best].transform;
  result.chosen_ssd = result.candidates[best].roi_ssd;
  return result;
}

RigidTransform2D accumulate_level_transform(const RigidTransform2D& acc,
                                            const RigidTransform2D& level_t,
                                            int level) {
  return compose(scale_transform(level_t, static_cast<double>(1 << level)), acc);
}

std::pair<RigidTransform2D, std::vector<LevelResult>> register_pair(
    const GrayImage& fixed, const GrayImage& moving, const RoiBox& roi0,
    int k, const sift::SiftConfig& cfg) {
  if (!fixed.same_dims(moving))
    throw InvalidArgument("register_pair: dimension mismatch");

  const ImagePyramid fixed_pyr = build_pyramid(fixed, k);
  const ImagePyramid moving_pyr = build_pyramid(moving, k);

  RigidTransform2D acc = RigidTransform2D::identity();
  std::vector<LevelResult> levels;
  levels.reserve(k + 1);

  for (int r = k; r >= 0; --r) {
    const GrayImage& fixed_lvl = fixed_pyr.level(r);
    const RoiBox roi_r =
        roi_for_level(roi0, r, fixed_lvl.width(), fixed_lvl.height());
    const RigidTransform2D acc_r =
        scale_transform(acc, 1.0 / static_cast<double>(1 << r));
    const GrayImage moving_warped =
        warp_image(moving_pyr.level(r), acc_r, Interp::bilinear);
    LevelResult lr = register_level(fixed_lvl, moving_warped, roi_r, cfg);
    lr.level = r;
    acc = accumulate_level_transform(acc, lr.transform, r);
    levels.push_back(std::move(lr));
  }
  return {acc, std::move(levels)};
}

StackResult register_stack(const std::vector<GrayImage>& stack,
                           const RoiBox& roi0, const RegistrationConfig& cfg) {
  if (stack.size() < 2)
    throw InvalidArgument("register_stack: need at least 2 slices");

  StackResult result;
  result.chain.roi = roi0;
  result.chain.config = cfg;
  result.chain.cumulative.push_back(RigidTransform2D::identity());
  result.registered.push_back(stack[0]);

  for (std::size_t i = 0; i + 1 < stack.size(); ++i) {
    auto [f_star, levels] = register_pair(result.registered[i], stack[i + 1],
                                          roi0, cfg.levels, cfg.sift);
    result.chain.cumulative.push_back(f_star);
    result.chain.pair_levels.push_back(std::move(levels));
    // Single resampling: each output slice is warped once from its original.
    result.registered.push_back(
        warp_image(stack[i + 1], f_star, Interp::bilinear));
  }
  return result;
}

}  // namespace wsireg::roi_register
