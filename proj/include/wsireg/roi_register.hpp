#pragma once

#include <vector>

#include "wsireg/image.hpp"
#include "wsireg/roi.hpp"
#include "wsireg/sift.hpp"
#include "wsireg/transform.hpp"

namespace wsireg::roi_register {

struct CandidateScore {
  RigidTransform2D transform;
  double roi_ssd = 0.0;
};

// Outcome of one pyramid level of the cascade. The transform lives in the
// level-r frame. candidate_count covers the 3-match hypotheses plus the
// always-injected identity, so it is at most 57.
struct LevelResult {
  int level = 0;
  RigidTransform2D transform;
  int candidate_count = 0;
  double chosen_ssd = 0.0;
  bool fallback = false;
  std::vector<CandidateScore> candidates;  // diagnostics, enumeration order
};

struct RegistrationConfig {
  int levels = 3;  // coarsest pyramid level k
  sift::SiftConfig sift;
};

// Cumulative per-slice transforms (full-resolution frame) plus per-pair
// level diagnostics. cumulative[0] is the identity; pair i covers slices
// (i, i+1).
struct RegistrationChain {
  std::vector<RigidTransform2D> cumulative;
  std::vector<std::vector<LevelResult>> pair_levels;
  RoiBox roi;
  RegistrationConfig config;
};

// Least-squares rotation + translation mapping src onto dst (no scale).
// Throws on coincident source points.
RigidTransform2D rigid_from_correspondences(const std::vector<Point2d>& src,
                                            const std::vector<Point2d>& dst);

// Detects and matches features in the ROI crops of both images, enumerates
// every non-degenerate 3-subset of the (at most 8) matches plus the identity,
// scores each candidate by SSD inside the ROI window of (fixed, warped
// moving), and returns the minimizer. Falls back to the identity (flagged)
// when fewer than 3 usable matches exist.
LevelResult register_level(const GrayImage& fixed, const GrayImage& moving,
                           const RoiBox& roi, const sift::SiftConfig& cfg);

// Coarse-to-fine cascade over pyramid levels k..0. Returns the composed
// full-resolution transform plus per-level diagnostics.
std::pair<RigidTransform2D, std::vector<LevelResult>> register_pair(
    const GrayImage& fixed, const GrayImage& moving, const RoiBox& roi0,
    int k, const sift::SiftConfig& cfg);

// Folds a level-r transform into the accumulated full-resolution transform:
// scale the level transform by 2^level, then compose it after `acc`.
RigidTransform2D accumulate_level_transform(const RigidTransform2D& acc,
                                            const RigidTransform2D& level_t,
                                            int level);

struct StackResult {
  std::vector<GrayImage> registered;
  RegistrationChain chain;
};

// Chains the cascade down the stack: each raw slice is registered against
// the previously registered slice, and every output slice is produced by a
// single warp of its original under the composed cumulative transform.
StackResult register_stack(const std::vector<GrayImage>& stack,
                           const RoiBox& roi0, const RegistrationConfig& cfg);

inline constexpr double kMinTriangleArea = 2.0;  // px^2, degeneracy cutoff

}  // namespace wsireg::roi_register
