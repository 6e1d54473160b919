#pragma once

#include <array>
#include <vector>

#include "wsireg/image.hpp"
#include "wsireg/roi.hpp"

namespace wsireg::sift {

struct Keypoint {
  double x = 0.0;          // ROI-frame coordinates, subpixel
  double y = 0.0;
  double scale = 0.0;      // pixels, ROI frame
  double orientation = 0.0;  // radians in [0, 2pi)
  double response = 0.0;   // contrast magnitude at the refined extremum
};

// 128 gradient-histogram values (4x4 cells x 8 orientation bins), unit
// normalized with 0.2 clamping, plus two appended spatial terms
// beta * (x / roi_width) and beta * (y / roi_height).
struct Descriptor {
  std::array<float, 130> v{};

  float* gradient() { return v.data(); }
  const float* gradient() const { return v.data(); }
  float sx() const { return v[128]; }
  float sy() const { return v[129]; }
};

struct Match {
  int index_a = 0;
  int index_b = 0;
  double distance = 0.0;  // Euclidean, over augmented descriptors
};

struct SiftConfig {
  int layers_per_octave = 10;
  double sigma0 = 1.6;
  double contrast_threshold = 0.04;  // divided by layers_per_octave
  double edge_ratio = 10.0;
  double beta = 0.5;  // spatial augmentation weight; 0 recovers plain SIFT
};

using Feature = std::pair<Keypoint, Descriptor>;

// Standard difference-of-Gaussians detector restricted to the ROI crop:
// Gaussian scale space from sigma0 with octaves until the min dimension
// drops below 16, 3x3x3 extrema with subpixel quadratic refinement,
// contrast and edge-response gating, 36-bin dominant orientation (peaks at
// >= 80% of the max spawn duplicates), then the 4x4x8 descriptor with
// spatial augmentation. Output is deterministically ordered by response,
// then y, then x. Throws RoiTooSmallError below 16x16.
std::vector<Feature> detect_and_describe(const GrayImage& img,
                                         const RoiBox& roi,
                                         const SiftConfig& cfg = {});

// Nearest/second-nearest ratio test at 0.75, greedy one-to-one assignment in
// ascending distance, sorted ascending and truncated to the top 8.
std::vector<Match> match_features(const std::vector<Feature>& a,
                                  const std::vector<Feature>& b);

inline constexpr int kMaxMatches = 8;
inline constexpr double kRatioThreshold = 0.75;

}  // namespace wsireg::sift
