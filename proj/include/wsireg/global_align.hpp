#pragma once

#include <vector>

#include "wsireg/image.hpp"
#include "wsireg/mumford_shah.hpp"
#include "wsireg/transform.hpp"

namespace wsireg::global_align {

// Exhaustive rigid search domain. refine_factor > 1 adds one pass of the
// same grid shape centered on the coarse winner with steps divided by the
// factor; 1 runs the coarse pass only.
struct SearchGrid {
  double theta_min = 0.0, theta_max = 0.0, theta_step = 1.0;
  double dx_min = 0.0, dx_max = 0.0, dx_step = 1.0;
  double dy_min = 0.0, dy_max = 0.0, dy_step = 1.0;
  int refine_factor = 6;

  static SearchGrid symmetric(double theta_max, double theta_step,
                              double trans_max, double trans_step,
                              int refine_factor);
};

// sum over pixels of (a - b)^2; dimensions must match.
double ssd(const GrayImage& a, const GrayImage& b);

// SSD between `fixed` and `moving` warped by t (bilinear, white fill),
// without materializing the warped image.
double warp_ssd(const GrayImage& fixed, const GrayImage& moving,
                const RigidTransform2D& t);

// Returns the grid triplet minimizing warp_ssd. Ties break toward the
// smallest |theta|, then |dx|, then |dy|, then enumeration order.
RigidTransform2D grid_search_rigid(const GrayImage& fixed,
                                   const GrayImage& moving,
                                   const SearchGrid& grid);

struct GlobalAlignConfig {
  double theta_max_deg = 30.0;
  double theta_step_deg = 3.0;
  double trans_frac = 0.125;   // search extent as a fraction of width
  int trans_step_div = 64;     // step = max(1, width / div)
  int refine_factor = 6;
  int est_level = 2;           // pyramid level used for estimation
};

struct GlobalAlignResult {
  std::vector<GrayImage> registered;          // I' sequence
  std::vector<RigidTransform2D> pairwise;     // n-1 entries
  std::vector<RigidTransform2D> cumulative;   // n entries, [0] = identity
};

// Chains consecutive slices: each pair transform is estimated between the
// rendered segmentation of the already-registered slice i and the rendered
// segmentation of raw slice i+1, then applied to cleaned slice i+1 with a
// single warp from its original.
GlobalAlignResult align_whole_tissue(const std::vector<GrayImage>& cleaned,
                                     const std::vector<ms::LabelImage>& ms_stack,
                                     const GlobalAlignConfig& cfg);

}  // namespace wsireg::global_align
