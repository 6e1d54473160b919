#pragma once

#include <cstdint>
#include <vector>

#include "wsireg/image.hpp"
#include "wsireg/roi.hpp"
#include "wsireg/transform.hpp"

namespace wsireg::phantom {

// Synthetic slice-stack spec. Each slice is a textured tissue blob on a
// white field with a dark vessel ring (the lumen interior is the ground
// truth mask), shared anatomy blobs, locally re-warped or erased distractor
// patches far from the vessel, and off-tissue stain blobs, all globally
// perturbed by a per-slice rigid transform.
struct PhantomSpec {
  int slices = 20;
  int dims = 1024;

  double vessel_cx = -1.0;  // < 0 means image center
  double vessel_cy = -1.0;
  double vessel_rx = 90.0;
  double vessel_ry = 70.0;
  double vessel_drift_x = 0.7;  // px per slice
  double vessel_drift_y = 0.4;
  double vessel_intensity = 60.0;

  double texture_amplitude = 35.0;
  double texture_corr = 6.0;  // blur sigma of the noise field

  int distractors = 3;
  double distractor_radius = 110.0;

  double theta_max_deg = 10.0;
  double shift_max = 40.0;

  int artifact_stains = 0;
  double stain_variation = 0.0;  // per-slice multiplicative intensity jitter

  std::uint64_t seed = 1234;
};

struct PhantomStack {
  std::vector<RgbImage> slices;
  std::vector<BinaryMask> lumen_masks;
  std::vector<RigidTransform2D> truth;  // applied perturbation per slice
  std::vector<Point2d> distractor_centers;
};

// Deterministic under spec.seed. Throws InvalidSpecError when the spec
// violates its invariants (vessel outside the image, perturbations beyond
// the default search extents, or distractors that cannot be placed clear of
// the vessel trajectory).
PhantomStack generate(const PhantomSpec& spec);

// Box around the full vessel trajectory, the natural registration target.
RoiBox default_roi(const PhantomSpec& spec);

}  // namespace wsireg::phantom
