#pragma once

#include <cstdint>
#include <vector>

#include "wsireg/image.hpp"

namespace wsireg::ms {

// Per-pixel phase labels plus the phase intensity means, kept sorted
// ascending so labelings are canonical.
struct LabelImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;
  std::vector<double> phase_means;

  int label(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
};

struct MsConfig {
  int phases = 4;
  double lambda = 500.0;   // boundary penalty, intensity^2 * pixel units
  int sweeps = 20;         // Metropolis sweeps per pyramid level
  double t_start = 1000.0;
  double t_end = 0.1;
  int levels = 3;          // Monte Carlo pyramid depth
  std::uint64_t seed = 0;
};

// Piecewise-constant segmentation energy:
// sum_p (I(p) - c_label(p))^2 + lambda * #(4-neighbor pairs with
// differing labels).
double ms_energy(const GrayImage& img, const LabelImage& lab, double lambda);

// Nearest-mean labeling seeded from uniform quantiles of the intensity
// histogram; the reference point for mc_segment's no-regression guarantee.
LabelImage initial_labeling(const GrayImage& img, int phases);

// Multi-resolution Metropolis optimization of the energy above. Coarsest
// level first; labels are upsampled (nearest) between levels and phase means
// are refit after each level. Never returns a labeling with higher energy
// than initial_labeling. Deterministic under cfg.seed.
LabelImage mc_segment(const GrayImage& img, const MsConfig& cfg);

// Each pixel replaced by its phase mean, rounded.
GrayImage render_ms(const LabelImage& lab);

}  // namespace wsireg::ms
