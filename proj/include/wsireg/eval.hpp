#pragma once

#include <vector>

#include "wsireg/image.hpp"
#include "wsireg/roi_register.hpp"
#include "wsireg/transform.hpp"

namespace wsireg::eval {

struct PairScore {
  int i = 0;
  int j = 0;
  double similarity = 0.0;
};

struct EvalReport {
  std::vector<PairScore> pairs;
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::vector<std::pair<int, int>> fallback_pairs;
};

// Dice coefficient 2|A n B| / (|A| + |B|) of the foreground sets.
// Throws UndefinedSimilarityError when both masks are empty.
double similarity_index(const BinaryMask& a, const BinaryMask& b);

// Nearest-neighbor warp; masks stay binary, out-of-bounds is background.
BinaryMask warp_mask(const BinaryMask& mask, const RigidTransform2D& t);

// Warps each mask by its cumulative transform and scores every pair of
// slices at distance <= window. Pairs where any cascade level fell back are
// listed separately.
EvalReport evaluate_chain(const std::vector<BinaryMask>& masks,
                          const roi_register::RegistrationChain& chain,
                          int window = 1);

}  // namespace wsireg::eval
