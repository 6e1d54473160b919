#include "wsireg/eval.hpp"

#include <cmath>

#include "wsireg/error.hpp"

namespace wsireg::eval {

double similarity_index(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_dims(b))
    throw InvalidArgument("similarity_index: dimension mismatch");
  std::size_t na = 0, nb = 0, inter = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool fa = a.data()[i] != 0;
    const bool fb = b.data()[i] != 0;
    na += fa;
    nb += fb;
    inter += fa && fb;
  }
  if (na + nb == 0)
    throw UndefinedSimilarityError("similarity_index: both masks empty");
  return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

BinaryMask warp_mask(const BinaryMask& mask, const RigidTransform2D& t) {
  const int w = mask.width(), h = mask.height();
  BinaryMask out(w, h);
  const auto m = inverse(t).matrix();
  for (int y = 0; y < h; ++y) {
    const double bx = m[1] * y + m[2];
    const double by = m[4] * y + m[5];
    for (int x = 0; x < w; ++x) {
      const long sx = std::lround(bx + m[0] * x);
      const long sy = std::lround(by + m[3] * x);
      if (sx >= 0 && sx < w && sy >= 0 && sy < h)
        out.set(x, y, mask.get(static_cast<int>(sx), static_cast<int>(sy)));
    }
  }
  return out;
}

EvalReport evaluate_chain(const std::vector<BinaryMask>& masks,
                          const roi_register::RegistrationChain& chain,
                          int window) {
  if (masks.size() != chain.cumulative.size())
    throw InvalidArgument("evaluate_chain: masks do not align with chain");
  if (window < 1) throw InvalidArgument("evaluate_chain: window must be >= 1");

  const int n = static_cast<int>(masks.size());
  std::vector<BinaryMask> warped;
  warped.reserve(n);
  for (int i = 0; i < n; ++i)
    warped.push_back(warp_mask(masks[i], chain.cumulative[i]));

  EvalReport report;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j <= i + window && j < n; ++j) {
      const double s = similarity_index(warped[i], warped[j]);
      report.pairs.push_back({i, j, s});
      sum += s;
      sum_sq += s * s;
    }
  }
  if (!report.pairs.empty()) {
    const double m = sum / static_cast<double>(report.pairs.size());
    report.mean = m;
    const double var = sum_sq / static_cast<double>(report.pairs.size()) - m * m;
    report.stddev = std::sqrt(var > 0 ? var : 0.0);
  }
  for (std::size_t p = 0; p < chain.pair_levels.size(); ++p) {
    for (const auto& lr : chain.pair_levels[p]) {
      if (lr.fallback) {
        report.fallback_pairs.push_back({static_cast<int>(p),
                                         static_cast<int>(p + 1)});
        break;
      }
    }
  }
  return report;
}

}  // namespace wsireg::eval
