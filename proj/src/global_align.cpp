#include "wsireg/global_align.hpp"

#include <algorithm>
#include <cmath>

#include "wsireg/error.hpp"
#include "wsireg/kernels.hpp"
#include "wsireg/parallel.hpp"
#include "wsireg/pyramid.hpp"

namespace wsireg::global_align {

namespace {

// Index-based so symmetric grids hit 0 exactly (no accumulation drift).
std::vector<double> axis_values(double lo, double hi, double step) {
  std::vector<double> vals;
  for (int i = 0; lo + i * step <= hi + 1e-12; ++i) vals.push_back(lo + i * step);
  if (vals.empty()) vals.push_back(lo);
  return vals;
}

struct Node {
  double theta, dx, dy;
};

// Deterministic argmin with the smallest-magnitude tie break.
std::size_t argmin_node(const std::vector<double>& ssds,
                        const std::vector<Node>& nodes) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < ssds.size(); ++i) {
    if (ssds[i] < ssds[best]) {
      best = i;
    } else if (ssds[i] == ssds[best]) {
      const Node& a = nodes[i];
      const Node& b = nodes[best];
      const auto key = [](const Node& n) {
        return std::array<double, 3>{std::abs(n.theta), std::abs(n.dx),
                                     std::abs(n.dy)};
      };
      if (key(a) < key(b)) best = i;
    }
  }
  return best;
}

std::pair<Node, double> search_nodes(const GrayImage& fixed,
                                     const GrayImage& moving,
                                     const std::vector<Node>& nodes) {
  std::vector<double> ssds(nodes.size());
  parallel_for(static_cast<std::int64_t>(nodes.size()), [&](std::int64_t i) {
    const Node& n = nodes[i];
    ssds[i] = warp_ssd(fixed, moving, {n.theta, n.dx, n.dy});
  });
  const std::size_t best = argmin_node(ssds, nodes);
  return {nodes[best], ssds[best]};
}

}  // namespace

SearchGrid SearchGrid::symmetric(double theta_max, double theta_step,
                                 double trans_max, double trans_step,
                                 int refine_factor) {
  SearchGrid g;
  g.theta_min = -theta_max;
  g.theta_max = theta_max;
  g.theta_step = theta_step;
  g.dx_min = -trans_max;
  g.dx_max = trans_max;
  g.dx_step = trans_step;
  g.dy_min = -trans_max;
  g.dy_max = trans_max;
  g.dy_step = trans_step;
  g.refine_factor = refine_factor;
  return g;
}

double ssd(const GrayImage& a, const GrayImage& b) {
  if (!a.same_dims(b)) throw InvalidArgument("ssd: dimension mismatch");
  return kernels::sum_sq_diff(a.data(), b.data(), a.size());
}

double warp_ssd(const GrayImage& fixed, const GrayImage& moving,
                const RigidTransform2D& t) {
  const auto m = inverse(t).matrix();
  const int w = fixed.width(), h = fixed.height();
  double acc = 0.0;
  for (int y = 0; y < h; ++y) {
    acc += kernels::warp_ssd_row(fixed.row(y), w, moving.data(),
                                 moving.width(), moving.height(),
                                 m[1] * y + m[2], m[4] * y + m[5], m[0], m[3],
                                 kBackgroundFill);
  }
  return acc;
}

RigidTransform2D grid_search_rigid(const GrayImage& fixed,
                                   const GrayImage& moving,
                                   const SearchGrid& grid) {
  if (!fixed.same_dims(moving))
    throw InvalidArgument("grid_search_rigid: dimension mismatch");
  if (!(grid.theta_step > 0 && grid.dx_step > 0 && grid.dy_step > 0))
    throw InvalidArgument("grid_search_rigid: steps must be > 0");
  if (grid.theta_min > grid.theta_max || grid.dx_min > grid.dx_max ||
      grid.dy_min > grid.dy_max)
    throw InvalidArgument("grid_search_rigid: min must be <= max");

  const auto thetas = axis_values(grid.theta_min, grid.theta_max, grid.theta_step);
  const auto dxs = axis_values(grid.dx_min, grid.dx_max, grid.dx_step);
  const auto dys = axis_values(grid.dy_min, grid.dy_max, grid.dy_step);

  std::vector<Node> nodes;
  nodes.reserve(thetas.size() * dxs.size() * dys.size());
  for (double th : thetas)
    for (double dx : dxs)
      for (double dy : dys) nodes.push_back({th, dx, dy});

  auto [coarse, coarse_ssd] = search_nodes(fixed, moving, nodes);
  if (grid.refine_factor <= 1)
    return {coarse.theta, coarse.dx, coarse.dy};

  // Same grid shape centered on the winner, steps divided by the factor.
  const double tc = (grid.theta_min + grid.theta_max) / 2;
  const double xc = (grid.dx_min + grid.dx_max) / 2;
  const double yc = (grid.dy_min + grid.dy_max) / 2;
  std::vector<Node> refined;
  refined.reserve(nodes.size());
  for (double th : thetas)
    for (double dx : dxs)
      for (double dy : dys)
        refined.push_back({coarse.theta + (th - tc) / grid.refine_factor,
                           coarse.dx + (dx - xc) / grid.refine_factor,
                           coarse.dy + (dy - yc) / grid.refine_factor});

  auto [fine, fine_ssd] = search_nodes(fixed, moving, refined);
  if (fine_ssd < coarse_ssd) return {fine.theta, fine.dx, fine.dy};
  return {coarse.theta, coarse.dx, coarse.dy};
}

GlobalAlignResult align_whole_tissue(const std::vector<GrayImage>& cleaned,
                                     const std::vector<ms::LabelImage>& ms_stack,
                                     const GlobalAlignConfig& cfg) {
  if (cleaned.empty() || cleaned.size() != ms_stack.size())
    throw InvalidArgument("align_whole_tissue: stack length mismatch");

  GlobalAlignResult result;
  result.registered.reserve(cleaned.size());
  result.registered.push_back(cleaned[0]);
  result.cumulative.push_back(RigidTransform2D::identity());

  const double deg = M_PI / 180.0;
  for (std::size_t i = 0; i + 1 < cleaned.size(); ++i) {
    // Rendered segmentation of the already-registered slice i.
    GrayImage fixed_ms =
        warp_image(ms::render_ms(ms_stack[i]), result.cumulative[i],
                   Interp::bilinear);
    GrayImage moving_ms = ms::render_ms(ms_stack[i + 1]);
    for (int lvl = 0; lvl < cfg.est_level; ++lvl) {
      fixed_ms = downsample_half(fixed_ms);
      moving_ms = downsample_half(moving_ms);
    }
    const double trans_step =
        std::max(1.0, static_cast<double>(fixed_ms.width()) / cfg.trans_step_div);
    // Snap the extent to a step multiple so 0 is always a grid node.
    const double trans_max =
        trans_step * std::floor(cfg.trans_frac * fixed_ms.width() / trans_step);
    const double theta_step = cfg.theta_step_deg * deg;
    const double theta_max =
        theta_step * std::floor(cfg.theta_max_deg / cfg.theta_step_deg + 1e-12);
    const SearchGrid grid = SearchGrid::symmetric(theta_max, theta_step,
                                                  trans_max, trans_step,
                                                  cfg.refine_factor);

    const RigidTransform2D est = grid_search_rigid(fixed_ms, moving_ms, grid);
    const RigidTransform2D cum =
        scale_transform(est, static_cast<double>(1 << cfg.est_level));
    result.cumulative.push_back(cum);
    result.pairwise.push_back(compose(cum, inverse(result.cumulative[i])));
    result.registered.push_back(
        warp_image(cleaned[i + 1], cum, Interp::bilinear));
  }
  return result;
}

}  // namespace wsireg::global_align
