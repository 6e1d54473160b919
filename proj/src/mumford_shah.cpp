#include "wsireg/mumford_shah.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "wsireg/error.hpp"
#include "wsireg/pyramid.hpp"

namespace wsireg::ms {

namespace {

std::vector<double> quantile_means(const GrayImage& img, int phases) {
  std::array<std::int64_t, 256> hist{};
  for (std::size_t i = 0; i < img.size(); ++i) {
    int v = static_cast<int>(img.data()[i]);
    hist[std::clamp(v, 0, 255)]++;
  }
  const double total = static_cast<double>(img.size());
  std::vector<double> means(phases);
  for (int p = 0; p < phases; ++p) {
    const double target = (p + 0.5) / phases * total;
    double cum = 0.0;
    int value = 255;
    for (int v = 0; v < 256; ++v) {
      cum += static_cast<double>(hist[v]);
      if (cum >= target) {
        value = v;
        break;
      }
    }
    means[p] = static_cast<double>(value);
  }
  return means;
}

void assign_nearest(const GrayImage& img, const std::vector<double>& means,
                    std::vector<std::uint8_t>& labels) {
  const int P = static_cast<int>(means.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = img.data()[i];
    int best = 0;
    double best_d = std::abs(v - means[0]);
    for (int p = 1; p < P; ++p) {
      const double d = std::abs(v - means[p]);
      if (d < best_d) {
        best_d = d;
        best = p;
      }
    }
    labels[i] = static_cast<std::uint8_t>(best);
  }
}

// Refit each phase mean to the mean intensity of its pixels; empty phases
// keep their previous value.
void update_means(const GrayImage& img, const std::vector<std::uint8_t>& labels,
                  std::vector<double>& means) {
  std::vector<double> sum(means.size(), 0.0);
  std::vector<std::int64_t> cnt(means.size(), 0);
  for (std::size_t i = 0; i < img.size(); ++i) {
    sum[labels[i]] += img.data()[i];
    cnt[labels[i]]++;
  }
  for (std::size_t p = 0; p < means.size(); ++p)
    if (cnt[p] > 0) means[p] = sum[p] / static_cast<double>(cnt[p]);
}

double energy_of(const GrayImage& img, const std::vector<std::uint8_t>& labels,
                 const std::vector<double>& means, double lambda) {
  const int w = img.width(), h = img.height();
  double fid = 0.0;
  std::int64_t pairs = 0;
  for (int y = 0; y < h; ++y) {
    const float* row = img.row(y);
    const std::uint8_t* lab = labels.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const double d = row[x] - means[lab[x]];
      fid += d * d;
      if (x + 1 < w && lab[x] != lab[x + 1]) ++pairs;
      if (y + 1 < h && lab[x] != lab[x + w]) ++pairs;
    }
  }
  return fid + lambda * static_cast<double>(pairs);
}

struct Candidate {
  std::vector<std::uint8_t> labels;
  std::vector<double> means;
  double energy = 0.0;
};

}  // namespace

double ms_energy(const GrayImage& img, const LabelImage& lab, double lambda) {
  if (img.width() != lab.width || img.height() != lab.height)
    throw InvalidArgument("ms_energy: dimension mismatch");
  return energy_of(img, lab.labels, lab.phase_means, lambda);
}

LabelImage initial_labeling(const GrayImage& img, int phases) {
  if (phases < 2) throw InvalidArgument("initial_labeling: phases must be >= 2");
  LabelImage lab;
  lab.width = img.width();
  lab.height = img.height();
  lab.phase_means = quantile_means(img, phases);
  lab.labels.resize(img.size());
  assign_nearest(img, lab.phase_means, lab.labels);
  return lab;
}

GrayImage render_ms(const LabelImage& lab) {
  GrayImage out(lab.width, lab.height);
  std::vector<float> lut(lab.phase_means.size());
  for (std::size_t p = 0; p < lut.size(); ++p)
    lut[p] = static_cast<float>(std::lround(lab.phase_means[p]));
  for (std::size_t i = 0; i < lab.labels.size(); ++i)
    out.data()[i] = lut[lab.labels[i]];
  return out;
}

LabelImage mc_segment(const GrayImage& img, const MsConfig& cfg) {
  if (cfg.phases < 2) throw InvalidArgument("mc_segment: phases must be >= 2");
  if (cfg.lambda < 0) throw InvalidArgument("mc_segment: lambda must be >= 0");
  if (cfg.sweeps < 1) throw InvalidArgument("mc_segment: sweeps must be >= 1");
  if (!(cfg.t_start >= cfg.t_end && cfg.t_end > 0))
    throw InvalidArgument("mc_segment: need t_start >= t_end > 0");

  const int P = cfg.phases;
  // Shrink the pyramid if the image cannot support the configured depth.
  int depth = std::max(1, cfg.levels);
  while (depth > 1 && (std::min(img.width(), img.height()) >> (depth - 1)) < 8)
    --depth;
  const ImagePyramid pyr = build_pyramid(img, depth - 1);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> phase_step(1, P - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<double> means = quantile_means(img, P);

  // Reference labeling at full resolution.
  Candidate init;
  {
    LabelImage ref = initial_labeling(img, P);
    init.means = ref.phase_means;
    init.labels = std::move(ref.labels);
    init.energy = energy_of(img, init.labels, init.means, cfg.lambda);
  }

  std::vector<std::uint8_t> labels;
  Candidate best;
  best.energy = std::numeric_limits<double>::infinity();

  for (int lvl = depth - 1; lvl >= 0; --lvl) {
    const GrayImage& level_img = pyr.level(lvl);
    const int w = level_img.width(), h = level_img.height();

    if (lvl == depth - 1) {
      labels.resize(static_cast<std::size_t>(w) * h);
      assign_nearest(level_img, means, labels);
    } else {
      // Nearest upsample from the coarser level.
      const GrayImage& prev_img = pyr.level(lvl + 1);
      const int pw = prev_img.width(), ph = prev_img.height();
      std::vector<std::uint8_t> up(static_cast<std::size_t>(w) * h);
      for (int y = 0; y < h; ++y) {
        const int sy = std::min(y / 2, ph - 1);
        for (int x = 0; x < w; ++x) {
          const int sx = std::min(x / 2, pw - 1);
          up[static_cast<std::size_t>(y) * w + x] =
              labels[static_cast<std::size_t>(sy) * pw + sx];
        }
      }
      labels = std::move(up);
    }

    double energy = energy_of(level_img, labels, means, cfg.lambda);
    const double t_ratio = cfg.t_end / cfg.t_start;

    for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
      const double frac = cfg.sweeps > 1
                              ? static_cast<double>(sweep) / (cfg.sweeps - 1)
                              : 1.0;
      const double temp = cfg.t_start * std::pow(t_ratio, frac);
      const float* pix = level_img.data();
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const std::size_t idx = static_cast<std::size_t>(y) * w + x;
          const int old_l = labels[idx];
          const int new_l = (old_l + phase_step(rng)) % P;
          const double v = pix[idx];
          const double d_new = v - means[new_l];
          const double d_old = v - means[old_l];
          double delta = d_new * d_new - d_old * d_old;
          int pair_delta = 0;
          if (x > 0) {
            const int q = labels[idx - 1];
            pair_delta += (q != new_l) - (q != old_l);
          }
          if (x + 1 < w) {
            const int q = labels[idx + 1];
            pair_delta += (q != new_l) - (q != old_l);
          }
          if (y > 0) {
            const int q = labels[idx - w];
            pair_delta += (q != new_l) - (q != old_l);
          }
          if (y + 1 < h) {
            const int q = labels[idx + w];
            pair_delta += (q != new_l) - (q != old_l);
          }
          delta += cfg.lambda * pair_delta;
          if (delta <= 0.0 || unif(rng) < std::exp(-delta / temp)) {
            labels[idx] = static_cast<std::uint8_t>(new_l);
            energy += delta;
          }
        }
      }
      if (lvl == 0 && energy < best.energy) {
        best.labels = labels;
        best.means = means;
        best.energy = energy;
      }
    }
    update_means(level_img, labels, means);
  }

  // Final candidate with refit means.
  Candidate final_c;
  final_c.labels = std::move(labels);
  final_c.means = means;
  final_c.energy = energy_of(img, final_c.labels, final_c.means, cfg.lambda);

  const Candidate* pick = &final_c;
  if (best.energy < pick->energy) pick = &best;
  if (init.energy < pick->energy) pick = &init;

  LabelImage out;
  out.width = img.width();
  out.height = img.height();
  out.labels = pick->labels;
  out.phase_means = pick->means;

  // Canonical ordering: phase means ascending.
  std::vector<int> order(P);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return out.phase_means[a] < out.phase_means[b];
  });
  std::vector<int> remap(P);
  std::vector<double> sorted_means(P);
  for (int i = 0; i < P; ++i) {
    remap[order[i]] = i;
    sorted_means[i] = out.phase_means[order[i]];
  }
  for (auto& l : out.labels) l = static_cast<std::uint8_t>(remap[l]);
  out.phase_means = std::move(sorted_means);
  return out;
}

}  // namespace wsireg::ms
