#include "wsireg/sift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wsireg/error.hpp"
#include "wsireg/kernels.hpp"

namespace wsireg::sift {

namespace {

constexpr int kBorder = 5;
constexpr int kMinRoiDim = 16;
constexpr int kMaxInterpSteps = 5;
constexpr int kOriBins = 36;
constexpr double kOriSigmaFactor = 1.5;
constexpr double kOriPeakRatio = 0.8;
constexpr int kDescWidth = 4;    // 4x4 spatial cells
constexpr int kDescBins = 8;     // orientation bins per cell
constexpr double kDescSigmaFactor = 3.0;
constexpr double kDescMagThreshold = 0.2;
constexpr double kAssumedInputSigma = 0.5;
constexpr double kTwoPi = 2.0 * M_PI;

// Scale-space layers stay in double so constant intensity shifts cancel
// exactly in the differences; keypoint decisions are then stable against
// brightness offsets.
struct Dimg {
  int w = 0;
  int h = 0;
  std::vector<double> v;

  Dimg() = default;
  Dimg(int w_, int h_) : w(w_), h(h_), v(static_cast<std::size_t>(w_) * h_) {}
  double at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
  double& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
};

Dimg crop_normalized(const GrayImage& img, const IntRect& r) {
  Dimg out(r.w, r.h);
  for (int y = 0; y < r.h; ++y) {
    const float* src = img.row(r.y + y) + r.x;
    for (int x = 0; x < r.w; ++x)
      out.at(x, y) = static_cast<double>(src[x]) * (1.0 / 255.0);
  }
  return out;
}

// Separable Gaussian with edge replication, kernel truncated at 3 sigma.
Dimg blur(const Dimg& img, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  const int taps = 2 * radius + 1;
  std::vector<double> k(taps);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;

  Dimg tmp(img.w, img.h);
  std::vector<double> padded(static_cast<std::size_t>(img.w) + taps - 1);
  for (int y = 0; y < img.h; ++y) {
    for (int i = 0; i < img.w + taps - 1; ++i)
      padded[i] = img.at(std::clamp(i - radius, 0, img.w - 1), y);
    kernels::convolve_row(padded.data(),
                          tmp.v.data() + static_cast<std::size_t>(y) * img.w,
                          img.w, k.data(), taps);
  }
  Dimg out(img.w, img.h);
  for (int y = 0; y < img.h; ++y) {
    double* dst = out.v.data() + static_cast<std::size_t>(y) * img.w;
    for (int j = 0; j < taps; ++j) {
      const int sy = std::clamp(y + j - radius, 0, img.h - 1);
      kernels::axpy(k[j], tmp.v.data() + static_cast<std::size_t>(sy) * img.w,
                    dst, img.w);
    }
  }
  return out;
}

Dimg decimate(const Dimg& img) {
  Dimg out(std::max(1, img.w / 2), std::max(1, img.h / 2));
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) out.at(x, y) = img.at(2 * x, 2 * y);
  return out;
}

Dimg subtract(const Dimg& a, const Dimg& b) {
  Dimg out(a.w, a.h);
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] - b.v[i];
  return out;
}

struct OctaveKeypoint {
  int octave = 0;
  int layer = 0;
  double x = 0.0, y = 0.0;   // octave frame, subpixel
  double sigma_oct = 0.0;    // scale relative to the octave image
  double response = 0.0;
  double orientation = 0.0;
};

// Quadratic refinement of a DoG extremum. Returns false when the point
// drifts out of bounds or fails the contrast test.
bool adjust_extremum(const std::vector<Dimg>& dog, int layers, int& layer,
                     int& x, int& y, double& ox, double& oy, double& os,
                     double& response, double contrast_thr) {
  const int w = dog[0].w, h = dog[0].h;
  double xi = 0.0, xr = 0.0, xc = 0.0;
  for (int step = 0;; ++step) {
    if (step >= kMaxInterpSteps) return false;
    const Dimg& d0 = dog[layer - 1];
    const Dimg& d1 = dog[layer];
    const Dimg& d2 = dog[layer + 1];

    const double dx = (d1.at(x + 1, y) - d1.at(x - 1, y)) * 0.5;
    const double dy = (d1.at(x, y + 1) - d1.at(x, y - 1)) * 0.5;
    const double ds = (d2.at(x, y) - d0.at(x, y)) * 0.5;
    const double v = d1.at(x, y);
    const double dxx = d1.at(x + 1, y) + d1.at(x - 1, y) - 2 * v;
    const double dyy = d1.at(x, y + 1) + d1.at(x, y - 1) - 2 * v;
    const double dss = d2.at(x, y) + d0.at(x, y) - 2 * v;
    const double dxy = (d1.at(x + 1, y + 1) - d1.at(x - 1, y + 1) -
                        d1.at(x + 1, y - 1) + d1.at(x - 1, y - 1)) * 0.25;
    const double dxs = (d2.at(x + 1, y) - d2.at(x - 1, y) - d0.at(x + 1, y) +
                        d0.at(x - 1, y)) * 0.25;
    const double dys = (d2.at(x, y + 1) - d2.at(x, y - 1) - d0.at(x, y + 1) +
                        d0.at(x, y - 1)) * 0.25;

    // Solve H * delta = -g (3x3 Cramer).
    const double det = dxx * (dyy * dss - dys * dys) -
                       dxy * (dxy * dss - dys * dxs) +
                       dxs * (dxy * dys - dyy * dxs);
    if (std::abs(det) < 1e-30) return false;
    const double inv = 1.0 / det;
    xc = -inv * (dx * (dyy * dss - dys * dys) - dy * (dxy * dss - dys * dxs) +
                 ds * (dxy * dys - dyy * dxs));
    xr = -inv * (dxx * (dy * dss - ds * dys) - dxy * (dx * dss - ds * dxs) +
                 dxs * (dx * dys - dy * dxs));
    xi = -inv * (dxx * (dyy * ds - dys * dy) - dxy * (dxy * ds - dys * dx) +
                 dxs * (dxy * dy - dyy * dx));

    if (std::abs(xc) < 0.5 && std::abs(xr) < 0.5 && std::abs(xi) < 0.5) break;
    x += static_cast<int>(std::lround(xc));
    y += static_cast<int>(std::lround(xr));
    layer += static_cast<int>(std::lround(xi));
    if (layer < 1 || layer > layers || x < kBorder || x >= w - kBorder ||
        y < kBorder || y >= h - kBorder)
      return false;
  }

  const Dimg& d1 = dog[layer];
  const double dx = (d1.at(x + 1, y) - d1.at(x - 1, y)) * 0.5;
  const double dy = (d1.at(x, y + 1) - d1.at(x, y - 1)) * 0.5;
  const double ds = (dog[layer + 1].at(x, y) - dog[layer - 1].at(x, y)) * 0.5;
  const double contr = d1.at(x, y) + 0.5 * (dx * xc + dy * xr + ds * xi);
  if (std::abs(contr) < contrast_thr) return false;

  ox = x + xc;
  oy = y + xr;
  os = xi;
  response = std::abs(contr);
  return true;
}

bool passes_edge_test(const Dimg& d, int x, int y, double edge_ratio) {
  const double v = d.at(x, y);
  const double dxx = d.at(x + 1, y) + d.at(x - 1, y) - 2 * v;
  const double dyy = d.at(x, y + 1) + d.at(x, y - 1) - 2 * v;
  const double dxy = (d.at(x + 1, y + 1) - d.at(x - 1, y + 1) -
                      d.at(x + 1, y - 1) + d.at(x - 1, y - 1)) * 0.25;
  const double tr = dxx + dyy;
  const double det = dxx * dyy - dxy * dxy;
  if (det <= 0) return false;
  return tr * tr * edge_ratio < (edge_ratio + 1) * (edge_ratio + 1) * det;
}

// Dominant gradient orientations from a smoothed 36-bin weighted histogram:
// peaks at >= 80% of the maximum, with parabolic bin interpolation.
std::vector<double> dominant_orientations(const Dimg& img, double x, double y,
                                          double sigma_oct) {
  const double sig = kOriSigmaFactor * sigma_oct;
  const int radius = static_cast<int>(std::lround(3.0 * sig));
  const double wexp = -1.0 / (2.0 * sig * sig);
  const int cx = static_cast<int>(std::lround(x));
  const int cy = static_cast<int>(std::lround(y));

  std::array<double, kOriBins> hist{};
  for (int dy = -radius; dy <= radius; ++dy) {
    const int py = cy + dy;
    if (py < 1 || py >= img.h - 1) continue;
    for (int dx = -radius; dx <= radius; ++dx) {
      const int px = cx + dx;
      if (px < 1 || px >= img.w - 1) continue;
      const double gx = img.at(px + 1, py) - img.at(px - 1, py);
      const double gy = img.at(px, py + 1) - img.at(px, py - 1);
      const double mag = std::sqrt(gx * gx + gy * gy);
      double ang = std::atan2(gy, gx);
      if (ang < 0) ang += kTwoPi;
      const double weight = std::exp(wexp * (dx * dx + dy * dy));
      int bin = static_cast<int>(ang / kTwoPi * kOriBins);
      if (bin >= kOriBins) bin = kOriBins - 1;
      hist[bin] += weight * mag;
    }
  }

  std::array<double, kOriBins> smooth{};
  for (int i = 0; i < kOriBins; ++i) {
    const auto at = [&](int j) { return hist[(j + kOriBins) % kOriBins]; };
    smooth[i] = (at(i - 2) + at(i + 2)) * (1.0 / 16.0) +
                (at(i - 1) + at(i + 1)) * (4.0 / 16.0) + at(i) * (6.0 / 16.0);
  }

  const double peak = *std::max_element(smooth.begin(), smooth.end());
  std::vector<double> out;
  if (peak <= 0.0) return out;
  for (int i = 0; i < kOriBins; ++i) {
    const double l = smooth[(i + kOriBins - 1) % kOriBins];
    const double r = smooth[(i + 1) % kOriBins];
    if (smooth[i] > l && smooth[i] > r && smooth[i] >= kOriPeakRatio * peak) {
      double bin = i + 0.5 * (l - r) / (l - 2 * smooth[i] + r);
      if (bin < 0) bin += kOriBins;
      if (bin >= kOriBins) bin -= kOriBins;
      out.push_back(bin * kTwoPi / kOriBins);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::array<float, 128> compute_descriptor(const Dimg& img, double x, double y,
                                          double sigma_oct, double angle) {
  constexpr int d = kDescWidth, n = kDescBins;
  const double cos_a = std::cos(-angle);
  const double sin_a = std::sin(-angle);
  const double bins_per_rad = n / kTwoPi;
  const double hist_width = kDescSigmaFactor * sigma_oct;
  const double exp_scale = -1.0 / (d * d * 0.5);
  int radius = static_cast<int>(
      std::lround(hist_width * std::sqrt(2.0) * (d + 1) * 0.5));
  radius = std::min(radius,
                    static_cast<int>(std::sqrt(static_cast<double>(img.w) * img.w +
                                               static_cast<double>(img.h) * img.h)));
  const int cx = static_cast<int>(std::lround(x));
  const int cy = static_cast<int>(std::lround(y));

  // (d+2)^2 x (n+2) scatter buffer; orientation wraps, borders are dropped.
  std::array<double, (d + 2) * (d + 2) * (n + 2)> buf{};
  const auto idx3 = [&](int r, int c, int o) {
    return (r * (d + 2) + c) * (n + 2) + o;
  };

  for (int dy = -radius; dy <= radius; ++dy) {
    const int py = cy + dy;
    if (py < 1 || py >= img.h - 1) continue;
    for (int dx = -radius; dx <= radius; ++dx) {
      const int px = cx + dx;
      if (px < 1 || px >= img.w - 1) continue;
      const double rx = dx + (cx - x);
      const double ry = dy + (cy - y);
      const double rot_x = (cos_a * rx - sin_a * ry) / hist_width;
      const double rot_y = (sin_a * rx + cos_a * ry) / hist_width;
      const double rbin = rot_y + d / 2 - 0.5;
      const double cbin = rot_x + d / 2 - 0.5;
      if (rbin <= -1 || rbin >= d || cbin <= -1 || cbin >= d) continue;

      const double gx = img.at(px + 1, py) - img.at(px - 1, py);
      const double gy = img.at(px, py + 1) - img.at(px, py - 1);
      const double mag = std::sqrt(gx * gx + gy * gy);
      double ang = std::atan2(gy, gx);
      if (ang < 0) ang += kTwoPi;
      const double obin = (ang - angle) * bins_per_rad;
      const double weight =
          std::exp(exp_scale * (rot_x * rot_x + rot_y * rot_y)) * mag;

      int r0 = static_cast<int>(std::floor(rbin));
      int c0 = static_cast<int>(std::floor(cbin));
      int o0 = static_cast<int>(std::floor(obin));
      const double fr = rbin - r0;
      const double fc = cbin - c0;
      const double fo = obin - o0;
      o0 = ((o0 % n) + n) % n;

      for (int ir = 0; ir < 2; ++ir) {
        const int rr = r0 + ir + 1;
        if (rr < 0 || rr >= d + 2) continue;
        const double wr = weight * (ir ? fr : 1 - fr);
        for (int ic = 0; ic < 2; ++ic) {
          const int cc = c0 + ic + 1;
          if (cc < 0 || cc >= d + 2) continue;
          const double wc = wr * (ic ? fc : 1 - fc);
          for (int io = 0; io < 2; ++io) {
            const int oo = (o0 + io) % n;
            buf[idx3(rr, cc, oo)] += wc * (io ? fo : 1 - fo);
          }
        }
      }
    }
  }

  std::array<float, 128> desc{};
  int k = 0;
  for (int r = 1; r <= d; ++r)
    for (int c = 1; c <= d; ++c)
      for (int o = 0; o < n; ++o)
        desc[k++] = static_cast<float>(buf[idx3(r, c, o)]);

  // Normalize, clamp, renormalize.
  double norm = 0.0;
  for (float v : desc) norm += static_cast<double>(v) * v;
  norm = std::sqrt(norm);
  if (norm > 1e-12) {
    const double thr = norm * kDescMagThreshold;
    double norm2 = 0.0;
    for (float& v : desc) {
      if (v > thr) v = static_cast<float>(thr);
      norm2 += static_cast<double>(v) * v;
    }
    norm2 = std::sqrt(norm2);
    if (norm2 > 1e-12)
      for (float& v : desc) v = static_cast<float>(v / norm2);
  }
  return desc;
}

}  // namespace

std::vector<Feature> detect_and_describe(const GrayImage& img,
                                         const RoiBox& roi,
                                         const SiftConfig& cfg) {
  if (cfg.layers_per_octave < 3)
    throw InvalidArgument("detect_and_describe: layers_per_octave must be >= 3");
  const IntRect rect = roi_rect(roi, img.width(), img.height());
  if (rect.w < kMinRoiDim || rect.h < kMinRoiDim)
    throw RoiTooSmallError("ROI smaller than 16x16");

  const int S = cfg.layers_per_octave;
  const double contrast_thr = cfg.contrast_threshold / S;
  const double prefilter_thr = 0.5 * contrast_thr;

  Dimg base = crop_normalized(img, rect);
  const int n_octaves =
      1 + static_cast<int>(std::floor(
              std::log2(static_cast<double>(std::min(rect.w, rect.h)) /
                        kMinRoiDim)));

  // First blur lifts the assumed input smoothing up to sigma0.
  base = blur(base, std::sqrt(std::max(
                  cfg.sigma0 * cfg.sigma0 - kAssumedInputSigma * kAssumedInputSigma,
                  0.01)));

  std::vector<double> inc_sigma(S + 3, 0.0);
  for (int i = 1; i < S + 3; ++i) {
    const double prev = cfg.sigma0 * std::pow(2.0, static_cast<double>(i - 1) / S);
    const double cur = cfg.sigma0 * std::pow(2.0, static_cast<double>(i) / S);
    inc_sigma[i] = std::sqrt(cur * cur - prev * prev);
  }

  std::vector<OctaveKeypoint> kps;
  std::vector<std::vector<Dimg>> gss_per_octave(n_octaves);

  Dimg octave_base = std::move(base);
  for (int o = 0; o < n_octaves; ++o) {
    std::vector<Dimg>& gss = gss_per_octave[o];
    gss.reserve(S + 3);
    gss.push_back(std::move(octave_base));
    for (int i = 1; i < S + 3; ++i) gss.push_back(blur(gss[i - 1], inc_sigma[i]));
    if (o + 1 < n_octaves) octave_base = decimate(gss[S]);

    std::vector<Dimg> dog;
    dog.reserve(S + 2);
    for (int i = 0; i < S + 2; ++i) dog.push_back(subtract(gss[i + 1], gss[i]));

    const int w = dog[0].w, h = dog[0].h;
    for (int layer = 1; layer <= S; ++layer) {
      const Dimg& d0 = dog[layer - 1];
      const Dimg& d1 = dog[layer];
      const Dimg& d2 = dog[layer + 1];
      for (int y = kBorder; y < h - kBorder; ++y) {
        for (int x = kBorder; x < w - kBorder; ++x) {
          const double v = d1.at(x, y);
          if (std::abs(v) <= prefilter_thr) continue;
          bool is_max = v > 0, is_min = v < 0;
          for (int ddy = -1; ddy <= 1 && (is_max || is_min); ++ddy) {
            for (int ddx = -1; ddx <= 1; ++ddx) {
              const double a = d0.at(x + ddx, y + ddy);
              const double b = d1.at(x + ddx, y + ddy);
              const double c = d2.at(x + ddx, y + ddy);
              if (is_max &&
                  (v < a || v < c || (!(ddx == 0 && ddy == 0) && v < b)))
                is_max = false;
              if (is_min &&
                  (v > a || v > c || (!(ddx == 0 && ddy == 0) && v > b)))
                is_min = false;
            }
          }
          if (!is_max && !is_min) continue;

          int l = layer, px = x, py = y;
          double ox = 0, oy = 0, os = 0, response = 0;
          if (!adjust_extremum(dog, S, l, px, py, ox, oy, os, response,
                               contrast_thr))
            continue;
          if (!passes_edge_test(dog[l], px, py, cfg.edge_ratio)) continue;

          OctaveKeypoint kp;
          kp.octave = o;
          kp.layer = l;
          kp.x = ox;
          kp.y = oy;
          kp.sigma_oct = cfg.sigma0 * std::pow(2.0, (l + os) / S);
          kp.response = response;

          for (double ang : dominant_orientations(gss[l], ox, oy, kp.sigma_oct)) {
            kp.orientation = ang;
            kps.push_back(kp);
          }
        }
      }
    }
  }

  std::vector<Feature> out;
  out.reserve(kps.size());
  for (const OctaveKeypoint& kp : kps) {
    const double f = static_cast<double>(1 << kp.octave);
    Keypoint pub;
    pub.x = kp.x * f;
    pub.y = kp.y * f;
    pub.scale = kp.sigma_oct * f;
    pub.orientation = kp.orientation;
    pub.response = kp.response;
    if (pub.x < 0 || pub.x > rect.w - 1 || pub.y < 0 || pub.y > rect.h - 1)
      continue;

    Descriptor desc;
    const auto grad = compute_descriptor(gss_per_octave[kp.octave][kp.layer],
                                         kp.x, kp.y, kp.sigma_oct,
                                         kp.orientation);
    std::copy(grad.begin(), grad.end(), desc.v.begin());
    desc.v[128] = static_cast<float>(cfg.beta * (pub.x / rect.w));
    desc.v[129] = static_cast<float>(cfg.beta * (pub.y / rect.h));
    out.push_back({pub, desc});
  }

  std::sort(out.begin(), out.end(), [](const Feature& a, const Feature& b) {
    if (a.first.response != b.first.response)
      return a.first.response > b.first.response;
    if (a.first.y != b.first.y) return a.first.y < b.first.y;
    if (a.first.x != b.first.x) return a.first.x < b.first.x;
    if (a.first.scale != b.first.scale) return a.first.scale < b.first.scale;
    return a.first.orientation < b.first.orientation;
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Feature& a, const Feature& b) {
                          return a.first.x == b.first.x &&
                                 a.first.y == b.first.y &&
                                 a.first.scale == b.first.scale &&
                                 a.first.orientation == b.first.orientation;
                        }),
            out.end());
  return out;
}

std::vector<Match> match_features(const std::vector<Feature>& a,
                                  const std::vector<Feature>& b) {
  std::vector<Match> good;
  if (a.empty() || b.empty()) return good;

  for (std::size_t i = 0; i < a.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    double second = best;
    int best_j = -1;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double d2 = kernels::sum_sq_diff(a[i].second.v.data(),
                                             b[j].second.v.data(), 130);
      if (d2 < best) {
        second = best;
        best = d2;
        best_j = static_cast<int>(j);
      } else if (d2 < second) {
        second = d2;
      }
    }
    const double dist = std::sqrt(best);
    if (b.size() < 2 || dist < kRatioThreshold * std::sqrt(second))
      good.push_back({static_cast<int>(i), best_j, dist});
  }

  std::sort(good.begin(), good.end(), [](const Match& m, const Match& n) {
    if (m.distance != n.distance) return m.distance < n.distance;
    if (m.index_a != n.index_a) return m.index_a < n.index_a;
    return m.index_b < n.index_b;
  });

  // Greedy one-to-one in ascending distance.
  std::vector<char> used_a(std::max<std::size_t>(a.size(), 1), 0);
  std::vector<char> used_b(std::max<std::size_t>(b.size(), 1), 0);
  std::vector<Match> out;
  for (const Match& m : good) {
    if (used_a[m.index_a] || used_b[m.index_b]) continue;
    used_a[m.index_a] = 1;
    used_b[m.index_b] = 1;
    out.push_back(m);
    if (static_cast<int>(out.size()) >= kMaxMatches) break;
  }
  return out;
}

}  // namespace wsireg::sift
