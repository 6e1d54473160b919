#include "wsireg/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "wsireg/error.hpp"
#include "wsireg/kernels.hpp"

namespace wsireg::preprocess {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> gaussian_kernel(double sigma, int& radius) {
  radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

// 1D squared-distance transform (lower envelope of parabolas).
void dt1d(const double* f, double* d, int n, int* v, double* z) {
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s;
    for (;;) {
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
      if (s <= z[k] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

// Exact squared Euclidean distance to the nearest seed pixel.
std::vector<double> squared_edt(const BinaryMask& seeds) {
  const int w = seeds.width(), h = seeds.height();
  std::vector<double> g(static_cast<std::size_t>(w) * h);
  // Column pass: 1D distance along y.
  for (int x = 0; x < w; ++x) {
    double dist = kInf;
    for (int y = 0; y < h; ++y) {
      dist = seeds.get(x, y) ? 0.0 : dist + 1.0;
      g[static_cast<std::size_t>(y) * w + x] = dist;
    }
    dist = kInf;
    for (int y = h - 1; y >= 0; --y) {
      dist = seeds.get(x, y) ? 0.0 : dist + 1.0;
      double& cell = g[static_cast<std::size_t>(y) * w + x];
      cell = std::min(cell, dist);
    }
  }
  // Columns without any seed get a large finite value so the parabola
  // envelope arithmetic stays NaN-free.
  for (double& v : g) v = (v == kInf) ? 1e15 : v * v;
  // Row pass: parabola envelope over the squared column distances.
  std::vector<double> out(g.size());
  std::vector<double> f(w), d(w), z(w + 1);
  std::vector<int> vbuf(w);
  for (int y = 0; y < h; ++y) {
    const double* row = g.data() + static_cast<std::size_t>(y) * w;
    std::copy(row, row + w, f.begin());
    dt1d(f.data(), d.data(), w, vbuf.data(), z.data());
    std::copy(d.begin(), d.end(), out.begin() + static_cast<std::size_t>(y) * w);
  }
  return out;
}

bool any_set(const BinaryMask& m) {
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.get(x, y)) return true;
  return false;
}

// Directions in clockwise order starting East (y grows downward).
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

std::vector<Point2d> trace_boundary(const std::vector<int>& comp, int w, int h,
                                    int id, int sx, int sy, long area) {
  auto in_comp = [&](int x, int y) {
    return x >= 0 && x < w && y >= 0 && y < h &&
           comp[static_cast<std::size_t>(y) * w + x] == id;
  };
  std::vector<Point2d> pts;
  pts.push_back({static_cast<double>(sx), static_cast<double>(sy)});
  int px = sx, py = sy;
  int came = 4;  // pretend we arrived from the west
  int first_move = -1;
  const long guard = 4 * area + 16;
  for (long it = 0; it < guard; ++it) {
    int found = -1;
    for (int s = 1; s <= 8; ++s) {
      const int d = (came + s) % 8;
      if (in_comp(px + kDx[d], py + kDy[d])) {
        found = d;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    px += kDx[found];
    py += kDy[found];
    came = (found + 4) % 8;
    if (first_move < 0) {
      first_move = found;
    } else if (px == sx && py == sy) {
      int next = -1;
      for (int s = 1; s <= 8; ++s) {
        const int d = (came + s) % 8;
        if (in_comp(px + kDx[d], py + kDy[d])) {
          next = d;
          break;
        }
      }
      if (next == first_move || next < 0) break;
    }
    pts.push_back({static_cast<double>(px), static_cast<double>(py)});
  }
  return pts;
}

double cross(const Point2d& o, const Point2d& a, const Point2d& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

GrayImage to_grayscale(const RgbImage& rgb) {
  GrayImage out(rgb.width(), rgb.height());
  for (int y = 0; y < rgb.height(); ++y) {
    float* dst = out.row(y);
    for (int x = 0; x < rgb.width(); ++x) {
      const std::uint8_t* p = rgb.pixel(x, y);
      dst[x] = static_cast<float>(
          std::lround(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]));
    }
  }
  return out;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian_blur: sigma must be > 0");
  int radius = 0;
  const std::vector<double> k = gaussian_kernel(sigma, radius);
  const int taps = 2 * radius + 1;
  const int w = img.width(), h = img.height();

  // Horizontal pass with edge replication, in double.
  std::vector<double> tmp(static_cast<std::size_t>(w) * h);
  std::vector<double> padded(static_cast<std::size_t>(w) + taps - 1);
  for (int y = 0; y < h; ++y) {
    const float* src = img.row(y);
    for (int i = 0; i < w + taps - 1; ++i) {
      const int sx = std::clamp(i - radius, 0, w - 1);
      padded[i] = src[sx];
    }
    kernels::convolve_row(padded.data(), tmp.data() + static_cast<std::size_t>(y) * w,
                          w, k.data(), taps);
  }

  // Vertical pass as a weighted sum of rows.
  GrayImage out(w, h);
  std::vector<double> acc(w);
  for (int y = 0; y < h; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int j = 0; j < taps; ++j) {
      const int sy = std::clamp(y + j - radius, 0, h - 1);
      kernels::axpy(k[j], tmp.data() + static_cast<std::size_t>(sy) * w,
                    acc.data(), w);
    }
    float* dst = out.row(y);
    for (int x = 0; x < w; ++x) dst[x] = static_cast<float>(acc[x]);
  }
  return out;
}

BinaryMask threshold_mean(const GrayImage& img) {
  const double mean = img.mean();
  BinaryMask out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    const float* row = img.row(y);
    for (int x = 0; x < img.width(); ++x) out.set(x, y, row[x] < mean);
  }
  return out;
}

BinaryMask dilate_disk(const BinaryMask& mask, int radius) {
  if (radius < 1) throw InvalidArgument("dilate_disk: radius must be >= 1");
  if (!any_set(mask)) return mask;
  const std::vector<double> d2 = squared_edt(mask);
  const double r2 = static_cast<double>(radius) * radius;
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      out.set(x, y, d2[static_cast<std::size_t>(y) * mask.width() + x] <= r2);
  return out;
}

BinaryMask erode_disk(const BinaryMask& mask, int radius) {
  if (radius < 1) throw InvalidArgument("erode_disk: radius must be >= 1");
  // Outside the image counts as foreground (the usual erosion border
  // convention), so only in-image background seeds erode.
  BinaryMask bg(mask.width(), mask.height());
  bool any = false;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) {
      const bool b = !mask.get(x, y);
      bg.set(x, y, b);
      any = any || b;
    }
  if (!any) return mask;
  const std::vector<double> d2 = squared_edt(bg);
  const double r2 = static_cast<double>(radius) * radius;
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      out.set(x, y, d2[static_cast<std::size_t>(y) * mask.width() + x] > r2);
  return out;
}

BinaryMask morph_close_open(const BinaryMask& mask, int radius) {
  if (radius < 1) throw InvalidArgument("morph_close_open: radius must be >= 1");
  const BinaryMask closed = erode_disk(dilate_disk(mask, radius), radius);
  return dilate_disk(erode_disk(closed, radius), radius);
}

std::vector<Contour> find_contours(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  std::vector<int> comp(static_cast<std::size_t>(w) * h, -1);
  std::vector<Contour> out;
  std::deque<std::pair<int, int>> queue;

  int next_id = 0;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      if (!mask.get(x0, y0) || comp[static_cast<std::size_t>(y0) * w + x0] >= 0)
        continue;
      const int id = next_id++;
      long area = 0;
      double sx = 0.0, sy = 0.0;
      comp[static_cast<std::size_t>(y0) * w + x0] = id;
      queue.push_back({x0, y0});
      while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        ++area;
        sx += x;
        sy += y;
        for (int d = 0; d < 8; ++d) {
          const int nx = x + kDx[d], ny = y + kDy[d];
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          std::size_t idx = static_cast<std::size_t>(ny) * w + nx;
          if (mask.get(nx, ny) && comp[idx] < 0) {
            comp[idx] = id;
            queue.push_back({nx, ny});
          }
        }
      }
      Contour c;
      c.area = static_cast<double>(area);
      c.centroid = {sx / area, sy / area};
      c.points = trace_boundary(comp, w, h, id, x0, y0, area);
      if (c.points.size() < 3) {
        // Tiny component: fall back to its bounding-box corners so the
        // contour is still a closed polygon.
        double minx = x0, maxx = x0, miny = y0, maxy = y0;
        for (const auto& p : c.points) {
          minx = std::min(minx, p.x);
          maxx = std::max(maxx, p.x);
          miny = std::min(miny, p.y);
          maxy = std::max(maxy, p.y);
        }
        c.points = {{minx, miny}, {maxx + 1, miny}, {maxx + 1, maxy + 1},
                    {minx, maxy + 1}};
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<Contour> select_tissue_contours(const std::vector<Contour>& contours,
                                            int img_w, int img_h,
                                            double keep_ratio) {
  if (contours.empty()) return {};
  const double cx = (img_w - 1) / 2.0, cy = (img_h - 1) / 2.0;
  std::vector<double> score(contours.size());
  double best = 0.0;
  for (std::size_t i = 0; i < contours.size(); ++i) {
    const double dist = std::hypot(contours[i].centroid.x - cx,
                                   contours[i].centroid.y - cy);
    score[i] = contours[i].area / (1.0 + dist);
    best = std::max(best, score[i]);
  }
  std::vector<Contour> kept;
  for (std::size_t i = 0; i < contours.size(); ++i)
    if (score[i] >= keep_ratio * best) kept.push_back(contours[i]);
  return kept;
}

std::vector<Point2d> convex_hull(std::vector<Point2d> pts) {
  if (pts.size() < 3) return pts;
  std::sort(pts.begin(), pts.end(), [](const Point2d& a, const Point2d& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point2d& a, const Point2d& b) {
                          return a.x == b.x && a.y == b.y;
                        }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<Point2d> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool hull_contains(const std::vector<Point2d>& hull, double x, double y) {
  if (hull.empty()) return false;
  if (hull.size() == 1) return hull[0].x == x && hull[0].y == y;
  if (hull.size() == 2) {
    const double c = cross(hull[0], hull[1], {x, y});
    if (std::abs(c) > 1e-9) return false;
    return x >= std::min(hull[0].x, hull[1].x) - 1e-9 &&
           x <= std::max(hull[0].x, hull[1].x) + 1e-9 &&
           y >= std::min(hull[0].y, hull[1].y) - 1e-9 &&
           y <= std::max(hull[0].y, hull[1].y) + 1e-9;
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point2d& a = hull[i];
    const Point2d& b = hull[(i + 1) % hull.size()];
    if (cross(a, b, {x, y}) < -1e-9) return false;
  }
  return true;
}

GrayImage clean_tissue(const GrayImage& img, const CleanConfig& cfg) {
  const GrayImage blurred = gaussian_blur(img, cfg.blur_sigma);
  const BinaryMask thresholded = threshold_mean(blurred);
  const BinaryMask opened = morph_close_open(thresholded, cfg.morph_radius);
  const std::vector<Contour> contours = find_contours(opened);
  const std::vector<Contour> selected =
      select_tissue_contours(contours, img.width(), img.height(),
                             cfg.keep_score_ratio);
  if (selected.empty()) throw BlankSlideError("no tissue contour found");

  std::vector<Point2d> pts;
  for (const Contour& c : selected)
    pts.insert(pts.end(), c.points.begin(), c.points.end());
  const std::vector<Point2d> hull = convex_hull(std::move(pts));

  GrayImage out = img;
  const int w = img.width(), h = img.height();
  // Scanline fill: whiten everything outside the hull's row interval.
  for (int y = 0; y < h; ++y) {
    double xmin = kInf, xmax = -kInf;
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const Point2d& a = hull[i];
      const Point2d& b = hull[(i + 1) % hull.size()];
      if (a.y == b.y) {
        if (a.y == y) {
          xmin = std::min({xmin, a.x, b.x});
          xmax = std::max({xmax, a.x, b.x});
        }
        continue;
      }
      if ((a.y - y) * (b.y - y) > 0) continue;
      const double xi = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
      xmin = std::min(xmin, xi);
      xmax = std::max(xmax, xi);
    }
    float* row = out.row(y);
    if (xmin > xmax) {
      std::fill(row, row + w, 255.0f);
      continue;
    }
    const int lo = std::max(0, static_cast<int>(std::ceil(xmin)));
    const int hi = std::min(w - 1, static_cast<int>(std::floor(xmax)));
    for (int x = 0; x < lo; ++x) row[x] = 255.0f;
    for (int x = hi + 1; x < w; ++x) row[x] = 255.0f;
  }
  return out;
}

}  // namespace wsireg::preprocess
