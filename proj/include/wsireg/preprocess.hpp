#pragma once

#include <vector>

#include "wsireg/image.hpp"
#include "wsireg/transform.hpp"

namespace wsireg::preprocess {

// Closed boundary of one connected foreground component. Area and centroid
// come from the component's pixels, points trace its outer boundary.
struct Contour {
  std::vector<Point2d> points;
  double area = 0.0;  // pixel count
  Point2d centroid;
};

struct CleanConfig {
  double blur_sigma = 10.0;
  int morph_radius = 20;
  double keep_score_ratio = 0.25;
};

// 0.299 R + 0.587 G + 0.114 B, rounded to nearest.
GrayImage to_grayscale(const RgbImage& rgb);

// Separable convolution, kernel truncated at radius ceil(3*sigma) and
// normalized to sum 1; borders use edge replication.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

// Foreground = strictly below the image mean (tissue is darker than glass).
BinaryMask threshold_mean(const GrayImage& img);

// Closing then opening with a discrete disk {(dx,dy): dx^2+dy^2 <= r^2}.
BinaryMask morph_close_open(const BinaryMask& mask, int radius);
BinaryMask dilate_disk(const BinaryMask& mask, int radius);
BinaryMask erode_disk(const BinaryMask& mask, int radius);

// One contour per 8-connected foreground component.
std::vector<Contour> find_contours(const BinaryMask& mask);

// Scores each contour by area / (1 + centroid distance to image center) and
// keeps every contour scoring at least keep_ratio of the best.
std::vector<Contour> select_tissue_contours(const std::vector<Contour>& contours,
                                            int img_w, int img_h,
                                            double keep_ratio = 0.25);

// Convex hull (counterclockwise) of a point set.
std::vector<Point2d> convex_hull(std::vector<Point2d> points);

// True if the pixel center (x, y) lies inside or on the hull.
bool hull_contains(const std::vector<Point2d>& hull, double x, double y);

// Blur -> mean threshold -> close/open -> contour selection -> convex hull;
// pixels outside the hull become 255, pixels inside keep the original
// (unblurred) intensities. Throws BlankSlideError when nothing is found.
GrayImage clean_tissue(const GrayImage& img, const CleanConfig& cfg = {});

}  // namespace wsireg::preprocess
