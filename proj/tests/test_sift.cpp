#include <doctest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "wsireg/error.hpp"
#include "wsireg/sift.hpp"
#include "wsireg/transform.hpp"

using namespace wsireg;
using namespace wsireg::sift;
using test_support::textured_image;

namespace {

RoiBox full_roi(const GrayImage& img) {
  return {img.width() / 2.0, img.height() / 2.0,
          static_cast<double>(img.width()), static_cast<double>(img.height())};
}

// Rotation about the image center expressed in the origin frame.
RigidTransform2D rotate_about_center(double theta, double cx, double cy) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {theta, cx - (c * cx - s * cy), cy - (s * cx + c * cy)};
}

}  // namespace

TEST_CASE("constant ROI yields no keypoints") {
  const GrayImage img(128, 128, 120.0f);
  const auto feats = detect_and_describe(img, full_roi(img), {});
  CHECK(feats.empty());
}

TEST_CASE("ROI below 16 px raises") {
  const GrayImage img = textured_image(64, 64, 1);
  CHECK_THROWS_AS(detect_and_describe(img, {32, 32, 12, 40}, {}),
                  RoiTooSmallError);
}

TEST_CASE("detection is deterministic") {
  const GrayImage img = textured_image(160, 160, 2, 2.5);
  const auto a = detect_and_describe(img, full_roi(img), {});
  const auto b = detect_and_describe(img, full_roi(img), {});
  REQUIRE(a.size() == b.size());
  REQUIRE(!a.empty());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].first.x == b[i].first.x);
    CHECK(a[i].first.y == b[i].first.y);
    CHECK(a[i].second.v == b[i].second.v);
  }
  // Ordering: response descending, then y, then x.
  for (std::size_t i = 1; i < a.size(); ++i)
    CHECK(a[i - 1].first.response >= a[i].first.response);
}

TEST_CASE("keypoints stay inside the ROI") {
  const GrayImage img = textured_image(200, 150, 3, 2.0);
  const RoiBox roi{100, 75, 120, 90};
  const auto feats = detect_and_describe(img, roi, {});
  REQUIRE(!feats.empty());
  for (const auto& [kp, desc] : feats) {
    CHECK(kp.x >= 0.0);
    CHECK(kp.y >= 0.0);
    CHECK(kp.x <= 120.0);
    CHECK(kp.y <= 90.0);
    CHECK(kp.scale > 0.0);
  }
}

TEST_CASE("descriptor gradient part is unit length with spatial terms bounded") {
  SiftConfig cfg;
  cfg.beta = 0.5;
  const GrayImage img = textured_image(160, 160, 4, 2.0);
  const auto feats = detect_and_describe(img, full_roi(img), cfg);
  REQUIRE(!feats.empty());
  for (const auto& [kp, desc] : feats) {
    double norm = 0.0;
    for (int i = 0; i < 128; ++i)
      norm += static_cast<double>(desc.v[i]) * desc.v[i];
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(desc.sx() >= 0.0f);
    CHECK(desc.sx() <= cfg.beta);
    CHECK(desc.sy() >= 0.0f);
    CHECK(desc.sy() <= cfg.beta);
  }
}

TEST_CASE("spatial augmentation never changes which keypoints are detected") {
  const GrayImage img = textured_image(128, 128, 5, 2.0);
  SiftConfig with;
  with.beta = 0.5;
  SiftConfig without;
  without.beta = 0.0;
  const auto a = detect_and_describe(img, full_roi(img), with);
  const auto b = detect_and_describe(img, full_roi(img), without);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].first.x == b[i].first.x);
    CHECK(a[i].first.y == b[i].first.y);
    // Gradient parts identical; only the appended terms differ.
    for (int d = 0; d < 128; ++d) CHECK(a[i].second.v[d] == b[i].second.v[d]);
    CHECK(b[i].second.sx() == 0.0f);
    CHECK(b[i].second.sy() == 0.0f);
  }
}

TEST_CASE("descriptors are invariant to a +20 intensity shift") {
  // Integer intensities like a real 8-bit slide, so +20 is exact.
  GrayImage img = textured_image(256, 256, 6, 2.5, 60.0f, 110.0f);
  for (std::size_t i = 0; i < img.size(); ++i)
    img.data()[i] = std::round(img.data()[i]);
  GrayImage shifted = img;
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted.data()[i] += 20.0f;

  const auto a = detect_and_describe(img, full_roi(img), {});
  const auto b = detect_and_describe(shifted, full_roi(shifted), {});
  REQUIRE(!a.empty());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].first.x == doctest::Approx(b[i].first.x).epsilon(1e-6));
    CHECK(a[i].first.y == doctest::Approx(b[i].first.y).epsilon(1e-6));
    for (int d = 0; d < 128; ++d)
      CHECK(std::abs(a[i].second.v[d] - b[i].second.v[d]) <= 1e-3f);
  }
}

TEST_CASE("repeatability under a known 15 degree rotation") {
  const GrayImage img = textured_image(512, 512, 7, 3.0, 80.0f, 130.0f);
  const double theta = 15.0 * M_PI / 180.0;
  const RigidTransform2D rot = rotate_about_center(theta, 255.5, 255.5);
  const GrayImage rotated = warp_image(img, rot, Interp::bilinear);

  const auto fa = detect_and_describe(img, full_roi(img), {});
  const auto fb = detect_and_describe(rotated, full_roi(rotated), {});
  REQUIRE(fa.size() > 50);
  REQUIRE(fb.size() > 50);

  int considered = 0, repeated = 0;
  for (const auto& [kp, desc] : fa) {
    const Point2d mapped = rot.apply({kp.x, kp.y});
    // Only keypoints whose mapped location stays well inside the frame.
    if (mapped.x < 16 || mapped.x > 495 || mapped.y < 16 || mapped.y > 495)
      continue;
    ++considered;
    double best = 1e18;
    for (const auto& [kb, db] : fb) {
      const double d = std::hypot(kb.x - mapped.x, kb.y - mapped.y);
      best = std::min(best, d);
    }
    if (best <= 2.0) ++repeated;
  }
  REQUIRE(considered > 40);
  const double rate = static_cast<double>(repeated) / considered;
  INFO("repeatability: ", rate, " (", repeated, "/", considered, ")");
  CHECK(rate >= 0.6);
}

TEST_CASE("match_features basics") {
  const GrayImage img = textured_image(128, 128, 8, 2.0);
  const auto feats = detect_and_describe(img, full_roi(img), {});
  REQUIRE(!feats.empty());

  SUBCASE("self matching gives zero distances, at most 8") {
    const auto matches = match_features(feats, feats);
    CHECK(matches.size() == std::min<std::size_t>(feats.size(), kMaxMatches));
    for (const auto& m : matches) {
      CHECK(m.index_a == m.index_b);
      CHECK(m.distance == doctest::Approx(0.0).epsilon(1e-9));
    }
  }
  SUBCASE("empty side yields no matches") {
    CHECK(match_features({}, feats).empty());
    CHECK(match_features(feats, {}).empty());
  }
}

TEST_CASE("match_features keeps the 8 smallest of many good pairs") {
  // Synthetic descriptors: 10 well-separated pairs with distinct distances.
  std::vector<Feature> a, b;
  for (int i = 0; i < 10; ++i) {
    Feature fa, fb;
    fa.first = {static_cast<double>(i), 0.0, 1.0, 0.0, 1.0};
    fb.first = fa.first;
    for (int d = 0; d < 130; ++d) fa.second.v[d] = 0.0f;
    fa.second.v[i * 12] = 1.0f;  // orthogonal unit vectors
    fb.second = fa.second;
    fb.second.v[i * 12 + 1] = 0.01f * static_cast<float>(i + 1);
    a.push_back(fa);
    b.push_back(fb);
  }
  const auto matches = match_features(a, b);
  REQUIRE(matches.size() == 8);
  // Exhaustive distance-matrix oracle: the kept matches are the 8 smallest.
  for (std::size_t i = 0; i < matches.size(); ++i) {
    CHECK(matches[i].index_a == static_cast<int>(i));
    CHECK(matches[i].index_b == static_cast<int>(i));
    CHECK(matches[i].distance ==
          doctest::Approx(0.01 * (i + 1)).epsilon(1e-5));
  }
  for (std::size_t i = 1; i < matches.size(); ++i)
    CHECK(matches[i - 1].distance <= matches[i].distance);
}

TEST_CASE("matches are one-to-one on random descriptor sets") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Feature> a(20), b(15);
    for (auto& f : a)
      for (auto& v : f.second.v) v = unit(rng);
    for (auto& f : b)
      for (auto& v : f.second.v) v = unit(rng);
    const auto matches = match_features(a, b);
    CHECK(matches.size() <= 8);
    std::vector<int> seen_a, seen_b;
    for (const auto& m : matches) {
      for (int s : seen_a) CHECK(s != m.index_a);
      for (int s : seen_b) CHECK(s != m.index_b);
      seen_a.push_back(m.index_a);
      seen_b.push_back(m.index_b);
    }
  }
}

TEST_CASE("beta 0 reduces matching to pure appearance") {
  const GrayImage img = textured_image(128, 128, 11, 2.0);
  SiftConfig cfg;
  cfg.beta = 0.0;
  const auto feats = detect_and_describe(img, full_roi(img), cfg);
  REQUIRE(!feats.empty());
  // With beta = 0 the spatial terms vanish, so match distances equal pure
  // 128-d gradient distances.
  const auto matches = match_features(feats, feats);
  for (const auto& m : matches) {
    double d2 = 0.0;
    for (int i = 0; i < 128; ++i) {
      const double d =
          feats[m.index_a].second.v[i] - feats[m.index_b].second.v[i];
      d2 += d * d;
    }
    CHECK(m.distance == doctest::Approx(std::sqrt(d2)).epsilon(1e-9));
  }
}
