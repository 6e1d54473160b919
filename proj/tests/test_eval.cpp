#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "wsireg/error.hpp"
#include "wsireg/eval.hpp"

using namespace wsireg;
using namespace wsireg::eval;
using test_support::disk_mask;

TEST_CASE("similarity_index formula cases") {
  BinaryMask a(20, 10);
  for (int x = 0; x < 10; ++x)
    for (int y = 0; y < 10; ++y) a.set(x, y, true);

  SUBCASE("identical nonempty masks score 1") {
    CHECK(similarity_index(a, a) == 1.0);
  }
  SUBCASE("disjoint masks score 0") {
    BinaryMask b(20, 10);
    for (int x = 10; x < 20; ++x)
      for (int y = 0; y < 10; ++y) b.set(x, y, true);
    CHECK(similarity_index(a, b) == 0.0);
  }
  SUBCASE("half overlap scores 0.5") {
    // |A| = |B| = 100, |A n B| = 50.
    BinaryMask b(20, 10);
    for (int x = 5; x < 15; ++x)
      for (int y = 0; y < 10; ++y) b.set(x, y, true);
    CHECK(similarity_index(a, b) == 0.5);
  }
  SUBCASE("symmetry") {
    const BinaryMask b = test_support::random_mask(20, 10, 3);
    CHECK(similarity_index(a, b) == similarity_index(b, a));
  }
  SUBCASE("both empty is undefined") {
    CHECK_THROWS_AS(similarity_index(BinaryMask(4, 4), BinaryMask(4, 4)),
                    UndefinedSimilarityError);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(similarity_index(a, BinaryMask(4, 4)), InvalidArgument);
  }
}

TEST_CASE("warp_mask basics") {
  const BinaryMask disk = disk_mask(64, 64, 30, 30, 10);

  SUBCASE("identity keeps the mask") {
    CHECK(warp_mask(disk, RigidTransform2D::identity()) == disk);
  }
  SUBCASE("integer translation shifts the foreground") {
    const BinaryMask shifted = warp_mask(disk, {0.0, 5.0, 0.0});
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) {
        const bool expect = x >= 5 && disk.get(x - 5, y);
        CHECK(shifted.get(x, y) == expect);
      }
  }
  SUBCASE("rotation round trip keeps at least 95% agreement") {
    const BinaryMask big = disk_mask(256, 256, 128, 128, 100);
    const double theta = 0.3;
    const BinaryMask there = warp_mask(big, {theta, 0.0, 0.0});
    const BinaryMask back = warp_mask(there, {-theta, 0.0, 0.0});
    std::size_t inter = 0;
    for (int y = 0; y < 256; ++y)
      for (int x = 0; x < 256; ++x)
        inter += big.get(x, y) && back.get(x, y);
    const double agreement =
        static_cast<double>(inter) / static_cast<double>(big.count());
    CHECK(agreement >= 0.95);
  }
}

TEST_CASE("same-transform warps barely move the score on disk phantoms") {
  const BinaryMask a = disk_mask(128, 128, 60, 60, 25);
  const BinaryMask b = disk_mask(128, 128, 66, 62, 25);
  const double before = similarity_index(a, b);
  const RigidTransform2D t{0.2, 4.0, -3.0};
  const double after = similarity_index(warp_mask(a, t), warp_mask(b, t));
  CHECK(std::abs(after - before) <= 0.02);
}

TEST_CASE("evaluate_chain trivial and oracle cases") {
  const BinaryMask disk = disk_mask(64, 64, 32, 32, 12);
  roi_register::RegistrationChain chain;
  chain.cumulative = {RigidTransform2D::identity(),
                      RigidTransform2D::identity(),
                      RigidTransform2D::identity()};
  chain.pair_levels.resize(2);

  SUBCASE("identity chain on identical masks scores 1 with zero std") {
    const EvalReport r = evaluate_chain({disk, disk, disk}, chain, 1);
    REQUIRE(r.pairs.size() == 2);
    CHECK(r.mean == 1.0);
    CHECK(r.stddev == 0.0);
    CHECK(r.fallback_pairs.empty());
  }
  SUBCASE("mean and std match an independent single-pass oracle") {
    const BinaryMask m2 = disk_mask(64, 64, 35, 32, 12);
    const BinaryMask m3 = disk_mask(64, 64, 38, 34, 12);
    const EvalReport r = evaluate_chain({disk, m2, m3}, chain, 2);
    REQUIRE(r.pairs.size() == 3);  // (0,1), (0,2), (1,2)
    double sum = 0.0, sq = 0.0;
    for (const auto& p : r.pairs) {
      sum += p.similarity;
      sq += p.similarity * p.similarity;
    }
    const double mean = sum / 3.0;
    const double var = sq / 3.0 - mean * mean;
    CHECK(r.mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(r.stddev == doctest::Approx(std::sqrt(var)).epsilon(1e-9));
  }
  SUBCASE("fallback pairs are surfaced") {
    roi_register::LevelResult lr;
    lr.fallback = true;
    chain.pair_levels[1].push_back(lr);
    const EvalReport r = evaluate_chain({disk, disk, disk}, chain, 1);
    REQUIRE(r.fallback_pairs.size() == 1);
    CHECK(r.fallback_pairs[0].first == 1);
    CHECK(r.fallback_pairs[0].second == 2);
  }
  SUBCASE("length mismatch raises") {
    CHECK_THROWS_AS(evaluate_chain({disk, disk}, chain, 1), InvalidArgument);
  }
}

TEST_CASE("evaluate_chain improves scores when transforms undo motion") {
  // Masks displaced per slice; the chain holds the inverse displacements.
  std::vector<BinaryMask> masks;
  roi_register::RegistrationChain chain;
  for (int i = 0; i < 4; ++i) {
    masks.push_back(disk_mask(128, 128, 50.0 + 9.0 * i, 60.0, 20));
    chain.cumulative.push_back({0.0, -9.0 * i, 0.0});
  }
  chain.pair_levels.resize(3);
  roi_register::RegistrationChain identity_chain;
  identity_chain.cumulative.assign(4, RigidTransform2D::identity());
  identity_chain.pair_levels.resize(3);

  const EvalReport registered = evaluate_chain(masks, chain, 1);
  const EvalReport raw = evaluate_chain(masks, identity_chain, 1);
  CHECK(registered.mean >= 0.95);
  CHECK(registered.mean > raw.mean);
}
