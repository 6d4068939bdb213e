#include <gtest/gtest.h>

#include <random>

#include "spreadpool/errors.hpp"
#include "spreadpool/neighbors.hpp"
#include "test_support.hpp"

namespace sp = spreadpool;
using sp::testing::brute_force_neighbors;
using sp::testing::unit_grid;

TEST(SelectNeighbors, PointOnCenter) {
  const auto n = sp::select_neighbors(unit_grid(10, 10), {0.0, 0.0}, 1);
  ASSERT_EQ(n.size(), 1u);
  EXPECT_EQ(n[0].cell, (sp::CellIndex{0, 0}));
  EXPECT_EQ(n[0].distance, 0.0);
}

TEST(SelectNeighbors, TieBrokenByLinearIndex) {
  const auto n = sp::select_neighbors(unit_grid(10, 10), {0.5, 0.0}, 2);
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0].cell, (sp::CellIndex{0, 0}));
  EXPECT_EQ(n[1].cell, (sp::CellIndex{1, 0}));
  EXPECT_DOUBLE_EQ(n[0].distance, 0.5);
  EXPECT_DOUBLE_EQ(n[1].distance, 0.5);
}

TEST(SelectNeighbors, FourNearest) {
  const auto n = sp::select_neighbors(unit_grid(10, 10), {0.3, 0.3}, 4);
  ASSERT_EQ(n.size(), 4u);
  EXPECT_EQ(n[0].cell, (sp::CellIndex{0, 0}));
  EXPECT_EQ(n[1].cell, (sp::CellIndex{1, 0}));
  EXPECT_EQ(n[2].cell, (sp::CellIndex{0, 1}));
  EXPECT_EQ(n[3].cell, (sp::CellIndex{1, 1}));
  EXPECT_NEAR(n[0].distance, 0.4242640687119285, 1e-15);
  EXPECT_NEAR(n[1].distance, 0.7615773105863908, 1e-15);
  EXPECT_NEAR(n[2].distance, 0.7615773105863908, 1e-15);
  EXPECT_NEAR(n[3].distance, 0.9899494936611666, 1e-15);
}

TEST(SelectNeighbors, SmallLatticeReturnsFewer) {
  const auto n = sp::select_neighbors(unit_grid(2, 1), {0.2, 0.0}, 5);
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0].cell, (sp::CellIndex{0, 0}));
  EXPECT_EQ(n[1].cell, (sp::CellIndex{1, 0}));
}

TEST(SelectNeighbors, FarPointHasEmptyWindow) {
  EXPECT_TRUE(sp::select_neighbors(unit_grid(10, 10), {-50.0, 3.0}, 3).empty());
  EXPECT_TRUE(sp::select_neighbors(unit_grid(10, 10), {1e300, 3.0}, 3).empty());
}

TEST(SelectNeighbors, CandidateWindowReachesPastTheEdge) {
  // k = 3 gives a candidate radius of 3 cells around the rounded cell.
  const auto g = unit_grid(10, 10);
  const auto near = sp::select_neighbors(g, {-2.6, 4.0}, 3);  // rounds to i = -3
  ASSERT_EQ(near.size(), 3u);
  EXPECT_EQ(near[0].cell, (sp::CellIndex{0, 4}));
  EXPECT_TRUE(sp::select_neighbors(g, {-3.6, 4.0}, 3).empty());  // rounds to i = -4
  EXPECT_EQ(sp::select_neighbors(g, {11.4, 11.4}, 1).size(), 1u);  // (11, 11), radius 2
  EXPECT_TRUE(sp::select_neighbors(g, {11.6, 4.0}, 1).empty());  // rounds to i = 12
}

TEST(SelectNeighbors, RejectsZeroK) {
  EXPECT_THROW(sp::select_neighbors(unit_grid(4, 4), {0.0, 0.0}, 0), sp::ConfigError);
}

TEST(SelectNeighbors, InvariantsHold) {
  std::mt19937_64 rng(9);
  const sp::BevGridSpec g{-1.0, 2.0, 0.4, 20, 13};
  std::uniform_real_distribution<double> ux(-1.5, 7.5), uy(1.5, 7.5);
  for (int t = 0; t < 500; ++t) {
    const sp::PointBEV p{ux(rng), uy(rng)};
    const auto n = sp::select_neighbors(g, p, 6);
    ASSERT_EQ(n.size(), 6u);
    for (std::size_t a = 0; a < n.size(); ++a) {
      EXPECT_TRUE(g.contains(n[a].cell.i, n[a].cell.j));
      for (std::size_t b = a + 1; b < n.size(); ++b) EXPECT_NE(n[a].linear, n[b].linear);
      if (a > 0) EXPECT_LE(n[a - 1].distance, n[a].distance);
    }
    // No outside cell is strictly closer than the last member.
    for (std::int64_t j = 0; j < g.ny; ++j) {
      for (std::int64_t i = 0; i < g.nx; ++i) {
        bool member = false;
        for (const auto& e : n) member |= e.linear == g.linear(i, j);
        if (!member) EXPECT_GE(sp::cell_distance_sq(g, p, i, j), n.back().distance_sq);
      }
    }
  }
}

// Random and constructed tie points against the exhaustive scan.
TEST(SelectNeighbors, MatchesBruteForce) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::int64_t> dim(1, 64);
  std::uniform_int_distribution<std::size_t> kk(1, 8);
  std::uniform_int_distribution<int> half(0, 1);
  std::size_t mismatches = 0;
  for (int t = 0; t < 3000; ++t) {
    const sp::BevGridSpec g{0.25, -3.0, 0.5, dim(rng), dim(rng)};
    const std::size_t k = kk(rng);
    const sp::PointBEV lo = g.extent_min(), hi = g.extent_max();
    sp::PointBEV p{std::uniform_real_distribution<double>(lo.x, hi.x)(rng),
                   std::uniform_real_distribution<double>(lo.y, hi.y)(rng)};
    if (t % 3 == 0) {
      // Snap onto a cell boundary or corner: exact ties in distance.
      const auto c = sp::round_to_cell(g, p);
      p.x = g.center_x(c.i) + (half(rng) ? 0.5 : 0.0) * g.cell_size;
      p.y = g.center_y(c.j) + (half(rng) ? 0.5 : 0.0) * g.cell_size;
    }
    const auto got = sp::select_neighbors(g, p, k);
    const auto want = brute_force_neighbors(g, p, k);
    bool same = got.size() == want.size();
    for (std::size_t s = 0; same && s < got.size(); ++s) same = got[s].linear == want[s].linear;
    mismatches += same ? 0 : 1;
  }
  EXPECT_EQ(mismatches, 0u);
}
