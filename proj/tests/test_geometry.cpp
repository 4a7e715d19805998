#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <numbers>
#include <set>

#include "helpers.hpp"
#include "porelab/geometry.hpp"

using namespace porelab;

namespace {

/// Percolation oracle: unrolls the torus into 2L+1 copies along the axis
/// (open ends, periodic across) and asks whether some pore pixel of the
/// middle copy reaches its own image one copy further on.
bool percolates_unrolled(const StructureGrid& g, Axis axis) {
  const std::size_t n = g.size();
  const std::size_t copies = 2 * n + 1;
  const std::size_t len = copies * n;
  auto solid_at = [&](std::size_t a, std::size_t t) {
    const std::size_t along = a % n;
    return axis == Axis::x ? g.solid(along, t) : g.solid(t, along);
  };
  for (std::size_t t0 = 0; t0 < n; ++t0) {
    for (std::size_t a0 = n * n; a0 < n * n + n; ++a0) {
      if (solid_at(a0, t0)) continue;
      std::vector<char> seen(len * n, 0);
      std::deque<std::pair<std::size_t, std::size_t>> q{{a0, t0}};
      seen[a0 * n + t0] = 1;
      while (!q.empty()) {
        auto [a, t] = q.front();
        q.pop_front();
        if (a == a0 + n && t == t0) return true;
        const std::pair<long, long> steps[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (auto [da, dt] : steps) {
          const long na = static_cast<long>(a) + da;
          if (na < 0 || na >= static_cast<long>(len)) continue;
          const auto nt = static_cast<std::size_t>((static_cast<long>(t) + dt + static_cast<long>(n)) % static_cast<long>(n));
          const auto ua = static_cast<std::size_t>(na);
          if (seen[ua * n + nt] || solid_at(ua, nt)) continue;
          seen[ua * n + nt] = 1;
          q.emplace_back(ua, nt);
        }
      }
    }
  }
  return false;
}

}  // namespace

TEST(TrigField, MatchesDirectEvaluation) {
  WaveSpec spec;
  spec.waves = {{1, 0, 0.0}, {-3, 2, 0.7}, {12, -12, 3.0}};
  const std::size_t n = 16;
  const auto f = gen_trig_field(spec, n);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const double px = (x + 0.5) / n, py = (y + 0.5) / n;
      double s = 0.0;
      for (const auto& w : spec.waves) s += std::cos(2 * std::numbers::pi * (w.kx * px + w.ky * py) + w.phase);
      EXPECT_NEAR(f(x, y), std::sqrt(2.0 / 3.0) * s, 1e-12);
    }
  }
}

TEST(TrigField, SampledSpecWithinRanges) {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const auto spec = WaveSpec::sample(rng);
    ASSERT_GE(spec.waves.size(), 10u);
    ASSERT_LE(spec.waves.size(), 100u);
    for (const auto& w : spec.waves) {
      EXPECT_LE(std::abs(w.kx), 12);
      EXPECT_LE(std::abs(w.ky), 12);
      EXPECT_GE(w.phase, 0.0);
      EXPECT_LE(w.phase, std::numbers::pi);
    }
  }
}

TEST(TrigField, DeterministicPerSeed) {
  EXPECT_EQ(gen_trig_field(std::uint64_t{42}, 32), gen_trig_field(std::uint64_t{42}, 32));
  EXPECT_NE(gen_trig_field(std::uint64_t{42}, 32), gen_trig_field(std::uint64_t{43}, 32));
}

TEST(TrigField, RejectsBadInput) {
  WaveSpec empty;
  EXPECT_THROW(gen_trig_field(empty, 16), ParameterError);
  WaveSpec far;
  far.waves = {{13, 0, 0.0}};
  EXPECT_THROW(gen_trig_field(far, 16), ParameterError);
  EXPECT_THROW(gen_trig_field(std::uint64_t{1}, 4), ParameterError);
}

TEST(Threshold, ExactSolidCountAndOrdering) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t n = 24;
    const auto f = gen_trig_field(seed, n);
    const double phi = 0.7 + 0.01 * static_cast<double>(seed);
    const auto g = threshold_to_porosity(f, phi);
    EXPECT_EQ(g.solid_count(), static_cast<std::size_t>(std::llround((1 - phi) * n * n)));
    EXPECT_LE(std::abs(g.porosity() - phi), 0.5 / (n * n) + 1e-15);
    double max_solid = -1e300, min_pore = 1e300;
    for (std::size_t i = 0; i < g.cells(); ++i) {
      if (g.solid(i)) max_solid = std::max(max_solid, f[i]);
      else min_pore = std::min(min_pore, f[i]);
    }
    EXPECT_LE(max_solid, min_pore);
  }
}

TEST(Threshold, TiesBrokenByIndex) {
  ScalarField f(8, 1.0);
  const auto g = threshold_to_porosity(f, 0.75);
  for (std::size_t i = 0; i < g.cells(); ++i) EXPECT_EQ(g.solid(i), i < 16);
}

TEST(Threshold, ForcedSolidCountsTowardTarget) {
  const std::size_t n = 32;
  const auto walls = pipe_wall_mask(n, 2, false);
  const auto g = threshold_to_porosity(gen_trig_field(std::uint64_t{9}, n), 0.8, &walls);
  for (std::size_t i = 0; i < g.cells(); ++i)
    if (walls.solid(i)) {
      EXPECT_TRUE(g.solid(i));
    }
  EXPECT_EQ(g.solid_count(), static_cast<std::size_t>(std::llround(0.2 * n * n)));
}

TEST(Threshold, RejectsBadPorosity) {
  const auto f = gen_trig_field(std::uint64_t{1}, 16);
  EXPECT_THROW(threshold_to_porosity(f, 0.0), ParameterError);
  EXPECT_THROW(threshold_to_porosity(f, 1.5), ParameterError);
}

TEST(Shapes, RasterizationStencils) {
  EXPECT_EQ(rasterize({ShapeKind::circle, 0, 0, 3}, 32).size(), 9u);
  EXPECT_EQ(rasterize({ShapeKind::circle, 0, 0, 4}, 32).size(), 12u);
  EXPECT_EQ(rasterize({ShapeKind::square, 0, 0, 5}, 32).size(), 25u);
  const auto wrapped = rasterize({ShapeKind::square, 30, 31, 3}, 32);
  std::set<std::pair<std::size_t, std::size_t>> px(wrapped.begin(), wrapped.end());
  EXPECT_TRUE(px.count({0, 0}));
  EXPECT_TRUE(px.count({31, 1}));
}

TEST(Shapes, CircleIsSymmetric) {
  for (std::size_t s = 3; s <= 8; ++s) {
    const auto px = rasterize({ShapeKind::circle, 0, 0, s}, 32);
    std::set<std::pair<std::size_t, std::size_t>> set(px.begin(), px.end());
    for (auto [x, y] : px) {
      EXPECT_TRUE(set.count({s - 1 - x, y}));
      EXPECT_TRUE(set.count({y, x}));
    }
  }
}

TEST(Shapes, SolidSetIsUnionOfObstacles) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ShapeOptions opt;
    opt.porosity = 0.75;
    const std::size_t n = 48;
    const auto packing = place_shapes(seed, opt, n);
    StructureGrid rebuilt(n);
    for (const auto& ob : packing.obstacles) {
      EXPECT_GE(ob.size, 3u);
      EXPECT_LE(ob.size, 8u);
      for (auto [x, y] : rasterize(ob, n)) rebuilt.set_solid(x, y);
    }
    EXPECT_EQ(rebuilt, packing.grid);
    EXPECT_LE(std::abs(packing.grid.porosity() - opt.porosity), 32.0 / (n * n));
  }
}

TEST(Shapes, DeterministicAndValidated) {
  ShapeOptions opt;
  EXPECT_EQ(gen_shapes(3, opt, 32), gen_shapes(3, opt, 32));
  opt.min_size = 9;
  EXPECT_THROW(gen_shapes(3, opt, 32), ParameterError);
  opt = {};
  opt.porosity = 0.0;
  EXPECT_THROW(gen_shapes(3, opt, 32), ParameterError);
}

TEST(Pipe, EdgeAndCentralWalls) {
  const std::size_t n = 16;
  const auto edge = pipe_wall_mask(n, 2, false);
  const auto central = pipe_wall_mask(n, 2, true);
  for (std::size_t y = 0; y < n; ++y) {
    const bool edge_row = y < 2 || y >= n - 2;
    const bool central_row = y >= n / 2 - 2 && y < n / 2 + 2;
    for (std::size_t x = 0; x < n; ++x) {
      EXPECT_EQ(edge.solid(x, y), edge_row);
      EXPECT_EQ(central.solid(x, y), central_row);
    }
  }
  EXPECT_THROW(pipe_wall_mask(n, 0, false), ParameterError);
  EXPECT_THROW(pipe_wall_mask(n, 4, false), ParameterError);
}

TEST(Percolation, SimpleCases) {
  EXPECT_TRUE(percolates(StructureGrid(8), Axis::x));
  EXPECT_TRUE(percolates(fixture::channel(8, 2), Axis::x));
  EXPECT_FALSE(percolates(fixture::channel(8, 2), Axis::y));
  StructureGrid wall(8);
  for (std::size_t y = 0; y < 8; ++y) wall.set_solid(3, y);
  EXPECT_FALSE(percolates(wall, Axis::x));
  EXPECT_TRUE(percolates(wall, Axis::y));
  StructureGrid full(8);
  for (std::size_t i = 0; i < full.cells(); ++i) full.set_solid(i);
  EXPECT_FALSE(percolates(full, Axis::x));
}

TEST(Percolation, DiagonalStaircaseWindsAroundTorus) {
  // A one-pixel-wide staircase from (0,0) that only reconnects through both
  // periodic boundaries.
  const std::size_t n = 8;
  StructureGrid g(n);
  for (std::size_t i = 0; i < g.cells(); ++i) g.set_solid(i);
  for (std::size_t k = 0; k < n; ++k) {
    g.set_solid(k, k, false);
    g.set_solid((k + 1) % n, k, false);
  }
  EXPECT_TRUE(percolates(g, Axis::x));
  EXPECT_TRUE(percolates(g, Axis::y));
  EXPECT_TRUE(percolates_unrolled(g, Axis::x));
}

TEST(Percolation, MatchesUnrolledOracle) {
  int positives = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const std::size_t n = 6 + seed % 5;
    const double p = 0.3 + 0.05 * static_cast<double>(seed % 7);
    const auto g = fixture::random_grid(n, p, seed);
    for (Axis a : {Axis::x, Axis::y}) {
      const bool expected = percolates_unrolled(g, a);
      positives += expected;
      ASSERT_EQ(percolates(g, a), expected) << "seed " << seed;
    }
  }
  EXPECT_GT(positives, 50);
  EXPECT_LT(positives, 550);
}

TEST(Percolation, InvariantUnderRollAndFlip) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto g = fixture::random_grid(12, 0.4, seed);
    const bool px = percolates(g, Axis::x);
    const bool py = percolates(g, Axis::y);
    for (std::ptrdiff_t t : {1, 5, 11}) {
      EXPECT_EQ(percolates(translate(g, t, 2 * t), Axis::x), px);
      EXPECT_EQ(percolates(translate(g, t, 2 * t), Axis::y), py);
    }
    EXPECT_EQ(percolates(StructureGrid(flip_rows(g.occupancy())), Axis::x), px);
  }
}
