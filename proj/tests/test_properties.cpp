#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "porelab/lbm.hpp"
#include "porelab/properties.hpp"

using namespace porelab;

TEST(Tortuosity, UniformFlows) {
  const auto g = fixture::random_grid(16, 0.3, 1);
  EXPECT_NEAR(tortuosity(fixture::uniform_field(16, 0.01, 0.0), g), 1.0, 1e-12);
  EXPECT_NEAR(tortuosity(fixture::uniform_field(16, 0.01, 0.01), g), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(tortuosity(fixture::uniform_field(16, 0.01, -0.01), g), std::sqrt(2.0), 1e-12);
}

TEST(Tortuosity, IgnoresSolidPixels) {
  StructureGrid g(4);
  g.set_solid(0);
  auto f = fixture::uniform_field(4, 1.0, 0.0);
  f.uy[0] = 100.0;
  EXPECT_EQ(tortuosity(f, g), 1.0);
}

TEST(Tortuosity, UndefinedWithoutStreamwiseFlow) {
  EXPECT_THROW(tortuosity(VelocityField(8), StructureGrid(8)), UndefinedTortuosityError);
  EXPECT_THROW(tortuosity(VelocityField(8), StructureGrid(4)), ParameterError);
}

TEST(Tortuosity, AtLeastOneForPositiveAxialFlow) {
  const auto g = fixture::random_grid(12, 0.3, 3);
  auto f = fixture::random_field(12, 4);
  for (auto& v : f.ux.values()) v = std::abs(v) + 1e-3;
  EXPECT_GE(tortuosity(f, g), 1.0);
}

TEST(Permeability, DarcyDefinition) {
  lbm::LbmParams p;
  p.tau = 0.8;
  p.force = {2e-6, 0.0};
  const auto f = fixture::uniform_field(8, 3e-4, 1e-4);
  EXPECT_NEAR(permeability(f, StructureGrid(8), p), (0.3 / 3.0) * 3e-4 / 2e-6, 1e-12);
  p.force = {0.0, 1e-6};
  EXPECT_THROW(permeability(f, StructureGrid(8), p), ParameterError);
}

TEST(Permeability, PoiseuilleChannel) {
  const std::size_t n = 32, t = 2;
  lbm::LbmParams p;
  const auto sol = lbm::solve(fixture::channel(n, t), p);
  const double h = static_cast<double>(n - 2 * t);
  const double k_exact = h * h * h / (12.0 * static_cast<double>(n));
  EXPECT_NEAR(permeability(sol.field, fixture::channel(n, t), p) / k_exact, 1.0, 0.05);
}

TEST(Summary, CollectsAll) {
  const auto g = fixture::random_grid(8, 0.25, 5);
  auto f = fixture::uniform_field(8, 0.3, 0.4);
  lbm::LbmParams p;
  const auto s = summary(f, g, p);
  EXPECT_EQ(s.porosity, g.porosity());
  EXPECT_NEAR(s.mean_speed, 0.5, 1e-15);
  EXPECT_NEAR(s.max_speed, 0.5, 1e-15);
  EXPECT_NEAR(s.tortuosity, 0.5 / 0.3, 1e-12);
  EXPECT_EQ(s.permeability, permeability(f, g, p));
}
