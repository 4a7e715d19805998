#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "porelab/pchip.hpp"

using porelab::Pchip;

namespace {

struct Nodes {
  std::vector<double> x, y;
};

Nodes random_nodes(std::uint64_t seed, std::size_t n, bool monotone) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gap(0.05, 2.0), step(0.0, 1.0), val(-3.0, 3.0);
  Nodes out;
  double x = val(rng), y = val(rng);
  for (std::size_t i = 0; i < n; ++i) {
    out.x.push_back(x);
    out.y.push_back(y);
    x += gap(rng);
    y = monotone ? y + (i % 3 == 1 ? 0.0 : step(rng)) : val(rng);
  }
  return out;
}

}  // namespace

TEST(Pchip, ReproducesNodes) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto n = random_nodes(s, 2 + s % 9, s % 2);
    const Pchip p(n.x, n.y);
    for (std::size_t i = 0; i < n.x.size(); ++i) EXPECT_EQ(p(n.x[i]), n.y[i]);
  }
}

TEST(Pchip, MonotoneDataGivesMonotoneInterpolant) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto n = random_nodes(100 + s, 3 + s % 12, true);
    const Pchip p(n.x, n.y);
    double prev = p(n.x.front());
    const double a = n.x.front(), b = n.x.back();
    for (int i = 1; i <= 1000; ++i) {
      const double v = p(a + (b - a) * i / 1000.0);
      EXPECT_GE(v, prev) << "seed " << s << " i " << i;
      prev = v;
    }
  }
}

TEST(Pchip, DecreasingDataGivesDecreasingInterpolant) {
  const std::vector<double> x = {0, 1, 1.5, 4, 4.1, 7};
  const std::vector<double> y = {5, 4, 4, 1, 0.9, -2};
  const Pchip p(x, y);
  double prev = p(0.0);
  for (int i = 1; i <= 1000; ++i) {
    const double v = p(7.0 * i / 1000.0);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(Pchip, ReproducesLinearData) {
  const std::vector<double> x = {-1, 0, 0.3, 2, 5, 5.5};
  std::vector<double> y;
  for (double v : x) y.push_back(0.7 * v - 1.2);
  const Pchip p(x, y);
  for (int i = 0; i <= 1000; ++i) {
    const double t = -1.0 + 6.5 * i / 1000.0;
    EXPECT_NEAR(p(t), 0.7 * t - 1.2, 1e-12);
  }
}

TEST(Pchip, NoOvershootBetweenNodes) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto n = random_nodes(200 + s, 4 + s % 10, false);
    const Pchip p(n.x, n.y);
    for (std::size_t k = 0; k + 1 < n.x.size(); ++k) {
      const double lo = std::min(n.y[k], n.y[k + 1]), hi = std::max(n.y[k], n.y[k + 1]);
      for (int i = 0; i <= 200; ++i) {
        const double v = p(n.x[k] + (n.x[k + 1] - n.x[k]) * i / 200.0);
        EXPECT_GE(v, lo - 1e-12);
        EXPECT_LE(v, hi + 1e-12);
      }
    }
  }
}

TEST(Pchip, ContinuouslyDifferentiableAtNodes) {
  const auto n = random_nodes(7, 10, false);
  const Pchip p(n.x, n.y);
  const double eps = 1e-7;
  for (std::size_t k = 1; k + 1 < n.x.size(); ++k) {
    const double left = (p(n.x[k]) - p(n.x[k] - eps)) / eps;
    const double right = (p(n.x[k] + eps) - p(n.x[k])) / eps;
    EXPECT_NEAR(left, p.slopes()[k], 1e-4);
    EXPECT_NEAR(right, p.slopes()[k], 1e-4);
  }
}

TEST(Pchip, ConstantOutsideNodes) {
  const std::vector<double> x = {1, 2, 3}, y = {4, 6, 5};
  const Pchip p(x, y);
  EXPECT_EQ(p(-100.0), 4.0);
  EXPECT_EQ(p(0.999), 4.0);
  EXPECT_EQ(p(3.001), 5.0);
  EXPECT_EQ(p(1e9), 5.0);
}

TEST(Pchip, TwoNodesIsLinear) {
  const std::vector<double> x = {0, 2}, y = {1, 5};
  const Pchip p(x, y);
  EXPECT_NEAR(p(0.5), 2.0, 1e-15);
  EXPECT_NEAR(p(1.5), 4.0, 1e-15);
}

TEST(Pchip, RejectsBadInput) {
  const std::vector<double> one = {1};
  EXPECT_THROW(Pchip(one, one), porelab::ParameterError);
  const std::vector<double> x = {0, 1, 1}, y = {0, 1, 2};
  EXPECT_THROW(Pchip(x, y), porelab::ParameterError);
  const std::vector<double> down = {0, 2, 1};
  EXPECT_THROW(Pchip(down, y), porelab::ParameterError);
  const std::vector<double> shorter = {0, 1};
  EXPECT_THROW(Pchip(x, shorter), porelab::ParameterError);
  const std::vector<double> bad = {0, NAN, 1};
  EXPECT_THROW(Pchip(std::vector<double>{0, 1, 2}, bad), porelab::DataError);
}
