#pragma once

#include <cstdint>
#include <random>

#include "porelab/core.hpp"

namespace porelab::fixture {

inline StructureGrid random_grid(std::size_t n, double p_solid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution solid(p_solid);
  StructureGrid g(n);
  for (std::size_t i = 0; i < g.cells(); ++i) g.set_solid(i, solid(rng));
  return g;
}

inline VelocityField random_field(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  VelocityField f(n);
  for (std::size_t i = 0; i < f.cells(); ++i) {
    f.ux[i] = u(rng);
    f.uy[i] = u(rng);
  }
  return f;
}

inline VelocityField uniform_field(std::size_t n, double ux, double uy) {
  VelocityField f(n);
  for (std::size_t i = 0; i < f.cells(); ++i) {
    f.ux[i] = ux;
    f.uy[i] = uy;
  }
  return f;
}

/// Channel along x: rows [0, t) and [n - t, n) solid.
inline StructureGrid channel(std::size_t n, std::size_t t) {
  StructureGrid g(n);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x)
      if (y < t || y >= n - t) g.set_solid(x, y);
  return g;
}

}  // namespace porelab::fixture
