#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

#include "porelab/core.hpp"
#include "porelab/rng.hpp"

namespace porelab::augment {

struct Sample {
  StructureGrid grid;
  VelocityField field;
};

/// Mirror across the horizontal midline; the vertical component changes sign.
inline Sample vflip(const StructureGrid& grid, const VelocityField& field) {
  require_same_size(grid.size(), field.size(), "vflip");
  Sample out{StructureGrid(flip_rows(grid.occupancy())), {}};
  out.field.ux = flip_rows(field.ux);
  out.field.uy = flip_rows(field.uy);
  for (auto& v : out.field.uy.values()) v = -v;
  return out;
}

/// Periodic translation of structure and field together.
inline Sample roll(const StructureGrid& grid, const VelocityField& field, std::size_t tx, std::size_t ty) {
  require_same_size(grid.size(), field.size(), "roll");
  if (tx >= grid.size() || ty >= grid.size()) throw ParameterError("roll: shift must satisfy 0 <= t < L");
  const auto sx = static_cast<std::ptrdiff_t>(tx);
  const auto sy = static_cast<std::ptrdiff_t>(ty);
  return {translate(grid, sx, sy), translate(field, sx, sy)};
}

struct Augmentation {
  bool flip = false;
  std::size_t tx = 0;
  std::size_t ty = 0;

  bool operator==(const Augmentation&) const = default;
};

/// Flip with probability p_flip, then shifts drawn uniformly from
/// [0, floor(max_frac * L)] on each axis (capped at L - 1).
inline Augmentation sample_augmentation(std::uint64_t seed, std::size_t size, double p_flip = 0.5,
                                        double max_frac = 0.3) {
  if (!(p_flip >= 0.0 && p_flip <= 1.0)) throw ParameterError("p_flip must be in [0, 1]");
  if (!(max_frac > 0.0 && max_frac <= 1.0)) throw ParameterError("max_frac must be in (0, 1]");
  Rng rng(seed);
  Augmentation a;
  a.flip = std::bernoulli_distribution(p_flip)(rng);
  const auto limit = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(max_frac * static_cast<double>(size))),
                                            static_cast<std::int64_t>(size) - 1);
  a.tx = static_cast<std::size_t>(uniform_int(rng, 0, limit));
  a.ty = static_cast<std::size_t>(uniform_int(rng, 0, limit));
  return a;
}

inline Sample apply(const Augmentation& a, const StructureGrid& grid, const VelocityField& field) {
  if (a.flip) {
    auto flipped = vflip(grid, field);
    return roll(flipped.grid, flipped.field, a.tx, a.ty);
  }
  return roll(grid, field, a.tx, a.ty);
}

}  // namespace porelab::augment
