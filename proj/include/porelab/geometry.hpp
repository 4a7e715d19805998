#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numbers>
#include <numeric>
#include <optional>
#include <vector>

#include "porelab/core.hpp"
#include "porelab/rng.hpp"

namespace porelab {

using ScalarField = Field2D<double>;

/// One standing wave cos(2*pi*(kx*x + ky*y) + phase).
struct Wave {
  int kx = 0;
  int ky = 0;
  double phase = 0.0;
};

/// Superposition of standing waves defining a random trigonometric field.
struct WaveSpec {
  static constexpr int kMaxWaveNumber = 12;
  static constexpr int kMinWaves = 10;
  static constexpr int kMaxWaves = 100;

  std::vector<Wave> waves;

  /// N in [10, 100], integer wave numbers in [-12, 12], phases in [0, pi].
  static WaveSpec sample(Rng& rng) {
    WaveSpec spec;
    const auto n = uniform_int(rng, kMinWaves, kMaxWaves);
    spec.waves.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      Wave w;
      w.kx = static_cast<int>(uniform_int(rng, -kMaxWaveNumber, kMaxWaveNumber));
      w.ky = static_cast<int>(uniform_int(rng, -kMaxWaveNumber, kMaxWaveNumber));
      w.phase = uniform_real(rng, 0.0, std::numbers::pi);
      spec.waves.push_back(w);
    }
    return spec;
  }

  void validate() const {
    if (waves.empty()) throw ParameterError("wave spec: at least one wave required");
    for (const auto& w : waves) {
      if (std::abs(w.kx) > kMaxWaveNumber || std::abs(w.ky) > kMaxWaveNumber)
        throw ParameterError("wave spec: wave number outside [-12, 12]");
      if (!std::isfinite(w.phase)) throw ParameterError("wave spec: non-finite phase");
    }
  }
};

constexpr std::size_t kMinGridSize = 8;

inline void require_grid_size(std::size_t size) {
  if (size < kMinGridSize) throw ParameterError("grid size must be at least 8");
}

/// f(x) = sqrt(2/N) sum_i cos(q_i . x + phi_i) sampled at pixel centers of [0,1)^2.
inline ScalarField gen_trig_field(const WaveSpec& spec, std::size_t size) {
  require_grid_size(size);
  spec.validate();
  ScalarField field(size, 0.0);
  const double scale = std::sqrt(2.0 / static_cast<double>(spec.waves.size()));
  const double two_pi = 2.0 * std::numbers::pi;
  const double inv = 1.0 / static_cast<double>(size);
  for (std::size_t y = 0; y < size; ++y) {
    const double py = (static_cast<double>(y) + 0.5) * inv;
    for (std::size_t x = 0; x < size; ++x) {
      const double px = (static_cast<double>(x) + 0.5) * inv;
      double sum = 0.0;
      for (const auto& w : spec.waves) sum += std::cos(two_pi * (w.kx * px + w.ky * py) + w.phase);
      field(x, y) = scale * sum;
    }
  }
  return field;
}

/// Field with a wave spec drawn from `seed`.
inline ScalarField gen_trig_field(std::uint64_t seed, std::size_t size) {
  Rng rng(seed);
  return gen_trig_field(WaveSpec::sample(rng), size);
}

/// Marks the lowest-valued pixels solid so that the pore fraction is the
/// closest achievable to `porosity`. Equal values are ordered by pixel index.
/// Pixels set in `forced_solid` are solid regardless of the field and count
/// toward the solid total.
inline StructureGrid threshold_to_porosity(const ScalarField& field, double porosity,
                                           const StructureGrid* forced_solid = nullptr) {
  if (!(porosity > 0.0 && porosity <= 1.0)) throw ParameterError("porosity must be in (0, 1]");
  const std::size_t cells = field.cells();
  if (forced_solid) require_same_size(forced_solid->size(), field.size(), "threshold_to_porosity");

  StructureGrid grid(field.size());
  std::vector<std::size_t> order;
  order.reserve(cells);
  std::size_t forced = 0;
  for (std::size_t i = 0; i < cells; ++i) {
    if (forced_solid && forced_solid->solid(i)) {
      grid.set_solid(i);
      ++forced;
    } else {
      order.push_back(i);
    }
  }
  const auto target_solid =
      static_cast<std::size_t>(std::llround((1.0 - porosity) * static_cast<double>(cells)));
  const std::size_t fill = target_solid > forced ? std::min(target_solid - forced, order.size()) : 0;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return field[a] < field[b]; });
  for (std::size_t k = 0; k < fill; ++k) grid.set_solid(order[k]);
  return grid;
}

// ---------------------------------------------------------------------------
// Obstacle packings
// ---------------------------------------------------------------------------

enum class ShapeKind : std::uint8_t { circle, square };

/// An obstacle occupying the size x size box whose lower-left pixel is
/// (x, y); boxes wrap periodically.
struct Obstacle {
  ShapeKind kind = ShapeKind::square;
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t size = 0;
};

/// Pixels covered by an obstacle. Circles keep the pixels whose centers lie
/// within size/2 of the box center.
inline std::vector<std::pair<std::size_t, std::size_t>> rasterize(const Obstacle& ob,
                                                                  std::size_t grid_size) {
  std::vector<std::pair<std::size_t, std::size_t>> pixels;
  const double r = 0.5 * static_cast<double>(ob.size);
  for (std::size_t j = 0; j < ob.size; ++j) {
    for (std::size_t i = 0; i < ob.size; ++i) {
      if (ob.kind == ShapeKind::circle) {
        const double dx = static_cast<double>(i) + 0.5 - r;
        const double dy = static_cast<double>(j) + 0.5 - r;
        if (dx * dx + dy * dy > r * r) continue;
      }
      pixels.emplace_back((ob.x + i) % grid_size, (ob.y + j) % grid_size);
    }
  }
  return pixels;
}

struct ShapeOptions {
  double porosity = 0.8;
  double p_circle = 0.5;
  std::size_t min_size = 3;
  std::size_t max_size = 8;
};

struct ShapePacking {
  StructureGrid grid;
  std::vector<Obstacle> obstacles;
};

/// Drops overlapping circles/squares until porosity falls to the target;
/// the final obstacle is kept only if that brings porosity closer to it.
inline ShapePacking place_shapes(std::uint64_t seed, const ShapeOptions& opt, std::size_t size) {
  require_grid_size(size);
  if (!(opt.porosity > 0.0 && opt.porosity <= 1.0)) throw ParameterError("porosity must be in (0, 1]");
  if (!(opt.p_circle >= 0.0 && opt.p_circle <= 1.0)) throw ParameterError("p_circle must be in [0, 1]");
  if (opt.min_size < 1 || opt.min_size > opt.max_size || opt.max_size > size)
    throw ParameterError("invalid obstacle size range");

  ShapePacking out{StructureGrid(size), {}};
  Rng rng(seed);
  std::bernoulli_distribution pick_circle(opt.p_circle);
  const double cells = static_cast<double>(size * size);
  std::size_t pores = size * size;
  const std::size_t max_attempts = 1000 * size * size;

  for (std::size_t attempt = 0; static_cast<double>(pores) / cells > opt.porosity; ++attempt) {
    if (attempt == max_attempts) throw ParameterError("shape packing did not reach target porosity");
    Obstacle ob;
    ob.kind = pick_circle(rng) ? ShapeKind::circle : ShapeKind::square;
    ob.size = static_cast<std::size_t>(uniform_int(rng, static_cast<std::int64_t>(opt.min_size),
                                                   static_cast<std::int64_t>(opt.max_size)));
    ob.x = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(size) - 1));
    ob.y = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(size) - 1));

    std::vector<std::size_t> added;
    for (auto [px, py] : rasterize(ob, size)) {
      if (out.grid.pore(px, py)) {
        out.grid.set_solid(px, py);
        added.push_back(py * size + px);
      }
    }
    if (added.empty()) continue;
    const std::size_t before = pores;
    pores -= added.size();
    if (static_cast<double>(pores) / cells <= opt.porosity) {
      const double err_keep = std::abs(static_cast<double>(pores) / cells - opt.porosity);
      const double err_drop = std::abs(static_cast<double>(before) / cells - opt.porosity);
      if (err_drop < err_keep) {
        for (auto idx : added) out.grid.set_solid(idx, false);
        pores = before;
        break;
      }
    }
    out.obstacles.push_back(ob);
  }
  return out;
}

inline StructureGrid gen_shapes(std::uint64_t seed, const ShapeOptions& opt, std::size_t size) {
  return place_shapes(seed, opt, size).grid;
}

/// Solid bands parallel to the flow axis. Edge walls occupy the first and
/// last `thickness` rows; the central variant is the same band pair shifted
/// by half the domain, i.e. 2*thickness rows centred on row L/2.
inline StructureGrid add_pipe_walls(const StructureGrid& grid, std::size_t thickness, bool central) {
  const std::size_t n = grid.size();
  if (thickness < 1 || 4 * thickness >= n) throw ParameterError("wall thickness must satisfy 1 <= t < L/4");
  StructureGrid out = grid;
  const std::size_t shift = central ? n / 2 : 0;
  for (std::size_t k = 0; k < thickness; ++k) {
    const std::size_t rows[2] = {(k + shift) % n, (n - 1 - k + shift) % n};
    for (std::size_t row : rows)
      for (std::size_t x = 0; x < n; ++x) out.set_solid(x, row);
  }
  return out;
}

inline StructureGrid pipe_wall_mask(std::size_t size, std::size_t thickness, bool central) {
  return add_pipe_walls(StructureGrid(size), thickness, central);
}

// ---------------------------------------------------------------------------
// Connectivity
// ---------------------------------------------------------------------------

enum class Axis : std::uint8_t { x, y };

/// True iff the pore space contains a closed loop that winds around the torus
/// along `axis`, i.e. flow driven along that axis has an open channel.
///
/// Flood fill on the torus while tracking how many times each visit has
/// crossed the periodic boundary along `axis`; reaching an already-visited
/// pixel with a different crossing count closes a winding loop.
inline bool percolates(const StructureGrid& grid, Axis axis) {
  const std::size_t n = grid.size();
  if (n == 0) return false;
  constexpr std::int64_t kUnvisited = INT64_MIN;
  std::vector<std::int64_t> lift(grid.cells(), kUnvisited);
  std::deque<std::size_t> queue;
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};

  for (std::size_t start = 0; start < grid.cells(); ++start) {
    if (grid.solid(start) || lift[start] != kUnvisited) continue;
    lift[start] = 0;
    queue.push_back(start);
    while (!queue.empty()) {
      const std::size_t cur = queue.front();
      queue.pop_front();
      const auto cx = static_cast<std::int64_t>(cur % n);
      const auto cy = static_cast<std::int64_t>(cur / n);
      for (int d = 0; d < 4; ++d) {
        std::int64_t nx = cx + dx[d];
        std::int64_t ny = cy + dy[d];
        std::int64_t crossing = 0;
        const std::int64_t along = axis == Axis::x ? nx : ny;
        if (along < 0) crossing = -1;
        if (along >= static_cast<std::int64_t>(n)) crossing = 1;
        nx = (nx + static_cast<std::int64_t>(n)) % static_cast<std::int64_t>(n);
        ny = (ny + static_cast<std::int64_t>(n)) % static_cast<std::int64_t>(n);
        const auto next = static_cast<std::size_t>(ny) * n + static_cast<std::size_t>(nx);
        if (grid.solid(next)) continue;
        const std::int64_t l = lift[cur] + crossing;
        if (lift[next] == kUnvisited) {
          lift[next] = l;
          queue.push_back(next);
        } else if (lift[next] != l) {
          return true;
        }
      }
    }
  }
  return false;
}

}  // namespace porelab
