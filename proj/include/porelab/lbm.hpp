#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "porelab/core.hpp"
#include "porelab/geometry.hpp"

namespace porelab::lbm {

// D2Q9 lattice: rest, four axis neighbours, four diagonals.
inline constexpr int kQ = 9;
inline constexpr std::array<int, kQ> kEx = {0, 1, 0, -1, 0, 1, -1, -1, 1};
inline constexpr std::array<int, kQ> kEy = {0, 0, 1, 0, -1, 1, 1, -1, -1};
inline constexpr std::array<int, kQ> kOpposite = {0, 3, 4, 1, 2, 7, 8, 5, 6};
inline constexpr std::array<double, kQ> kWeight = {4.0 / 9,  1.0 / 9,  1.0 / 9,  1.0 / 9, 1.0 / 9,
                                                   1.0 / 36, 1.0 / 36, 1.0 / 36, 1.0 / 36};

/// Largest speed accepted when seeding distributions from an external field.
inline constexpr double kWarmSpeedLimit = 0.2;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

struct LbmParams {
  double tau = 1.0;             // relaxation time
  Vec2 force{1e-6, 0.0};        // body acceleration g; force density is rho0 * g
  double rho0 = 1.0;            // reference density
  double tolerance = 1e-8;      // relative L2 change between checks
  std::int64_t check_interval = 100;
  std::int64_t max_iterations = 1'000'000;

  double kinematic_viscosity() const { return (tau - 0.5) / 3.0; }
  double dynamic_viscosity() const { return rho0 * kinematic_viscosity(); }

  void validate() const {
    if (!(tau > 0.5) || !std::isfinite(tau)) throw ParameterError("tau must be > 0.5");
    if (!std::isfinite(force.x) || !std::isfinite(force.y)) throw ParameterError("force must be finite");
    if (!(rho0 > 0.0) || !std::isfinite(rho0)) throw ParameterError("rho0 must be > 0");
    if (!(tolerance > 0.0)) throw ParameterError("tolerance must be > 0");
    if (check_interval < 1) throw ParameterError("check interval must be >= 1");
    if (max_iterations < 1) throw ParameterError("max iterations must be >= 1");
  }

  bool operator==(const LbmParams&) const = default;
};

/// Second-order D2Q9 equilibrium.
inline std::array<double, kQ> equilibrium(double rho, Vec2 u) {
  std::array<double, kQ> feq{};
  const double usq = 1.5 * (u.x * u.x + u.y * u.y);
  for (int i = 0; i < kQ; ++i) {
    const double eu = kEx[i] * u.x + kEy[i] * u.y;
    feq[i] = kWeight[i] * rho * (1.0 + 3.0 * eu + 4.5 * eu * eu - usq);
  }
  return feq;
}

/// Thrown when max iterations are exhausted; carries the last velocity field.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(VelocityField partial, std::int64_t iterations)
      : Error("no convergence after " + std::to_string(iterations) + " iterations"),
        partial_(std::move(partial)),
        iterations_(iterations) {}
  const VelocityField& partial_field() const noexcept { return partial_; }
  std::int64_t iterations() const noexcept { return iterations_; }

 private:
  VelocityField partial_;
  std::int64_t iterations_;
};

struct Moments {
  Field2D<double> density;
  VelocityField velocity;
};

/// Distributions f_i on every node of a periodic grid.
class LbmState {
 public:
  LbmState(StructureGrid grid, LbmParams params)
      : grid_(std::move(grid)), params_(params), f_(grid_.cells() * kQ, 0.0), scratch_(f_.size()) {
    params_.validate();
  }

  const StructureGrid& grid() const noexcept { return grid_; }
  const LbmParams& params() const noexcept { return params_; }
  std::int64_t iteration() const noexcept { return iteration_; }
  std::size_t size() const noexcept { return grid_.size(); }

  /// Distributions in structure-of-arrays order: f[i * cells + node].
  std::span<double> distributions() noexcept { return f_; }
  std::span<const double> distributions() const noexcept { return f_; }

  std::array<double, kQ> node(std::size_t index) const {
    std::array<double, kQ> out{};
    for (int i = 0; i < kQ; ++i) out[i] = f_[plane(i) + index];
    return out;
  }
  void set_node(std::size_t index, const std::array<double, kQ>& values) {
    for (int i = 0; i < kQ; ++i) f_[plane(i) + index] = values[i];
  }

  /// Sum of all distributions over the whole lattice.
  double total_mass() const {
    double m = 0.0;
    for (double v : f_) m += v;
    return m;
  }

  /// One collide-force-stream cycle. Pore nodes relax with BGK plus Guo
  /// forcing; solid nodes reverse their populations (full-way bounce-back).
  void step() {
    collide();
    stream();
    ++iteration_;
  }

  /// Density and velocity (with the half-force shift); velocity is exactly
  /// zero on solid nodes.
  Moments moments() const {
    const std::size_t n = grid_.size();
    Moments m{Field2D<double>(n, 0.0), VelocityField(n)};
    const double fx = params_.rho0 * params_.force.x;
    const double fy = params_.rho0 * params_.force.y;
    for (std::size_t node = 0; node < grid_.cells(); ++node) {
      double rho = 0.0, jx = 0.0, jy = 0.0;
      for (int i = 0; i < kQ; ++i) {
        const double v = f_[plane(i) + node];
        rho += v;
        jx += kEx[i] * v;
        jy += kEy[i] * v;
      }
      m.density[node] = rho;
      if (grid_.solid(node)) continue;
      if (!(rho > 0.0) || !std::isfinite(rho))
        throw DivergenceError("lbm: non-positive density on a pore node", iteration_);
      m.velocity.ux[node] = (jx + 0.5 * fx) / rho;
      m.velocity.uy[node] = (jy + 0.5 * fy) / rho;
    }
    return m;
  }

  VelocityField velocity() const { return moments().velocity; }

 private:
  std::size_t plane(int i) const noexcept { return static_cast<std::size_t>(i) * grid_.cells(); }

  void collide() {
    const std::size_t cells = grid_.cells();
    const double omega = 1.0 / params_.tau;
    const double fx = params_.rho0 * params_.force.x;
    const double fy = params_.rho0 * params_.force.y;
    const double source_scale = 1.0 - 0.5 * omega;
    const std::array<double, kQ> force_dot = {0.0, fx, fy, -fx, -fy, fx + fy, -fx + fy, -fx - fy, fx - fy};
    double* __restrict data = f_.data();
    const std::uint8_t* solid = grid_.occupancy().values().data();

    for (std::size_t node = 0; node < cells; ++node) {
      double f[kQ];
      for (int i = 0; i < kQ; ++i) f[i] = data[static_cast<std::size_t>(i) * cells + node];
      if (solid[node]) {
        for (int i = 1; i < kQ; ++i) data[static_cast<std::size_t>(i) * cells + node] = f[kOpposite[i]];
        continue;
      }
      const double rho = f[0] + f[1] + f[2] + f[3] + f[4] + f[5] + f[6] + f[7] + f[8];
      const double jx = f[1] - f[3] + f[5] - f[6] - f[7] + f[8];
      const double jy = f[2] - f[4] + f[5] + f[6] - f[7] - f[8];
      if (!(rho > 0.0 && rho < std::numeric_limits<double>::infinity()) || !std::isfinite(jx + jy))
        throw DivergenceError("lbm: non-finite or non-positive density", iteration_);
      const double ux = (jx + 0.5 * fx) / rho;
      const double uy = (jy + 0.5 * fy) / rho;
      const double usq = 1.5 * (ux * ux + uy * uy);
      const double uf = ux * fx + uy * fy;
      const double eu[kQ] = {0.0, ux, uy, -ux, -uy, ux + uy, -ux + uy, -ux - uy, ux - uy};
      for (int i = 0; i < kQ; ++i) {
        const double feq = kWeight[i] * rho * (1.0 + 3.0 * eu[i] + 4.5 * eu[i] * eu[i] - usq);
        const double source = source_scale * kWeight[i] * (3.0 * (force_dot[i] - uf) + 9.0 * eu[i] * force_dot[i]);
        data[static_cast<std::size_t>(i) * cells + node] = f[i] - omega * (f[i] - feq) + source;
      }
    }
  }

  // Each population plane is translated by its lattice vector with periodic wrap.
  void stream() {
    const std::size_t n = grid_.size();
    for (int i = 0; i < kQ; ++i) {
      const double* src = f_.data() + plane(i);
      double* dst = scratch_.data() + plane(i);
      const std::size_t shift = static_cast<std::size_t>(static_cast<int>(n) + kEx[i]) % n;
      for (std::size_t y = 0; y < n; ++y) {
        const std::size_t dy = (y + static_cast<std::size_t>(static_cast<int>(n) + kEy[i])) % n;
        const double* row = src + y * n;
        double* out = dst + dy * n;
        std::copy(row, row + (n - shift), out + shift);
        std::copy(row + (n - shift), row + n, out);
      }
    }
    f_.swap(scratch_);
  }

  StructureGrid grid_;
  LbmParams params_;
  std::vector<double> f_;
  std::vector<double> scratch_;
  std::int64_t iteration_ = 0;
};

/// Rest equilibrium at rho0 everywhere. The grid must percolate along x.
inline LbmState init_cold(const StructureGrid& grid, const LbmParams& params) {
  if (!percolates(grid, Axis::x)) throw DataError("lbm: structure does not percolate along the flow axis");
  LbmState state(grid, params);
  const auto rest = equilibrium(params.rho0, {0.0, 0.0});
  for (std::size_t node = 0; node < grid.cells(); ++node) state.set_node(node, rest);
  return state;
}

/// Equilibrium around the given velocity on pore nodes (speeds clamped to
/// kWarmSpeedLimit), rest equilibrium on solid nodes.
inline LbmState init_warm(const StructureGrid& grid, const VelocityField& field, const LbmParams& params) {
  require_same_size(field.size(), grid.size(), "init_warm");
  if (!field.all_finite()) throw DataError("init_warm: non-finite velocity values");
  LbmState state = init_cold(grid, params);
  for (std::size_t node = 0; node < grid.cells(); ++node) {
    if (grid.solid(node)) continue;
    Vec2 u{field.ux[node], field.uy[node]};
    const double speed = std::hypot(u.x, u.y);
    if (speed > kWarmSpeedLimit) {
      u.x *= kWarmSpeedLimit / speed;
      u.y *= kWarmSpeedLimit / speed;
    }
    state.set_node(node, equilibrium(params.rho0, u));
  }
  return state;
}

/// sqrt(sum (a - b)^2) over both components, accumulated in index order.
inline double l2_distance(const VelocityField& a, const VelocityField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.cells(); ++i) {
    const double dx = a.ux[i] - b.ux[i];
    const double dy = a.uy[i] - b.uy[i];
    s += dx * dx + dy * dy;
  }
  return std::sqrt(s);
}

inline double l2_norm(const VelocityField& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.cells(); ++i) s += a.ux[i] * a.ux[i] + a.uy[i] * a.uy[i];
  return std::sqrt(s);
}

struct Solution {
  VelocityField field;
  std::int64_t iterations = 0;
};

/// Steps until ||u_new - u_old|| < tolerance * ||u_new||, with the comparison
/// made every check_interval steps. A change below the roundoff floor
/// 64 eps sqrt(cells) also counts as converged, so a fluid at rest stops at the
/// first check. `iterations` counts the steps taken by this call.
inline Solution run_to_convergence(LbmState& state) {
  const auto& p = state.params();
  VelocityField previous = state.velocity();
  const double floor =
      64.0 * std::numeric_limits<double>::epsilon() * std::sqrt(static_cast<double>(state.grid().cells()));
  std::int64_t done = 0;
  while (done < p.max_iterations) {
    const std::int64_t burst = std::min(p.check_interval, p.max_iterations - done);
    for (std::int64_t k = 0; k < burst; ++k) state.step();
    done += burst;
    VelocityField current = state.velocity();
    const double change = l2_distance(current, previous);
    const bool settled = change < p.tolerance * l2_norm(current) || change <= floor;
    if (burst == p.check_interval && settled) return {std::move(current), done};
    previous = std::move(current);
  }
  throw NonConvergenceError(std::move(previous), done);
}

/// Cold start followed by run_to_convergence.
inline Solution solve(const StructureGrid& grid, const LbmParams& params) {
  LbmState state = init_cold(grid, params);
  return run_to_convergence(state);
}

}  // namespace porelab::lbm
