#pragma once

#include <cmath>
#include <cstddef>

#include "porelab/core.hpp"
#include "porelab/properties.hpp"

namespace porelab::losses {

/// Weights of the obstacle, divergence, periodicity and tortuosity terms.
struct LossWeights {
  double alpha = 5.0;
  double beta = 1.0;
  double gamma = 0.1;
  double delta = 0.01;

  void validate() const {
    if (!(alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0 && delta >= 0.0))
      throw ParameterError("loss weights must be non-negative");
  }

  bool operator==(const LossWeights&) const = default;
};

struct LossReport {
  double l_vel = 0.0;
  double l_obstacle = 0.0;
  double l_div = 0.0;
  double l_perio = 0.0;
  double l_tort = 0.0;
  double total = 0.0;
};

/// Periodic shift applied to a structure before the second prediction.
struct Translation {
  std::size_t tx = 0;
  std::size_t ty = 0;

  static Translation half(std::size_t size) { return {size / 2, size / 2}; }

  void validate(std::size_t size) const {
    if (tx >= size || ty >= size) throw ParameterError("translation must satisfy 0 <= t < L");
  }
};

/// Mean squared error over both components and the whole domain, halved.
inline double l_vel(const VelocityField& pred, const VelocityField& ref) {
  require_same_size(pred.size(), ref.size(), "l_vel");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.cells(); ++i) {
    const double dx = pred.ux[i] - ref.ux[i];
    const double dy = pred.uy[i] - ref.uy[i];
    sum += dx * dx + dy * dy;
  }
  return sum / (2.0 * static_cast<double>(pred.cells()));
}

/// Mean absolute velocity inside solids, halved; zero when there are no solids.
inline double l_obstacle(const VelocityField& pred, const StructureGrid& grid) {
  require_same_size(pred.size(), grid.size(), "l_obstacle");
  double sum = 0.0;
  std::size_t solids = 0;
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    if (!grid.solid(i)) continue;
    sum += std::abs(pred.ux[i]) + std::abs(pred.uy[i]);
    ++solids;
  }
  return solids == 0 ? 0.0 : sum / (2.0 * static_cast<double>(solids));
}

/// Forward-difference divergence with periodic wrap:
/// (u_x(x+1, y) - u_x(x, y)) + (u_y(x, y+1) - u_y(x, y)).
inline Field2D<double> divergence(const VelocityField& u) {
  const std::size_t n = u.size();
  Field2D<double> div(n, 0.0);
  for (std::size_t y = 0; y < n; ++y) {
    const std::size_t yn = (y + 1) % n;
    for (std::size_t x = 0; x < n; ++x) {
      const std::size_t xn = (x + 1) % n;
      div(x, y) = (u.ux(xn, y) - u.ux(x, y)) + (u.uy(x, yn) - u.uy(x, y));
    }
  }
  return div;
}

/// Mean squared divergence over pore pixels.
inline double l_div(const VelocityField& pred, const StructureGrid& grid) {
  require_same_size(pred.size(), grid.size(), "l_div");
  const auto div = divergence(pred);
  double sum = 0.0;
  std::size_t pores = 0;
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    if (grid.solid(i)) continue;
    sum += div[i] * div[i];
    ++pores;
  }
  return pores == 0 ? 0.0 : sum / static_cast<double>(pores);
}

/// `pred_translated` is the prediction for the structure shifted by `t`; it is
/// shifted back by -t and compared with `pred` like l_vel.
inline double l_perio(const VelocityField& pred, const VelocityField& pred_translated, Translation t) {
  require_same_size(pred.size(), pred_translated.size(), "l_perio");
  t.validate(pred.size());
  const auto back = translate(pred_translated, -static_cast<std::ptrdiff_t>(t.tx), -static_cast<std::ptrdiff_t>(t.ty));
  return l_vel(pred, back);
}

inline double l_tort(const VelocityField& pred, const StructureGrid& grid, double reference_tortuosity) {
  const double d = tortuosity(pred, grid) - reference_tortuosity;
  return d * d;
}

inline LossReport total_loss(const VelocityField& pred, const VelocityField& pred_translated, const VelocityField& ref,
                             const StructureGrid& grid, Translation t, const LossWeights& w = {}) {
  w.validate();
  require_same_size(pred.size(), ref.size(), "total_loss");
  require_same_size(pred.size(), grid.size(), "total_loss");
  LossReport r;
  r.l_vel = l_vel(pred, ref);
  r.l_obstacle = l_obstacle(pred, grid);
  r.l_div = l_div(pred, grid);
  r.l_perio = l_perio(pred, pred_translated, t);
  r.l_tort = l_tort(pred, grid, tortuosity(ref, grid));
  r.total = r.l_vel + w.alpha * r.l_obstacle + w.beta * r.l_div + w.gamma * r.l_perio + w.delta * r.l_tort;
  return r;
}

}  // namespace porelab::losses
