#pragma once

#include <algorithm>
#include <cmath>

#include "porelab/core.hpp"
#include "porelab/lbm.hpp"

namespace porelab {

/// Macroscopic transport properties of one (structure, velocity) pair.
struct MacroProperties {
  double porosity = 0.0;
  double tortuosity = 0.0;
  double permeability = 0.0;  // pixel^2
  double mean_speed = 0.0;    // over pore pixels
  double max_speed = 0.0;     // over pore pixels

  bool operator==(const MacroProperties&) const = default;
};

/// <|v|>_P / <v_x>_P with both averages over pore pixels.
inline double tortuosity(const VelocityField& field, const StructureGrid& grid) {
  require_same_size(field.size(), grid.size(), "tortuosity");
  double speed = 0.0;
  double axial = 0.0;
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    if (grid.solid(i)) continue;
    speed += field.speed(i);
    axial += field.ux[i];
  }
  // Both sums share the pore count, so it cancels from the ratio.
  if (axial == 0.0 || !std::isfinite(axial))
    throw UndefinedTortuosityError("tortuosity: zero streamwise momentum in pore space");
  return speed / axial;
}

/// Darcy permeability k = mu <u_x>_domain / (rho0 g_x). With periodic body
/// forcing the mean pressure gradient vanishes, so the force is the only drive.
inline double permeability(const VelocityField& field, const StructureGrid& grid, const lbm::LbmParams& params) {
  require_same_size(field.size(), grid.size(), "permeability");
  if (params.force.x == 0.0) throw ParameterError("permeability: zero body force along x");
  double flux = 0.0;
  for (std::size_t i = 0; i < field.cells(); ++i) flux += field.ux[i];
  flux /= static_cast<double>(field.cells());
  return params.dynamic_viscosity() * flux / (params.rho0 * params.force.x);
}

inline MacroProperties summary(const VelocityField& field, const StructureGrid& grid, const lbm::LbmParams& params) {
  require_same_size(field.size(), grid.size(), "summary");
  MacroProperties p;
  p.porosity = grid.porosity();
  p.tortuosity = tortuosity(field, grid);
  p.permeability = permeability(field, grid, params);
  double sum = 0.0;
  std::size_t pores = 0;
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    if (grid.solid(i)) continue;
    const double s = field.speed(i);
    sum += s;
    p.max_speed = std::max(p.max_speed, s);
    ++pores;
  }
  p.mean_speed = pores ? sum / static_cast<double>(pores) : 0.0;
  return p;
}

}  // namespace porelab
