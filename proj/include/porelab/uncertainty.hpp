#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "porelab/core.hpp"
#include "porelab/pchip.hpp"
#include "porelab/stats.hpp"

namespace porelab::uncertainty {

/// One pore pixel: predicted value and residual (reference - predicted).
struct ResidualPair {
  double predicted = 0.0;
  double residual = 0.0;
};

enum class Component { magnitude, x, y };

/// One pair per pore pixel, solids skipped. For `magnitude` the value is
/// |v|; for `x`/`y` it is the signed component.
inline std::vector<ResidualPair> residuals(const VelocityField& pred, const VelocityField& ref, const StructureGrid& grid,
                                           Component component = Component::magnitude) {
  require_same_size(pred.size(), ref.size(), "residuals");
  require_same_size(pred.size(), grid.size(), "residuals");
  std::vector<ResidualPair> out;
  out.reserve(grid.pore_count());
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    if (grid.solid(i)) continue;
    double p = 0.0, r = 0.0;
    switch (component) {
      case Component::magnitude:
        p = pred.speed(i);
        r = ref.speed(i);
        break;
      case Component::x:
        p = pred.ux[i];
        r = ref.ux[i];
        break;
      case Component::y:
        p = pred.uy[i];
        r = ref.uy[i];
        break;
    }
    out.push_back({p, r - p});
  }
  return out;
}

struct BinningOptions {
  std::size_t bins = 20;
  std::size_t min_per_bin = 20;
  double lower_level = 0.05;
  double upper_level = 0.95;
};

/// Per-bin node values: center is the bin median of the predicted value.
struct QuantileNodes {
  std::vector<double> center;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::size_t> population;
  double lower_level = 0.05;
  double upper_level = 0.95;
};

/// Equal-count bins over the predicted value. The bin count is reduced until
/// each bin holds at least `min_per_bin` pairs, and neighbouring bins whose
/// centers coincide are merged so the centers are strictly increasing.
inline QuantileNodes binned_quantiles(std::vector<ResidualPair> pairs, const BinningOptions& opt = {}) {
  if (!(opt.lower_level >= 0.0 && opt.upper_level <= 1.0 && opt.lower_level <= opt.upper_level))
    throw ParameterError("binned_quantiles: levels must satisfy 0 <= lo <= hi <= 1");
  if (opt.bins < 2) throw ParameterError("binned_quantiles: at least two bins required");
  const std::size_t n = pairs.size();
  const std::size_t min_pop = std::max<std::size_t>(opt.min_per_bin, 1);
  const std::size_t bins = std::min(opt.bins, n / min_pop);
  if (bins < 2) throw DataError("binned_quantiles: fewer than two usable bins");

  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const ResidualPair& a, const ResidualPair& b) { return a.predicted < b.predicted; });

  // Bin b covers sorted indices [b*n/bins, (b+1)*n/bins).
  std::vector<std::size_t> edges;
  for (std::size_t b = 0; b <= bins; ++b) edges.push_back(b * n / bins);

  auto center_of = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> xs;
    for (std::size_t i = lo; i < hi; ++i) xs.push_back(pairs[i].predicted);
    return stats::quantile_sorted(xs, 0.5);
  };

  std::vector<double> centers;
  for (std::size_t b = 0; b < bins; ++b) centers.push_back(center_of(edges[b], edges[b + 1]));
  for (std::size_t b = 1; b < centers.size();) {
    if (centers[b] > centers[b - 1]) {
      ++b;
      continue;
    }
    edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(b));
    centers.erase(centers.begin() + static_cast<std::ptrdiff_t>(b));
    centers[b - 1] = center_of(edges[b - 1], edges[b]);
    if (b > 1) --b;
  }
  if (centers.size() < 2) throw DataError("binned_quantiles: fewer than two distinct bin centers");

  QuantileNodes nodes;
  nodes.lower_level = opt.lower_level;
  nodes.upper_level = opt.upper_level;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    std::vector<double> rs;
    for (std::size_t i = edges[b]; i < edges[b + 1]; ++i) rs.push_back(pairs[i].residual);
    std::sort(rs.begin(), rs.end());
    nodes.center.push_back(centers[b]);
    nodes.lower.push_back(stats::quantile_sorted(rs, opt.lower_level));
    nodes.upper.push_back(stats::quantile_sorted(rs, opt.upper_level));
    nodes.population.push_back(rs.size());
  }
  return nodes;
}

/// Conditional band [x + s_lo(x), x + s_hi(x)] for the reference value given
/// a predicted value x.
class QuantileBand {
 public:
  QuantileBand() = default;

  explicit QuantileBand(QuantileNodes nodes)
      : nodes_(std::move(nodes)), lower_(nodes_.center, nodes_.lower), upper_(nodes_.center, nodes_.upper) {}

  const QuantileNodes& nodes() const noexcept { return nodes_; }
  double lower_offset(double x) const { return lower_(x); }
  double upper_offset(double x) const { return upper_(x); }

  std::pair<double, double> eval(double x) const { return {x + lower_(x), x + upper_(x)}; }

  bool contains(double predicted, double reference) const {
    const auto [lo, hi] = eval(predicted);
    return lo <= reference && reference <= hi;
  }

  /// CSV with header `x,q_lo,q_hi`.
  void write_csv(std::ostream& os) const {
    os << "x,q_lo,q_hi\n" << std::setprecision(17);
    for (std::size_t i = 0; i < nodes_.center.size(); ++i)
      os << nodes_.center[i] << ',' << nodes_.lower[i] << ',' << nodes_.upper[i] << '\n';
  }

  /// Reads the CSV written by write_csv; the interpolants are refit.
  static QuantileBand read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("x,q_lo,q_hi", 0) != 0) throw DataError("band file: missing header");
    QuantileNodes nodes;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      double v[3];
      char c1 = 0, c2 = 0;
      if (!(ss >> v[0] >> c1 >> v[1] >> c2 >> v[2]) || c1 != ',' || c2 != ',' || !(ss >> std::ws).eof())
        throw DataError("band file: malformed row: " + line);
      if (!nodes.center.empty() && !(v[0] > nodes.center.back()))
        throw DataError("band file: x must be strictly increasing");
      nodes.center.push_back(v[0]);
      nodes.lower.push_back(v[1]);
      nodes.upper.push_back(v[2]);
      nodes.population.push_back(0);
    }
    if (nodes.center.size() < 2) throw DataError("band file: at least two rows required");
    return QuantileBand(std::move(nodes));
  }

 private:
  QuantileNodes nodes_;
  Pchip lower_;
  Pchip upper_;
};

inline QuantileBand fit_band(std::vector<ResidualPair> pairs, const BinningOptions& opt = {}) {
  return QuantileBand(binned_quantiles(std::move(pairs), opt));
}

/// Fraction of pairs whose reference value (predicted + residual) lies in the band.
inline double coverage(const QuantileBand& band, const std::vector<ResidualPair>& pairs) {
  if (pairs.empty()) throw DataError("coverage: empty evaluation set");
  std::size_t inside = 0;
  for (const auto& p : pairs)
    if (band.contains(p.predicted, p.predicted + p.residual)) ++inside;
  return static_cast<double>(inside) / static_cast<double>(pairs.size());
}

inline double coverage(const QuantileBand& band, const VelocityField& pred, const VelocityField& ref,
                       const StructureGrid& grid, Component component = Component::magnitude) {
  return coverage(band, residuals(pred, ref, grid, component));
}

}  // namespace porelab::uncertainty
