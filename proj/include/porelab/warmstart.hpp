#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "porelab/core.hpp"
#include "porelab/dataset.hpp"
#include "porelab/lbm.hpp"
#include "porelab/parallel.hpp"
#include "porelab/rng.hpp"
#include "porelab/stats.hpp"

namespace porelab::warmstart {

struct WarmStartResult {
  std::uint64_t id = 0;
  std::int64_t cold_iters = 0;
  std::int64_t warm_iters = 0;
  double reduction = 0.0;  // 1 - warm/cold
  double porosity = 0.0;
  bool valid = true;
  std::string note;
};

/// u -> u (1 + sigma xi) independently per pixel and component, xi ~ N(0, 1).
inline VelocityField perturb(const VelocityField& field, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ParameterError("perturb: sigma must be a finite value >= 0");
  VelocityField out = field;
  Rng rng(seed);
  std::normal_distribution<double> xi(0.0, 1.0);
  for (std::size_t i = 0; i < out.cells(); ++i) {
    out.ux[i] *= 1.0 + sigma * xi(rng);
    out.uy[i] *= 1.0 + sigma * xi(rng);
  }
  return out;
}

inline double reduction(std::int64_t cold, std::int64_t warm) {
  return 1.0 - static_cast<double>(warm) / static_cast<double>(cold);
}

namespace detail {

inline std::optional<std::int64_t> iterations_or_note(lbm::LbmState state, std::string& note, const char* label) {
  try {
    return lbm::run_to_convergence(state).iterations;
  } catch (const lbm::NonConvergenceError& e) {
    note = std::string(label) + ": " + e.what();
  } catch (const DivergenceError& e) {
    note = std::string(label) + ": " + e.what();
  }
  return std::nullopt;
}

}  // namespace detail

/// Warm run only, compared against an already known cold iteration count.
inline WarmStartResult bench_warm(const StructureGrid& grid, const VelocityField& warm_field,
                                  const lbm::LbmParams& params, std::int64_t cold_iters, std::uint64_t id = 0) {
  if (cold_iters < 1) throw ParameterError("bench_warm: cold iteration count must be >= 1");
  WarmStartResult r;
  r.id = id;
  r.porosity = grid.porosity();
  r.cold_iters = cold_iters;
  const auto warm = detail::iterations_or_note(lbm::init_warm(grid, warm_field, params), r.note, "warm");
  if (!warm) {
    r.valid = false;
    return r;
  }
  r.warm_iters = *warm;
  r.reduction = reduction(r.cold_iters, r.warm_iters);
  return r;
}

/// Cold run from rest and warm run from `warm_field`, same parameters.
inline WarmStartResult bench_pair(const StructureGrid& grid, const VelocityField& warm_field,
                                  const lbm::LbmParams& params, std::uint64_t id = 0) {
  std::string note;
  const auto cold = detail::iterations_or_note(lbm::init_cold(grid, params), note, "cold");
  if (!cold) {
    WarmStartResult r;
    r.id = id;
    r.porosity = grid.porosity();
    r.valid = false;
    r.note = note;
    return r;
  }
  return bench_warm(grid, warm_field, params, *cold, id);
}

struct SuiteOptions {
  std::size_t bootstrap_resamples = 10000;
  double level = 0.95;
  std::uint64_t bootstrap_seed = 12345;
};

struct SuiteSummary {
  std::vector<WarmStartResult> results;  // ascending id, invalid ones included
  std::size_t valid = 0;
  std::size_t faster = 0;
  bool inferential = false;  // false when fewer than 5 valid pairs
  double median = std::numeric_limits<double>::quiet_NaN();
  double q1 = std::numeric_limits<double>::quiet_NaN();
  double q3 = std::numeric_limits<double>::quiet_NaN();
  stats::Interval ci{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  stats::WilcoxonResult wilcoxon;

  double fraction_faster() const { return valid ? static_cast<double>(faster) / static_cast<double>(valid) : 0.0; }
};

inline constexpr std::size_t kMinInferentialPairs = 5;

/// Summary statistics over the valid results. Descriptive statistics need one
/// valid pair; the bootstrap interval and Wilcoxon test need five.
inline SuiteSummary summarize(std::vector<WarmStartResult> results, const SuiteOptions& opt = {}) {
  SuiteSummary s;
  s.results = std::move(results);
  std::vector<double> red, cold, warm;
  for (const auto& r : s.results) {
    if (!r.valid) continue;
    red.push_back(r.reduction);
    cold.push_back(static_cast<double>(r.cold_iters));
    warm.push_back(static_cast<double>(r.warm_iters));
    if (r.warm_iters < r.cold_iters) ++s.faster;
  }
  s.valid = red.size();
  if (red.empty()) return s;
  s.median = stats::median(red);
  s.q1 = stats::quantile(red, 0.25);
  s.q3 = stats::quantile(red, 0.75);
  if (s.valid < kMinInferentialPairs) return s;
  s.inferential = true;
  s.ci = stats::bootstrap_ci_median(red, opt.bootstrap_resamples, opt.level, opt.bootstrap_seed);
  s.wilcoxon = stats::wilcoxon_signed_rank(cold, warm);
  return s;
}

/// One benchmark case: a structure, the warm field to try and, optionally, a
/// cold iteration count already measured under the same parameters.
struct BenchCase {
  std::uint64_t id = 0;
  StructureGrid grid;
  VelocityField warm_field;
  lbm::LbmParams params;
  std::optional<std::int64_t> cold_iters;
};

inline SuiteSummary bench_suite(const std::vector<BenchCase>& cases, std::size_t jobs = 1,
                                const SuiteOptions& opt = {}, std::ostream* log = nullptr) {
  std::vector<WarmStartResult> results(cases.size());
  parallel_for(cases.size(), jobs, [&](std::size_t i) {
    const auto& c = cases[i];
    results[i] = c.cold_iters ? bench_warm(c.grid, c.warm_field, c.params, *c.cold_iters, c.id)
                              : bench_pair(c.grid, c.warm_field, c.params, c.id);
  });
  if (log)
    for (const auto& r : results)
      if (!r.valid) *log << "excluded pair " << r.id << ": " << r.note << '\n';
  return summarize(std::move(results), opt);
}

/// Cases built from dataset records with perturbed ground-truth warm fields.
/// The stored iteration count is reused as the cold baseline.
inline std::vector<BenchCase> noise_cases(const std::vector<dataset::DatasetRecord>& records, double sigma,
                                          std::uint64_t noise_seed) {
  std::vector<BenchCase> cases;
  cases.reserve(records.size());
  for (const auto& r : records) {
    BenchCase c{r.id, r.structure, perturb(r.field, sigma, derive_seed(noise_seed, r.id)), r.params, {}};
    if (r.iterations > 0) c.cold_iters = r.iterations;
    cases.push_back(std::move(c));
  }
  return cases;
}

inline void write_results_csv(std::ostream& os, const std::vector<WarmStartResult>& results) {
  os << "id,porosity,cold_iters,warm_iters,reduction,valid\n";
  for (const auto& r : results)
    os << r.id << ',' << dataset::format_double(r.porosity) << ',' << r.cold_iters << ',' << r.warm_iters << ','
       << dataset::format_double(r.reduction) << ',' << (r.valid ? 1 : 0) << '\n';
}

}  // namespace porelab::warmstart
