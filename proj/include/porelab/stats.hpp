#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "porelab/core.hpp"
#include "porelab/rng.hpp"

namespace porelab::stats {

/// Type-7 quantile of an already sorted sample.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ParameterError("quantile: empty input");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("quantile: p must be in [0, 1]");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Linear-interpolation (type-7) quantile.
inline double quantile(std::span<const double> xs, double p) {
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, p);
}

inline double median(std::span<const double> xs) { return quantile(xs, 0.5); }

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap interval for the median.
inline Interval bootstrap_ci_median(std::span<const double> xs, std::size_t resamples, double level,
                                   std::uint64_t seed) {
  if (xs.size() < 5) throw ParameterError("bootstrap: at least 5 observations required");
  if (resamples < 1000) throw ParameterError("bootstrap: at least 1000 resamples required");
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("bootstrap: level must be in (0, 1)");
  if (std::all_of(xs.begin(), xs.end(), [&](double v) { return v == xs.front(); })) return {xs.front(), xs.front()};

  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
  std::vector<double> medians(resamples);
  std::vector<double> draw(xs.size());
  for (auto& m : medians) {
    for (auto& d : draw) d = xs[pick(rng)];
    std::sort(draw.begin(), draw.end());
    m = quantile_sorted(draw, 0.5);
  }
  std::sort(medians.begin(), medians.end());
  const double tail = 0.5 * (1.0 - level);
  return {quantile_sorted(medians, tail), quantile_sorted(medians, 1.0 - tail)};
}

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double p_value = 1.0;    // two-sided
  std::size_t n = 0;       // pairs with non-zero difference
  bool exact = false;
  bool degenerate = false;
};

/// Midranks of |d| for the non-zero differences (1-based, ties averaged).
inline std::vector<double> signed_rank_magnitudes(std::span<const double> abs_diffs) {
  std::vector<std::size_t> order(abs_diffs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return abs_diffs[a] < abs_diffs[b]; });
  std::vector<double> ranks(abs_diffs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && abs_diffs[order[j + 1]] == abs_diffs[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline constexpr std::size_t kWilcoxonExactLimit = 25;

/// Paired two-sided Wilcoxon signed-rank test of x against y. Zero
/// differences are dropped; tied magnitudes share midranks. For n <= 25 the
/// null distribution of W+ is enumerated exactly (over doubled ranks, which
/// are integers even with ties); otherwise a normal approximation with tie
/// and continuity corrections is used. `exact_limit` moves the switch point.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                           std::size_t exact_limit = kWilcoxonExactLimit) {
  if (x.size() != y.size()) throw ParameterError("wilcoxon: samples must have equal length");
  if (x.empty()) throw ParameterError("wilcoxon: empty input");

  std::vector<double> mags;
  std::vector<bool> positive;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    if (!std::isfinite(d)) throw DataError("wilcoxon: non-finite difference");
    if (d == 0.0) continue;
    mags.push_back(std::abs(d));
    positive.push_back(d > 0.0);
  }
  WilcoxonResult res;
  res.n = mags.size();
  if (res.n == 0) {
    res.degenerate = true;
    return res;
  }
  const auto ranks = signed_rank_magnitudes(mags);
  double w_plus = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    if (positive[i]) w_plus += ranks[i];
  const double n = static_cast<double>(res.n);
  const double total = n * (n + 1.0) / 2.0;
  res.statistic = std::min(w_plus, total - w_plus);

  if (res.n <= std::min(exact_limit, std::size_t{62})) {
    res.exact = true;
    // counts[s] = number of sign assignments with 2*W+ == s.
    std::size_t max_sum = 0;
    std::vector<std::size_t> doubled(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      doubled[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
      max_sum += doubled[i];
    }
    std::vector<std::uint64_t> counts(max_sum + 1, 0);
    counts[0] = 1;
    std::size_t reach = 0;
    for (std::size_t r : doubled) {
      for (std::size_t s = reach + 1; s-- > 0;)
        if (counts[s]) counts[s + r] += counts[s];
      reach += r;
    }
    const auto observed = static_cast<std::size_t>(std::llround(2.0 * w_plus));
    std::uint64_t le = 0, ge = 0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
      if (s <= observed) le += counts[s];
      if (s >= observed) ge += counts[s];
    }
    const double denom = std::ldexp(1.0, static_cast<int>(res.n));
    res.p_value = std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / denom);
    return res;
  }

  // Tie correction: sum over tie groups of (t^3 - t) / 48.
  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += (t * t * t - t) / 48.0;
    i = j;
  }
  const double mean = total / 2.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term;
  if (var <= 0.0) {
    res.p_value = 1.0;
    return res;
  }
  const double z = std::max(0.0, std::abs(w_plus - mean) - 0.5) / std::sqrt(var);
  res.p_value = std::clamp(std::erfc(z / std::sqrt(2.0)), std::numeric_limits<double>::min(), 1.0);
  return res;
}

}  // namespace porelab::stats
