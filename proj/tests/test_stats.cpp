#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "porelab/stats.hpp"
#include "stats_oracles.hpp"

using namespace porelab;
using namespace porelab::stats;

namespace {

/// Type-7 quantile from the 1-based textbook definition.
double oracle_quantile(std::vector<double> xs, double p) {
  std::sort(xs.begin(), xs.end());
  const double h = 1.0 + (static_cast<double>(xs.size()) - 1.0) * p;
  const auto j = static_cast<std::size_t>(h);
  if (j >= xs.size()) return xs.back();
  return xs[j - 1] + (h - static_cast<double>(j)) * (xs[j] - xs[j - 1]);
}

}  // namespace

TEST(Quantile, SpecExamples) {
  const std::vector<double> xs = {1, 2, 3, 4, 5};
  EXPECT_EQ(quantile(xs, 0.5), 3.0);
  EXPECT_EQ(quantile(xs, 0.0), 1.0);
  EXPECT_EQ(quantile(xs, 1.0), 5.0);
  EXPECT_EQ(quantile(xs, 0.25), 2.0);
  EXPECT_EQ(quantile(std::vector<double>{1, 2}, 0.5), 1.5);
  EXPECT_THROW(quantile(std::vector<double>{}, 0.5), ParameterError);
  EXPECT_THROW(quantile(xs, 1.5), ParameterError);
}

TEST(Quantile, MatchesOracle) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> xs(1 + rep % 37);
    for (auto& v : xs) v = g(rng);
    for (double p : {0.0, 0.05, 0.1, 0.25, 0.333, 0.5, 0.75, 0.9, 0.95, 1.0})
      EXPECT_NEAR(quantile(xs, p), oracle_quantile(xs, p), 1e-14);
  }
}

TEST(Bootstrap, ConstantInput) {
  const std::vector<double> xs(10, 2.5);
  const auto ci = bootstrap_ci_median(xs, 1000, 0.95, 1);
  EXPECT_EQ(ci.lo, 2.5);
  EXPECT_EQ(ci.hi, 2.5);
}

TEST(Bootstrap, Preconditions) {
  const std::vector<double> four = {1, 2, 3, 4};
  EXPECT_THROW(bootstrap_ci_median(four, 1000, 0.95, 1), ParameterError);
  const std::vector<double> five = {1, 2, 3, 4, 5};
  EXPECT_THROW(bootstrap_ci_median(five, 999, 0.95, 1), ParameterError);
  EXPECT_THROW(bootstrap_ci_median(five, 1000, 1.0, 1), ParameterError);
}

TEST(Bootstrap, DeterministicAndNestedInLevel) {
  std::mt19937_64 rng(2);
  std::exponential_distribution<double> e;
  std::vector<double> xs(60);
  for (auto& v : xs) v = e(rng);
  const auto a = bootstrap_ci_median(xs, 2000, 0.9, 5);
  const auto b = bootstrap_ci_median(xs, 2000, 0.9, 5);
  EXPECT_EQ(a.lo, b.lo);
  EXPECT_EQ(a.hi, b.hi);
  const auto wide = bootstrap_ci_median(xs, 2000, 0.99, 5);
  EXPECT_LE(wide.lo, a.lo);
  EXPECT_GE(wide.hi, a.hi);
  EXPECT_LE(a.lo, median(xs));
  EXPECT_GE(a.hi, median(xs));
}

TEST(Bootstrap, CalibratedOnNormalSamples) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  int contains = 0;
  const int reps = 400;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<double> xs(501);
    for (auto& v : xs) v = g(rng);
    const auto ci = bootstrap_ci_median(xs, 1000, 0.95, 100 + static_cast<std::uint64_t>(rep));
    contains += ci.lo <= 0.0 && 0.0 <= ci.hi;
  }
  const double rate = static_cast<double>(contains) / reps;
  EXPECT_GE(rate, 0.92);
  EXPECT_LE(rate, 0.98);
}

TEST(Wilcoxon, IdenticalSamplesAreDegenerate) {
  const std::vector<double> x = {1, 2, 3, 4, 5, 6};
  const auto r = wilcoxon_signed_rank(x, x);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_EQ(r.n, 0u);
}

TEST(Wilcoxon, Preconditions) {
  EXPECT_THROW(wilcoxon_signed_rank(std::vector<double>{1, 2}, std::vector<double>{1}), ParameterError);
  EXPECT_THROW(wilcoxon_signed_rank(std::vector<double>{}, std::vector<double>{}), ParameterError);
}

TEST(Wilcoxon, KnownSmallCase) {
  // All five differences positive: W- = 0, p = 2 / 32.
  const std::vector<double> x = {2, 3, 4, 5, 6}, y = {1, 1, 1, 1, 1};
  const auto r = wilcoxon_signed_rank(x, y);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p_value, 0.0625);
}

TEST(Wilcoxon, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> small(-4, 4);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 400; ++rep) {
    const std::size_t n = 1 + static_cast<std::size_t>(rep) % 14;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rep % 2) {
        x[i] = small(rng);
        y[i] = small(rng);
      } else {
        x[i] = g(rng) + 0.3;
        y[i] = g(rng);
      }
    }
    EXPECT_EQ(wilcoxon_signed_rank(x, y).p_value, oracle::wilcoxon_p(x, y)) << "rep " << rep;
  }
}

TEST(Wilcoxon, SymmetricInArguments) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (std::size_t n : {6u, 20u, 40u, 100u}) {
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = g(rng) + 0.2;
      y[i] = g(rng);
    }
    EXPECT_EQ(wilcoxon_signed_rank(x, y).p_value, wilcoxon_signed_rank(y, x).p_value);
    const auto r = wilcoxon_signed_rank(x, y);
    EXPECT_GT(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
    EXPECT_EQ(r.exact, n <= kWilcoxonExactLimit);
  }
}

TEST(Wilcoxon, ExactAndNormalAgreeAtTwentyFive) {
  // The continuity-corrected normal tail overstates small p-values (+20% at
  // p = 0.009, +125% at p = 4e-4), so the 10% agreement is checked where
  // p >= 0.02.
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> shift(0.0, 0.6);
  int compared = 0;
  for (int rep = 0; rep < 500; ++rep) {
    const double s = shift(rng);
    std::vector<double> x(25), y(25);
    for (std::size_t i = 0; i < 25; ++i) {
      x[i] = g(rng) + s;
      y[i] = g(rng);
    }
    const auto exact = wilcoxon_signed_rank(x, y);
    const auto approx = wilcoxon_signed_rank(x, y, 0);
    ASSERT_TRUE(exact.exact);
    ASSERT_FALSE(approx.exact);
    EXPECT_EQ(exact.statistic, approx.statistic);
    if (exact.p_value < 0.02) continue;
    ++compared;
    EXPECT_NEAR(approx.p_value / exact.p_value, 1.0, 0.10) << "p_exact " << exact.p_value;
  }
  EXPECT_GT(compared, 250);
}

TEST(Wilcoxon, NormalApproximationReferenceValues) {
  // Two-sided p with continuity and tie corrections, zeros dropped, from an
  // independent implementation.
  struct Case {
    std::vector<double> x, y;
    double p, w;
    std::size_t n;
  };
  const std::vector<Case> cases = {
      {{0.40123, 0.698746, 0.125862, -0.490592, -0.054671, -0.591647, 0.460144, 1.740215, -0.092207, -0.220475,
        0.889842, 0.756887, 0.505414, -0.530468, 0.370748, 1.095303, -0.944215, -0.057616, -1.501223, -0.889538,
        -1.441735, 0.164909, -0.867446, 0.671264, 0.556751, 0.213069, -2.11676, -0.138693, 0.351499, 0.513309},
       {-1.530136, -0.477753, -0.978519, -0.808837, 1.060899, -0.807535, -0.032522, 0.88439, -0.5836, -0.111702,
        0.110464, 0.063782, -1.225056, 0.07614, 1.358823, -1.547145, 0.859383, 0.119354, -0.64147, 2.000417, 0.76226,
        -1.199289, 0.074516, 0.57669, -0.188782, 0.68291, -0.066517, 0.667248, 1.438523, -0.675662},
       0.9507977437491857, 229.0, 30},
      {{0, 1, 0, 2, 4, -3, 1, -1, -1, -2, -4, -1, 3, -4, -1, 4, 4, -3, -4, 2,
        -4, -2, 0, 3, -4, 1, 0, -3, 3, 3, 0, 4, 1, 4, 4, 1, -2, -3, 1, -3},
       {3, 5, -2, 1, -4, -3, -1, 4, 5, 2, 1, 1, -4, -1, 5, 0, -2, -2, 3, -4,
        5, 4, 1, 0, 3, 1, 0, -1, 0, 3, -4, -4, 3, -1, 4, -4, 5, -3, 0, 5},
       0.44599749323156845, 252.5, 34},
      {{-0.03, -0.09, 0.016, 0.224, -0.083, -0.062, 0.021, 0.049, -0.018, -0.021, 0.07, 0.052, -0.103, -0.008, 0.004,
        -0.105, 0.026, -0.086, 0.097, 0.019, 0.009, -0.059, -0.012, -0.2, -0.113, 0.036, -0.213, 0.085, -0.175, 0.076,
        -0.085, 0.078, 0.013, -0.154, 0.125, 0.144, -0.007, -0.027, -0.016, -0.098, 0.11, -0.054, -0.005, -0.079,
        -0.063, -0.128, 0.126, -0.015, 0.097, 0.001, -0.069, -0.033, -0.056, 0.001, -0.038, -0.03, -0.138, -0.081,
        0.165, -0.067},
       {-0.07, -0.06, 0.1, 0.16, -0.08, -0.08, -0.06, 0.1, -0.01, -0.01, 0.04, 0.08, -0.12, -0.01, -0.04, -0.16, 0.1,
        -0.1, 0.12, 0.03, -0.0, -0.07, 0.03, -0.21, -0.11, 0.05, -0.14, 0.13, -0.15, 0.06, -0.14, 0.14, 0.07, -0.15,
        0.16, 0.19, 0.04, 0.03, -0.03, -0.01, 0.06, -0.0, 0.03, -0.03, 0.04, -0.04, 0.08, -0.09, 0.15, -0.04, -0.06,
        0.02, -0.13, -0.09, -0.02, -0.02, -0.14, -0.07, 0.13, -0.13},
       0.23738299682282948, 754.0, 60},
  };
  for (const auto& c : cases) {
    const auto r = wilcoxon_signed_rank(c.x, c.y);
    EXPECT_FALSE(r.exact);
    EXPECT_EQ(r.n, c.n);
    EXPECT_EQ(r.statistic, c.w);
    EXPECT_NEAR(r.p_value, c.p, 1e-12 * c.p);
  }
}

TEST(Wilcoxon, LargeSampleDetectsShift) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  std::vector<double> x(200), y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    y[i] = g(rng);
    x[i] = y[i] + 0.5 + 0.5 * g(rng);
  }
  const auto r = wilcoxon_signed_rank(x, y);
  EXPECT_FALSE(r.exact);
  EXPECT_LT(r.p_value, 1e-10);
  EXPECT_GT(r.p_value, 0.0);
}
