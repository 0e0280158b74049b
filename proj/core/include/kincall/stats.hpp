#pragma once

#include <cstddef>
#include <span>

namespace kincall::stats {

double mean(std::span<const double> xs);
/// Unbiased (n - 1) variance; 0 for fewer than two values.
double sample_variance(std::span<const double> xs);
double sample_sd(std::span<const double> xs);
double median(std::span<const double> xs);

struct KsResult {
  double statistic = 0.0;  // D = sup |F_a - F_b|
  double p_value = 1.0;
};

/// Survival function of the limiting Kolmogorov distribution, P(K > x).
double kolmogorov_sf(double x);

/// Two-sample Kolmogorov-Smirnov test; p from the asymptotic distribution of
/// sqrt(n m / (n + m)) D. Throws std::invalid_argument on an empty sample.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

struct WelchResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;  // two-sided
};

/// Welch's unequal-variance t test. Both samples need at least two values.
/// With zero variance on both sides p is 1 for equal means, 0 otherwise.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

struct MannWhitneyResult {
  double u = 0.0;  // U statistic of sample a
  double p_value = 1.0;  // two-sided
  bool exact = false;
};

inline constexpr std::size_t kExactMannWhitneyLimit = 12;

/// Wilcoxon-Mann-Whitney rank-sum test. For a combined size up to
/// kExactMannWhitneyLimit the permutation distribution is enumerated
/// (conditional on ties); above it the normal approximation with tie and
/// continuity corrections is used.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

/// Normal-approximation path only, exposed for comparison against the exact
/// path.
MannWhitneyResult mann_whitney_u_asymptotic(std::span<const double> a, std::span<const double> b);

struct FTestResult {
  double statistic = 1.0;  // var(a) / var(b)
  double dof_a = 0.0;
  double dof_b = 0.0;
  double p_value = 1.0;  // two-sided
};

/// Two-sample F test for equality of variances.
FTestResult variance_ratio_test(std::span<const double> a, std::span<const double> b);

}  // namespace kincall::stats
