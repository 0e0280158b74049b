#include "kincall/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace kincall::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) return std::nan("");
  // Two-pass mean keeps rounding error independent of magnitude offsets.
  const double first = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double correction = 0.0;
  for (double x : xs) correction += x - first;
  return first + correction / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  double comp = 0.0;
  for (double x : xs) {
    ss += (x - m) * (x - m);
    comp += x - m;
  }
  const double n = static_cast<double>(xs.size());
  return (ss - comp * comp / n) / (n - 1.0);
}

double sample_sd(std::span<const double> xs) { return std::sqrt(sample_variance(xs)); }

double median(std::span<const double> xs) {
  if (xs.empty()) return std::nan("");
  std::vector<double> v(xs.begin(), xs.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return lower + (upper - lower) / 2.0;
}

double kolmogorov_sf(double x) {
  if (!(x > 0.0)) return 1.0;
  if (x < 1.18) {
    // Small-argument form of the CDF, which converges quickly here.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double w = std::exp(-pi2 / (8.0 * x * x));
    double cdf = 0.0;
    for (int k = 1; k <= 15; k += 2) cdf += std::pow(w, static_cast<double>(k * k));
    cdf *= std::sqrt(2.0 * std::numbers::pi) / x;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sf = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sf += sign * term;
    if (term < 1e-300) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sf, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  KsResult r;
  r.statistic = d;
  const double en = nx * ny / (nx + ny);
  r.p_value = kolmogorov_sf(std::sqrt(en) * d);
  return r;
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_t_test: each sample needs two values");
  const double ma = mean(a);
  const double mb = mean(b);
  const double va = sample_variance(a) / static_cast<double>(a.size());
  const double vb = sample_variance(b) / static_cast<double>(b.size());
  WelchResult r;
  if (va + vb == 0.0) {
    r.statistic = ma == mb ? 0.0 : std::copysign(INFINITY, ma - mb);
    r.dof = static_cast<double>(a.size() + b.size() - 2);
    r.p_value = ma == mb ? 1.0 : 0.0;
    return r;
  }
  r.statistic = (ma - mb) / std::sqrt(va + vb);
  r.dof = (va + vb) * (va + vb) /
          (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  const boost::math::students_t dist(r.dof);
  r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic))));
  return r;
}

namespace {

struct Ranked {
  std::vector<double> ranks;  // midranks of the pooled sample, a first then b
  double tie_term = 0.0;      // sum of t^3 - t over tie groups
};

Ranked pooled_ranks(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size() + b.size();
  std::vector<double> values;
  values.reserve(n);
  values.insert(values.end(), a.begin(), a.end());
  values.insert(values.end(), b.begin(), b.end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
  Ranked out;
  out.ranks.resize(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) out.ranks[order[k]] = rank;
    const double t = static_cast<double>(j - i + 1);
    out.tie_term += t * t * t - t;
    i = j + 1;
  }
  return out;
}

double u_from_rank_sum(double rank_sum, std::size_t na) {
  const double n = static_cast<double>(na);
  return rank_sum - n * (n + 1.0) / 2.0;
}

void check_nonempty(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("mann_whitney_u: empty sample");
}

}  // namespace

MannWhitneyResult mann_whitney_u_asymptotic(std::span<const double> a, std::span<const double> b) {
  check_nonempty(a, b);
  const Ranked r = pooled_ranks(a, b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double n = na + nb;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) rank_sum += r.ranks[i];
  MannWhitneyResult out;
  out.u = u_from_rank_sum(rank_sum, a.size());
  const double mu = na * nb / 2.0;
  const double var = na * nb / 12.0 * ((n + 1.0) - r.tie_term / (n * (n - 1.0)));
  if (!(var > 0.0)) {
    out.p_value = 1.0;
    return out;
  }
  const double z = (std::abs(out.u - mu) - 0.5) / std::sqrt(var);
  const boost::math::normal_distribution<double> normal;
  out.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(normal, z)));
  return out;
}

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  check_nonempty(a, b);
  const std::size_t n = a.size() + b.size();
  if (n > kExactMannWhitneyLimit) return mann_whitney_u_asymptotic(a, b);

  const Ranked r = pooled_ranks(a, b);
  const std::size_t na = a.size();
  // Midranks are multiples of 0.5; doubling keeps every sum an exact integer.
  std::vector<long> twice(n);
  for (std::size_t i = 0; i < n; ++i) twice[i] = std::lround(2.0 * r.ranks[i]);
  long observed = 0;
  for (std::size_t i = 0; i < na; ++i) observed += twice[i];
  const long total = std::accumulate(twice.begin(), twice.end(), 0L);
  // Null mean of the doubled rank sum is na * total / n.
  const long double centre =
      static_cast<long double>(na) * static_cast<long double>(total) / static_cast<long double>(n);
  const auto dev = [&](long twice_sum) { return std::fabs(static_cast<long double>(twice_sum) - centre); };
  const long double observed_dev = dev(observed);

  std::uint64_t extreme = 0;
  std::uint64_t count = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != na) continue;
    long s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) s += twice[i];
    }
    ++count;
    if (dev(s) >= observed_dev - 1e-9L) ++extreme;
  }
  MannWhitneyResult out;
  out.u = u_from_rank_sum(static_cast<double>(observed) / 2.0, na);
  out.p_value = static_cast<double>(extreme) / static_cast<double>(count);
  out.exact = true;
  return out;
}

FTestResult variance_ratio_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("variance_ratio_test: each sample needs two values");
  const double va = sample_variance(a);
  const double vb = sample_variance(b);
  FTestResult r;
  r.dof_a = static_cast<double>(a.size() - 1);
  r.dof_b = static_cast<double>(b.size() - 1);
  if (va == 0.0 && vb == 0.0) {
    r.statistic = 1.0;
    r.p_value = 1.0;
    return r;
  }
  if (vb == 0.0) {
    r.statistic = INFINITY;
    r.p_value = 0.0;
    return r;
  }
  r.statistic = va / vb;
  const boost::math::fisher_f dist(r.dof_a, r.dof_b);
  const double lower = boost::math::cdf(dist, r.statistic);
  const double upper = boost::math::cdf(boost::math::complement(dist, r.statistic));
  r.p_value = std::min(1.0, 2.0 * std::min(lower, upper));
  return r;
}

}  // namespace kincall::stats
