#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kincall/stats.hpp"
#include "support/stat_oracles.hpp"

using namespace kincall::stats;
using namespace kincall::testing;

TEST(Descriptives, MeanVarianceMedian) {
  const std::vector<double> v = {4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(mean(v), 2.5);
  EXPECT_DOUBLE_EQ(sample_variance(v), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(median(v), 2.5);
  EXPECT_DOUBLE_EQ(median(std::vector<double>{5, 1, 3}), 3.0);
  EXPECT_EQ(sample_variance(std::vector<double>{7}), 0.0);
  EXPECT_TRUE(std::isnan(mean(std::vector<double>{})));
  const std::vector<double> shifted = {1e9 + 4, 1e9 + 1, 1e9 + 3, 1e9 + 2};
  EXPECT_NEAR(sample_variance(shifted), 5.0 / 3.0, 1e-6);
}

TEST(Kolmogorov, KnownValues) {
  // scipy.special.kolmogorov at 0.5, 1.0, 1.36, 2.0.
  EXPECT_NEAR(kolmogorov_sf(0.5), 0.9639452436648751, 1e-14);
  EXPECT_NEAR(kolmogorov_sf(1.0), 0.26999967167735456, 1e-14);
  EXPECT_NEAR(kolmogorov_sf(1.36), 0.049485876755377876, 1e-14);
  EXPECT_NEAR(kolmogorov_sf(2.0), 0.0006709252557796953, 1e-16);
  EXPECT_EQ(kolmogorov_sf(0.0), 1.0);
  // Both series agree where they meet.
  EXPECT_NEAR(kolmogorov_sf(1.18 - 1e-12), kolmogorov_sf(1.18), 1e-10);
}

TEST(KsTwoSample, SimpleCases) {
  const std::vector<double> a = {1, 2, 3};
  EXPECT_EQ(ks_two_sample(a, a).statistic, 0.0);
  EXPECT_EQ(ks_two_sample(a, std::vector<double>{10, 11, 12}).statistic, 1.0);
  EXPECT_DOUBLE_EQ(ks_two_sample(std::vector<double>{1, 2, 3, 4}, std::vector<double>{2, 3, 4, 5}).statistic, 0.25);
  EXPECT_THROW(ks_two_sample(a, std::vector<double>{}), std::invalid_argument);
}

TEST(KsTwoSample, ExactDAgainstEcdfOracleForAllSmallSizes) {
  std::mt19937_64 rng(1);
  for (std::size_t na = 1; na < 12; ++na) {
    for (std::size_t nb = 1; na + nb <= 12; ++nb) {
      for (int rep = 0; rep < 40; ++rep) {
        const auto a = draw(rng, na, rep % 2 ? 5 : 1000);
        const auto b = draw(rng, nb, rep % 2 ? 5 : 1000);
        const double d = ks_two_sample(a, b).statistic;
        const double scaled = d * static_cast<double>(na * nb);
        EXPECT_NEAR(scaled, std::round(scaled), 1e-9);
        EXPECT_EQ(std::lround(scaled), ks_scaled_oracle(a, b)) << na << "/" << nb;
      }
    }
  }
}

TEST(KsTwoSample, InvariantUnderMonotoneTransformAndSwap) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> a(30);
    std::vector<double> b(45);
    for (auto& x : a) x = z(rng);
    for (auto& x : b) x = z(rng) + 0.3;
    std::vector<double> ta(a);
    std::vector<double> tb(b);
    for (auto& x : ta) x = std::exp(3 * x) + 7;
    for (auto& x : tb) x = std::exp(3 * x) + 7;
    const auto r = ks_two_sample(a, b);
    EXPECT_EQ(ks_two_sample(ta, tb).statistic, r.statistic);
    EXPECT_EQ(ks_two_sample(b, a).statistic, r.statistic);
    EXPECT_EQ(ks_two_sample(b, a).p_value, r.p_value);
  }
}

TEST(Welch, EdgeCases) {
  const std::vector<double> a = {1, 2, 3, 4};
  EXPECT_EQ(welch_t_test(a, a).p_value, 1.0);
  EXPECT_EQ(welch_t_test(std::vector<double>{2, 2}, std::vector<double>{2, 2, 2}).p_value, 1.0);
  EXPECT_EQ(welch_t_test(std::vector<double>{2, 2}, std::vector<double>{3, 3, 3}).p_value, 0.0);
  EXPECT_THROW(welch_t_test(std::vector<double>{1}, a), std::invalid_argument);
  const std::vector<double> lo = {0, 1e-6, -1e-6, 2e-6};
  const std::vector<double> hi = {100, 100 + 1e-6, 100 - 1e-6, 100 + 2e-6};
  EXPECT_LT(welch_t_test(lo, hi).p_value, 1e-6);
}

TEST(Welch, AgreesWithQuadratureOracle) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  for (std::size_t na = 2; na < 11; ++na) {
    for (std::size_t nb = 2; na + nb <= 12; ++nb) {
      for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> a(na);
        std::vector<double> b(nb);
        for (auto& x : a) x = z(rng);
        for (auto& x : b) x = 2.0 * z(rng) + 0.5 * rep;
        const double p = welch_t_test(a, b).p_value;
        EXPECT_NEAR(p, welch_quadrature_oracle(a, b), 1e-9 + 1e-7 * p) << na << "/" << nb;
      }
    }
  }
}

TEST(Welch, OrderAndLabelInvariance) {
  std::vector<double> a = {3.1, 4.7, 1.2, 9.9, 5.5, 2.2};
  std::vector<double> b = {7.7, 8.1, 6.0, 9.4, 10.2};
  const double p = welch_t_test(a, b).p_value;
  std::reverse(a.begin(), a.end());
  std::rotate(b.begin(), b.begin() + 2, b.end());
  EXPECT_NEAR(welch_t_test(a, b).p_value, p, 1e-14);
  EXPECT_NEAR(welch_t_test(b, a).p_value, p, 1e-14);
}

TEST(MannWhitney, SmallKnownCases) {
  const auto r = mann_whitney_u(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6});
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.u, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 0.1);
  EXPECT_DOUBLE_EQ(mann_whitney_u(std::vector<double>{1, 2}, std::vector<double>{1, 2}).p_value, 1.0);
  EXPECT_THROW(mann_whitney_u(std::vector<double>{}, std::vector<double>{1}), std::invalid_argument);
}

TEST(MannWhitney, ExactPathMatchesEnumerationOnAllSmallSizes) {
  std::mt19937_64 rng(4);
  for (std::size_t na = 1; na < 12; ++na) {
    for (std::size_t nb = 1; na + nb <= 12; ++nb) {
      const int reps = na + nb >= 11 ? 6 : 25;
      for (int rep = 0; rep < reps; ++rep) {
        const auto a = draw(rng, na, rep % 3 == 0 ? 4 : 1000);
        const auto b = draw(rng, nb, rep % 3 == 0 ? 4 : 1000);
        const auto r = mann_whitney_u(a, b);
        ASSERT_TRUE(r.exact);
        EXPECT_EQ(r.u, pairwise_u(a, b));
        EXPECT_NEAR(r.p_value, mwu_enumeration_oracle(a, b), 1e-12) << na << "/" << nb;
      }
    }
  }
}

TEST(MannWhitney, LabelSwapKeepsP) {
  std::mt19937_64 rng(5);
  for (std::size_t n : {6u, 12u, 40u}) {
    const auto a = draw(rng, n / 2, 7);
    const auto b = draw(rng, n - n / 2, 7);
    EXPECT_DOUBLE_EQ(mann_whitney_u(a, b).p_value, mann_whitney_u(b, a).p_value);
  }
}

TEST(MannWhitney, LargeShiftedNormalsGiveTinyP) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z;
  std::vector<double> a(200);
  std::vector<double> b(200);
  for (auto& x : a) x = z(rng);
  for (auto& x : b) x = z(rng) + 1.5;
  const auto r = mann_whitney_u(a, b);
  EXPECT_FALSE(r.exact);
  EXPECT_LT(r.p_value, 1e-10);
}

// Exact and normal-approximation p-values for every tie-free arrangement at
// a combined size of 12, one case per split.
class MannWhitneyApproximation : public ::testing::TestWithParam<std::size_t> {};

TEST_P(MannWhitneyApproximation, WithinTwoHundredthsAtCombinedTwelve) {
  const std::size_t na = GetParam();
  const std::size_t n = 12;
  double worst = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != na) continue;
    std::vector<double> a;
    std::vector<double> b;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? a : b).push_back(static_cast<double>(i));
    const double exact = mann_whitney_u(a, b).p_value;
    const double approx = mann_whitney_u_asymptotic(a, b).p_value;
    worst = std::max(worst, std::abs(exact - approx));
  }
  EXPECT_LE(worst, 0.02) << "split " << na << "/" << n - na;
}

INSTANTIATE_TEST_SUITE_P(AllSplits, MannWhitneyApproximation, ::testing::Range<std::size_t>(1, 12));

TEST(VarianceRatio, EdgeCasesAndSymmetry) {
  const std::vector<double> a = {1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(variance_ratio_test(a, a).p_value, 1.0);
  EXPECT_EQ(variance_ratio_test(std::vector<double>{1, 1}, std::vector<double>{2, 2}).p_value, 1.0);
  EXPECT_EQ(variance_ratio_test(a, std::vector<double>{2, 2, 2}).p_value, 0.0);
  const std::vector<double> wide = {-30, 12, 40, -8, 25, -19, 3, 33};
  const auto r = variance_ratio_test(wide, a);
  EXPECT_GT(r.statistic, 1.0);
  EXPECT_DOUBLE_EQ(variance_ratio_test(a, wide).p_value, r.p_value);
  EXPECT_EQ(r.dof_a, 7.0);
  EXPECT_EQ(r.dof_b, 4.0);
}

TEST(VarianceRatio, KnownSpreadIsDetected) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  std::vector<double> kin(50);
  std::vector<double> quasi(50);
  for (auto& x : kin) x = 3.0 * z(rng);
  for (auto& x : quasi) x = z(rng);
  EXPECT_LT(variance_ratio_test(kin, quasi).p_value, 1e-6);
}

TEST(Reference, HundredLargerCasesAgreeWithScipy) {
  const auto cases = read_reference(KINCALL_STATS_REFERENCE);
  ASSERT_EQ(cases.size(), 100u);
  const double rel = 1e-6;
  auto close = [rel](double got, double want) { return std::abs(got - want) <= rel * std::abs(want); };
  for (const auto& c : cases) {
    const auto ks = ks_two_sample(c.a, c.b);
    const auto welch = welch_t_test(c.a, c.b);
    const auto mwu = mann_whitney_u(c.a, c.b);
    const auto f_test = variance_ratio_test(c.a, c.b);
    EXPECT_TRUE(close(ks.statistic, c.ks_d)) << "case " << c.id;
    EXPECT_TRUE(close(ks.p_value, c.ks_p)) << "case " << c.id << " " << ks.p_value << " vs " << c.ks_p;
    EXPECT_TRUE(close(welch.statistic, c.welch_t)) << "case " << c.id;
    EXPECT_TRUE(close(welch.p_value, c.welch_p)) << "case " << c.id << " " << welch.p_value << " vs " << c.welch_p;
    EXPECT_TRUE(close(mwu.u, c.mwu_u)) << "case " << c.id;
    EXPECT_TRUE(close(mwu.p_value, c.mwu_p)) << "case " << c.id << " " << mwu.p_value << " vs " << c.mwu_p;
    EXPECT_TRUE(close(f_test.statistic, c.f_stat)) << "case " << c.id;
    EXPECT_TRUE(close(f_test.p_value, c.f_p)) << "case " << c.id << " " << f_test.p_value << " vs " << c.f_p;
  }
}
