#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "kincall/lifecourse.hpp"

using namespace kincall;

namespace {

KinAssignment row(int age, Sex sex, Slot slot, bool kin, std::uint64_t freq, std::uint32_t tag) {
  KinAssignment a;
  char hex[16];
  std::snprintf(hex, sizeof hex, "%08x", tag);
  a.ego = HashedId::from_hex(hex);
  a.alter = HashedId::from_hex("ff");
  a.ego_age = age;
  a.ego_sex = sex;
  a.slot = slot;
  a.category = category_for(slot, kin);
  a.metrics.frequency = freq;
  a.metrics.total_sec = freq * 60;
  a.metrics.call_length = 60.0 + static_cast<double>(kin ? 20 : 0);
  a.metrics.frac_of_time = kin ? 0.3 : 0.1;
  a.metrics.out_call_frac = 0.5;
  return a;
}

// Every cohort populated; kin calls more often.
std::vector<KinAssignment> synthetic(std::size_t per_group, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::poisson_distribution<int> kin_calls(40);
  std::poisson_distribution<int> quasi_calls(10);
  std::vector<KinAssignment> out;
  std::uint32_t tag = 0;
  for (int age = 18; age <= 30; ++age) {
    for (auto sex : {Sex::kFemale, Sex::kMale}) {
      for (auto slot : kAllSlots) {
        const std::size_t nk = per_group;
        const std::size_t nq = per_group * (1 + static_cast<std::size_t>(age % 3));
        for (std::size_t i = 0; i < nk; ++i) out.push_back(row(age, sex, slot, true, kin_calls(rng), tag++));
        for (std::size_t i = 0; i < nq; ++i) out.push_back(row(age, sex, slot, false, quasi_calls(rng), tag++));
      }
    }
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

std::map<CohortKey, std::pair<std::size_t, std::size_t>> cohort_sizes(const std::vector<KinAssignment>& rows) {
  std::map<CohortKey, std::pair<std::size_t, std::size_t>> out;
  for (const auto& a : rows) {
    auto& c = out[{a.ego_age, a.ego_sex, a.slot}];
    (a.kin() ? c.first : c.second) += 1;
  }
  return out;
}

}  // namespace

TEST(AgeGrid, Bins) {
  AgeGrid g{18, 70, 5};
  EXPECT_EQ(g.bin_of(18), 18);
  EXPECT_EQ(g.bin_of(22), 18);
  EXPECT_EQ(g.bin_of(23), 23);
  EXPECT_EQ(g.bin_of(70), 68);
  EXPECT_FALSE(g.bin_of(17));
  EXPECT_FALSE(g.bin_of(71));
  EXPECT_EQ(g.bins().size(), 11u);
  EXPECT_THROW((AgeGrid{30, 20, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((AgeGrid{18, 70, 0}.validate()), std::invalid_argument);
}

TEST(Downsample, OperatorExampleCohort) {
  std::vector<KinAssignment> rows;
  std::uint32_t tag = 0;
  for (int i = 0; i < 5230; ++i) rows.push_back(row(23, Sex::kFemale, Slot::kMother, true, 1, tag++));
  for (int i = 0; i < 21000; ++i) rows.push_back(row(23, Sex::kFemale, Slot::kMother, false, 1, tag++));
  BalanceReport report;
  const auto out = downsample_balance(rows, 7, &report);
  const auto sizes = cohort_sizes(out);
  ASSERT_EQ(sizes.size(), 1u);
  EXPECT_EQ(sizes.begin()->second, (std::pair<std::size_t, std::size_t>{5230, 5230}));
  EXPECT_EQ(report.quasi_removed, 21000u - 5230u);
}

TEST(Downsample, ContractOnEveryCohort) {
  auto rows = synthetic(20, 1);
  // One cohort with more kin than quasi.
  for (int i = 0; i < 50; ++i) rows.push_back(row(45, Sex::kMale, Slot::kSon, true, 3, 900000u + i));
  rows.push_back(row(45, Sex::kMale, Slot::kSon, false, 3, 990000u));
  BalanceReport report;
  const auto out = downsample_balance(rows, 42, &report);
  const auto before = cohort_sizes(rows);
  const auto after = cohort_sizes(out);
  ASSERT_EQ(before.size(), after.size());
  for (const auto& [key, counts] : before) {
    const auto& got = after.at(key);
    EXPECT_EQ(got.first, counts.first);
    EXPECT_EQ(got.second, std::min(counts.first, counts.second));
  }
  ASSERT_EQ(report.quasi_short.size(), 1u);
  EXPECT_EQ(report.quasi_short[0].ego_age, 45);

  // Every kin row survives, and every kept row is an input row.
  std::set<HashedId> input_egos;
  for (const auto& a : rows) input_egos.insert(a.ego);
  std::size_t kin_out = 0;
  for (const auto& a : out) {
    EXPECT_TRUE(input_egos.count(a.ego));
    kin_out += a.kin();
  }
  std::size_t kin_in = 0;
  for (const auto& a : rows) kin_in += a.kin();
  EXPECT_EQ(kin_out, kin_in);
}

TEST(Downsample, SameSeedSameMembershipDifferentSeedDiffers) {
  const auto rows = synthetic(15, 2);
  const auto a = downsample_balance(rows, 5);
  const auto b = downsample_balance(rows, 5);
  const auto c = downsample_balance(rows, 6);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Downsample, EqualGroupsUntouched) {
  std::vector<KinAssignment> rows;
  for (std::uint32_t i = 0; i < 4; ++i) rows.push_back(row(30, Sex::kMale, Slot::kFather, i % 2 == 0, 2, i));
  BalanceReport report;
  EXPECT_EQ(downsample_balance(rows, 1, &report), rows);
  EXPECT_EQ(report.downsampled, 0u);
}

TEST(VariationTable, ConstantSeriesHaveZeroSpread) {
  std::vector<KinAssignment> rows;
  std::uint32_t tag = 0;
  for (int age = 20; age < 26; ++age) {
    for (int i = 0; i < 3; ++i) {
      rows.push_back(row(age, Sex::kFemale, Slot::kMother, true, 10, tag++));
      rows.push_back(row(age, Sex::kFemale, Slot::kMother, false, 4, tag++));
    }
  }
  const auto table = variation_table(rows, AgeGrid{}, 3);
  ASSERT_FALSE(table.empty());
  for (const auto& r : table) {
    EXPECT_EQ(r.kin_sd_of_age_means, 0.0);
    EXPECT_EQ(r.quasi_sd_of_age_means, 0.0);
    EXPECT_EQ(r.age_bins, 6u);
  }
}

TEST(VariationTable, WiderKinSeriesIsDetected) {
  std::vector<KinAssignment> rows;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::uint32_t tag = 0;
  for (int age = 18; age <= 70; ++age) {
    const double kin_level = 30.0 + 3.0 * 4.0 * z(rng);
    const double quasi_level = 30.0 + 4.0 * z(rng);
    rows.push_back(row(age, Sex::kMale, Slot::kFather, true, static_cast<std::uint64_t>(std::max(0.0, kin_level)), tag++));
    rows.push_back(row(age, Sex::kMale, Slot::kFather, false, static_cast<std::uint64_t>(std::max(0.0, quasi_level)), tag++));
  }
  const auto table = variation_table(rows, AgeGrid{}, 1);
  const auto it = std::find_if(table.begin(), table.end(), [](const VariationRow& r) {
    return r.metric == Metric::kFrequency && r.slot == Slot::kFather && r.ego_sex == Sex::kMale;
  });
  ASSERT_NE(it, table.end());
  EXPECT_GT(it->kin_sd_of_age_means, it->quasi_sd_of_age_means);
  EXPECT_LT(it->p_value, 1e-6);
}

TEST(VariationTable, SharedSeriesGivesPOne) {
  std::vector<KinAssignment> rows;
  std::uint32_t tag = 0;
  for (int age = 18; age < 40; ++age) {
    const auto f = static_cast<std::uint64_t>((age * 37) % 11);
    rows.push_back(row(age, Sex::kMale, Slot::kSon, true, f, tag++));
    rows.push_back(row(age, Sex::kMale, Slot::kSon, false, f, tag++));
  }
  for (const auto& r : variation_table(rows, AgeGrid{}, 1)) EXPECT_NEAR(r.p_value, 1.0, 1e-12);
}

TEST(VariationTable, FewerThanThreeBinsOmitted) {
  std::vector<KinAssignment> rows;
  for (std::uint32_t i = 0; i < 4; ++i) rows.push_back(row(20 + static_cast<int>(i / 2), Sex::kMale, Slot::kSon, i % 2 == 0, i, i));
  EXPECT_TRUE(variation_table(rows, AgeGrid{}, 1).empty());
}

TEST(BuildTables, CardinalityInvariantsAndDeterminism) {
  const auto rows = synthetic(40, 9);
  TableConfig config;
  config.min_cohort = 30;
  config.seed = 11;
  const auto tables = build_tables(rows, config);
  EXPECT_EQ(tables.stats.size(), 32u);
  EXPECT_EQ(tables.curves.size(), 32u);
  EXPECT_EQ(tables.variation.size(), 32u);
  for (const auto& c : tables.curves) {
    for (const auto& p : c.points) {
      EXPECT_EQ(p.difference, p.kin_mean - p.quasi_mean);
      EXPECT_GE(p.n_kin, config.min_cohort);
      EXPECT_GE(p.n_quasi, config.min_cohort);
    }
  }
  for (const auto& r : tables.curve_rows) EXPECT_GE(r.n, config.min_cohort);
  for (const auto& s : tables.stats) {
    EXPECT_GE(s.ks_stat, 0.0);
    EXPECT_LE(s.ks_stat, 1.0);
    EXPECT_EQ(s.n_kin, s.n_quasi);  // balanced
    if (s.metric == Metric::kFrequency) {
      EXPECT_GT(s.kin_mean, s.quasi_mean);
    }
  }
  for (unsigned w : {2u, 5u}) {
    config.workers = w;
    const auto again = build_tables(rows, config);
    std::ostringstream x;
    std::ostringstream y;
    write_stat_table(x, tables.stats, '\t');
    write_stat_table(y, again.stats, '\t');
    EXPECT_EQ(x.str(), y.str());
    std::ostringstream cx;
    std::ostringstream cy;
    write_curves(cx, tables.curve_rows, '\t');
    write_curves(cy, again.curve_rows, '\t');
    EXPECT_EQ(cx.str(), cy.str());
  }
}

TEST(BuildTables, EmptyCellsReported) {
  std::vector<KinAssignment> rows;
  for (std::uint32_t i = 0; i < 10; ++i) rows.push_back(row(30, Sex::kMale, Slot::kSon, i % 2 == 0, i, i));
  const auto tables = build_tables(rows, TableConfig{});
  EXPECT_EQ(tables.stats.size(), 4u);  // the four metrics of (Son, Male)
  EXPECT_FALSE(tables.omitted.empty());
}

TEST(Writers, StatTableColumns) {
  std::ostringstream out;
  write_stat_table(out, {}, '\t');
  EXPECT_EQ(out.str(),
            "Variable\tAlterType\tEgoSex\tKS\tp-val\tKin(mean)\tNon-Kin(mean)\tKin(median)\tNon-Kin(median)\tt-test\t"
            "WMW\tn_kin\tn_quasi\n");
  std::ostringstream curves;
  write_curves(curves, {}, ',');
  EXPECT_EQ(curves.str(), "metric,slot,ego_sex,kinship,age,mean,n\n");
}
