#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kincall/callgraph.hpp"
#include "kincall/kinclass.hpp"

namespace kincall {

/// Ego-age bins [min_age + k * width, min_age + (k + 1) * width), clipped
/// at max_age (inclusive).
struct AgeGrid {
  int min_age = 18;
  int max_age = 70;
  int width = 1;

  /// Bin start for `age`, or nullopt outside the grid.
  std::optional<int> bin_of(int age) const noexcept;
  std::vector<int> bins() const;
  void validate() const;
};

/// Age-sex-slot cohort used for balancing.
struct CohortKey {
  int ego_age = 0;
  Sex ego_sex = Sex::kFemale;
  Slot slot = Slot::kMother;

  auto operator<=>(const CohortKey&) const = default;
};

struct BalanceReport {
  std::uint64_t cohorts = 0;
  std::uint64_t downsampled = 0;      // cohorts whose quasi group was cut
  std::uint64_t quasi_removed = 0;
  std::vector<CohortKey> quasi_short;  // quasi group smaller than kin group, left as is
};

/// Within each (age, sex, slot) cohort the quasi group is sampled without
/// replacement down to the kin group's size. Kin rows are never dropped.
/// Each cohort draws from its own generator seeded by (seed, cohort), so the
/// result depends only on the seed and the input order.
std::vector<KinAssignment> downsample_balance(std::span<const KinAssignment> assignments, std::uint64_t seed,
                                              BalanceReport* report = nullptr);

/// One point of a long-format curve file.
struct CurveRow {
  Metric metric = Metric::kFrequency;
  Slot slot = Slot::kMother;
  Sex ego_sex = Sex::kFemale;
  bool kin = true;
  int age = 0;  // bin start
  double mean = 0.0;
  std::size_t n = 0;
};

struct CurvePoint {
  int age = 0;
  double kin_mean = 0.0;
  double quasi_mean = 0.0;
  double difference = 0.0;  // kin_mean - quasi_mean
  std::size_t n_kin = 0;
  std::size_t n_quasi = 0;
};

/// Kin and quasi life-course curves of one (metric, slot, ego sex) cell,
/// restricted to bins where both groups reach the minimum cohort size.
struct LifeCourseCurve {
  Metric metric = Metric::kFrequency;
  Slot slot = Slot::kMother;
  Sex ego_sex = Sex::kFemale;
  std::vector<CurvePoint> points;
};

struct StatRow {
  Metric metric = Metric::kFrequency;
  Slot slot = Slot::kMother;
  Sex ego_sex = Sex::kFemale;
  double ks_stat = 0.0;
  double ks_p = 1.0;
  double kin_mean = 0.0;
  double quasi_mean = 0.0;
  double kin_median = 0.0;
  double quasi_median = 0.0;
  double t_p = 1.0;  // NaN when a group has fewer than two values
  double mwu_p = 1.0;
  std::size_t n_kin = 0;
  std::size_t n_quasi = 0;
};

struct VariationRow {
  Metric metric = Metric::kFrequency;
  Slot slot = Slot::kMother;
  Sex ego_sex = Sex::kFemale;
  double kin_sd_of_age_means = 0.0;
  double quasi_sd_of_age_means = 0.0;
  double p_value = 1.0;  // two-sided F test on the two per-age mean series
  double kin_total_sd = 0.0;
  double quasi_total_sd = 0.0;
  std::size_t age_bins = 0;
};

inline constexpr const char* kVariationTestName = "two-sample F test on per-age mean series";

/// Rows for every (metric, slot, ego sex) cell with at least three age bins
/// where both groups reach `min_cohort`.
std::vector<VariationRow> variation_table(std::span<const KinAssignment> assignments, const AgeGrid& grid,
                                          std::size_t min_cohort);

struct TableConfig {
  AgeGrid grid;
  std::size_t min_cohort = 30;
  bool downsample = true;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct Tables {
  std::vector<CurveRow> curve_rows;
  std::vector<LifeCourseCurve> curves;
  std::vector<StatRow> stats;
  std::vector<VariationRow> variation;
  BalanceReport balance;
  std::vector<std::string> omitted;  // human-readable notes for empty cells
};

/// Curves use every assignment; the statistical tables use the balanced set
/// when `downsample` is on. Deterministic for a given seed and any worker
/// count.
Tables build_tables(std::span<const KinAssignment> assignments, const TableConfig& config);

void write_curves(std::ostream& out, std::span<const CurveRow> rows, char delim);
void write_stat_table(std::ostream& out, std::span<const StatRow> rows, char delim);
void write_variation_table(std::ostream& out, std::span<const VariationRow> rows, char delim);

}  // namespace kincall
