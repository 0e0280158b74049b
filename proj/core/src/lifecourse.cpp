#include "kincall/lifecourse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>

#include "kincall/parallel.hpp"
#include "kincall/stats.hpp"
#include "kincall/table_io.hpp"

namespace kincall {
namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t cohort_seed(std::uint64_t seed, const CohortKey& key) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(key.ego_age)));
  h = splitmix64(h ^ static_cast<std::uint64_t>(key.ego_sex));
  h = splitmix64(h ^ static_cast<std::uint64_t>(key.slot));
  return h;
}

constexpr std::array<Sex, 2> kSexes = {Sex::kFemale, Sex::kMale};

struct Cell {
  Metric metric;
  Slot slot;
  Sex sex;
};

std::vector<Cell> all_cells() {
  std::vector<Cell> cells;
  for (Metric m : kAllMetrics) {
    for (Slot s : kAllSlots) {
      for (Sex x : kSexes) cells.push_back({m, s, x});
    }
  }
  return cells;
}

std::string cell_name(const Cell& c) {
  return std::string(to_string(c.metric)) + "/" + std::string(to_string(c.slot)) + "/" +
         std::string(to_string(c.sex));
}

/// Values of one cell split by kinship and age bin.
struct BinnedValues {
  std::map<int, std::vector<double>> kin;
  std::map<int, std::vector<double>> quasi;
};

BinnedValues bin_values(std::span<const KinAssignment> assignments, const Cell& cell, const AgeGrid& grid) {
  BinnedValues out;
  for (const auto& a : assignments) {
    if (a.slot != cell.slot || a.ego_sex != cell.sex) continue;
    const auto bin = grid.bin_of(a.ego_age);
    if (!bin) continue;
    (a.kin() ? out.kin : out.quasi)[*bin].push_back(a.metrics.value(cell.metric));
  }
  return out;
}

std::vector<double> pooled(const std::map<int, std::vector<double>>& bins) {
  std::vector<double> out;
  for (const auto& [age, values] : bins) out.insert(out.end(), values.begin(), values.end());
  return out;
}

std::optional<VariationRow> variation_row(const BinnedValues& v, const Cell& cell, std::size_t min_cohort) {
  std::vector<double> kin_means;
  std::vector<double> quasi_means;
  for (const auto& [age, kin_values] : v.kin) {
    const auto it = v.quasi.find(age);
    if (it == v.quasi.end()) continue;
    if (kin_values.size() < min_cohort || it->second.size() < min_cohort) continue;
    kin_means.push_back(stats::mean(kin_values));
    quasi_means.push_back(stats::mean(it->second));
  }
  if (kin_means.size() < 3) return std::nullopt;
  VariationRow row;
  row.metric = cell.metric;
  row.slot = cell.slot;
  row.ego_sex = cell.sex;
  row.age_bins = kin_means.size();
  row.kin_sd_of_age_means = stats::sample_sd(kin_means);
  row.quasi_sd_of_age_means = stats::sample_sd(quasi_means);
  row.p_value = stats::variance_ratio_test(kin_means, quasi_means).p_value;
  row.kin_total_sd = stats::sample_sd(pooled(v.kin));
  row.quasi_total_sd = stats::sample_sd(pooled(v.quasi));
  return row;
}

}  // namespace

std::optional<int> AgeGrid::bin_of(int age) const noexcept {
  if (age < min_age || age > max_age || width <= 0) return std::nullopt;
  return min_age + (age - min_age) / width * width;
}

std::vector<int> AgeGrid::bins() const {
  std::vector<int> out;
  for (int a = min_age; a <= max_age; a += width) out.push_back(a);
  return out;
}

void AgeGrid::validate() const {
  if (width <= 0) throw std::invalid_argument("age grid: width must be positive");
  if (min_age > max_age) throw std::invalid_argument("age grid: min_age > max_age");
  if (min_age < 0 || max_age > kMaxAge) throw std::invalid_argument("age grid: ages outside [0, 120]");
}

std::vector<KinAssignment> downsample_balance(std::span<const KinAssignment> assignments, std::uint64_t seed,
                                              BalanceReport* report) {
  std::map<CohortKey, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> cohorts;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const auto& a = assignments[i];
    auto& c = cohorts[CohortKey{a.ego_age, a.ego_sex, a.slot}];
    (a.kin() ? c.first : c.second).push_back(i);
  }
  BalanceReport local;
  std::vector<char> keep(assignments.size(), 1);
  for (auto& [key, groups] : cohorts) {
    ++local.cohorts;
    const auto& kin = groups.first;
    auto& quasi = groups.second;
    if (quasi.size() < kin.size()) {
      local.quasi_short.push_back(key);
      continue;
    }
    if (quasi.size() == kin.size()) continue;
    std::mt19937_64 rng(cohort_seed(seed, key));
    std::vector<std::size_t> chosen;
    chosen.reserve(kin.size());
    std::sample(quasi.begin(), quasi.end(), std::back_inserter(chosen), kin.size(), rng);
    for (std::size_t idx : quasi) keep[idx] = 0;
    for (std::size_t idx : chosen) keep[idx] = 1;
    ++local.downsampled;
    local.quasi_removed += quasi.size() - chosen.size();
  }
  std::vector<KinAssignment> out;
  out.reserve(assignments.size() - local.quasi_removed);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (keep[i]) out.push_back(assignments[i]);
  }
  if (report) *report = std::move(local);
  return out;
}

std::vector<VariationRow> variation_table(std::span<const KinAssignment> assignments, const AgeGrid& grid,
                                          std::size_t min_cohort) {
  std::vector<VariationRow> rows;
  for (const Cell& cell : all_cells()) {
    const auto binned = bin_values(assignments, cell, grid);
    if (auto row = variation_row(binned, cell, min_cohort)) rows.push_back(*row);
  }
  return rows;
}

Tables build_tables(std::span<const KinAssignment> assignments, const TableConfig& config) {
  config.grid.validate();
  Tables tables;
  std::vector<KinAssignment> balanced_storage;
  std::span<const KinAssignment> tested = assignments;
  if (config.downsample) {
    balanced_storage = downsample_balance(assignments, config.seed, &tables.balance);
    tested = balanced_storage;
  }

  const auto cells = all_cells();
  struct CellOutput {
    std::vector<CurveRow> curve_rows;
    LifeCourseCurve curve;
    std::optional<StatRow> stat;
    std::optional<VariationRow> variation;
    std::vector<std::string> omitted;
  };
  std::vector<CellOutput> outputs(cells.size());

  parallel_chunks(cells.size(), config.workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const Cell& cell = cells[c];
      CellOutput& o = outputs[c];

      const auto all = bin_values(assignments, cell, config.grid);
      for (int age : config.grid.bins()) {
        const auto k = all.kin.find(age);
        const auto q = all.quasi.find(age);
        const std::size_t nk = k == all.kin.end() ? 0 : k->second.size();
        const std::size_t nq = q == all.quasi.end() ? 0 : q->second.size();
        if (nk >= config.min_cohort && nk > 0) {
          o.curve_rows.push_back({cell.metric, cell.slot, cell.sex, true, age, stats::mean(k->second), nk});
        }
        if (nq >= config.min_cohort && nq > 0) {
          o.curve_rows.push_back({cell.metric, cell.slot, cell.sex, false, age, stats::mean(q->second), nq});
        }
        if (nk >= config.min_cohort && nq >= config.min_cohort && nk > 0 && nq > 0) {
          CurvePoint p;
          p.age = age;
          p.kin_mean = stats::mean(k->second);
          p.quasi_mean = stats::mean(q->second);
          p.difference = p.kin_mean - p.quasi_mean;
          p.n_kin = nk;
          p.n_quasi = nq;
          o.curve.points.push_back(p);
        }
      }
      o.curve.metric = cell.metric;
      o.curve.slot = cell.slot;
      o.curve.ego_sex = cell.sex;

      const auto binned = bin_values(tested, cell, config.grid);
      const auto kin = pooled(binned.kin);
      const auto quasi = pooled(binned.quasi);
      if (kin.empty() || quasi.empty()) {
        o.omitted.push_back("stats " + cell_name(cell) + ": empty kin or quasi group");
      } else {
        StatRow row;
        row.metric = cell.metric;
        row.slot = cell.slot;
        row.ego_sex = cell.sex;
        const auto ks = stats::ks_two_sample(kin, quasi);
        row.ks_stat = ks.statistic;
        row.ks_p = ks.p_value;
        row.kin_mean = stats::mean(kin);
        row.quasi_mean = stats::mean(quasi);
        row.kin_median = stats::median(kin);
        row.quasi_median = stats::median(quasi);
        row.t_p = kin.size() >= 2 && quasi.size() >= 2 ? stats::welch_t_test(kin, quasi).p_value : std::nan("");
        row.mwu_p = stats::mann_whitney_u(kin, quasi).p_value;
        row.n_kin = kin.size();
        row.n_quasi = quasi.size();
        o.stat = row;
      }
      o.variation = variation_row(binned, cell, config.min_cohort);
      if (!o.variation) o.omitted.push_back("variation " + cell_name(cell) + ": fewer than 3 populated age bins");
    }
  });

  for (auto& o : outputs) {
    tables.curve_rows.insert(tables.curve_rows.end(), o.curve_rows.begin(), o.curve_rows.end());
    tables.curves.push_back(std::move(o.curve));
    if (o.stat) tables.stats.push_back(*o.stat);
    if (o.variation) tables.variation.push_back(*o.variation);
    tables.omitted.insert(tables.omitted.end(), o.omitted.begin(), o.omitted.end());
  }
  return tables;
}

void write_curves(std::ostream& out, std::span<const CurveRow> rows, char delim) {
  out << "metric" << delim << "slot" << delim << "ego_sex" << delim << "kinship" << delim << "age" << delim << "mean"
      << delim << "n\n";
  for (const auto& r : rows) {
    out << to_string(r.metric) << delim << to_string(r.slot) << delim << to_string(r.ego_sex) << delim
        << (r.kin ? "kin" : "quasi") << delim << r.age << delim << format_double(r.mean) << delim << r.n << '\n';
  }
}

void write_stat_table(std::ostream& out, std::span<const StatRow> rows, char delim) {
  out << "Variable" << delim << "AlterType" << delim << "EgoSex" << delim << "KS" << delim << "p-val" << delim
      << "Kin(mean)" << delim << "Non-Kin(mean)" << delim << "Kin(median)" << delim << "Non-Kin(median)" << delim
      << "t-test" << delim << "WMW" << delim << "n_kin" << delim << "n_quasi\n";
  for (const auto& r : rows) {
    out << to_string(r.metric) << delim << to_string(r.slot) << delim << to_string(r.ego_sex) << delim
        << format_double(r.ks_stat) << delim << format_double(r.ks_p) << delim << format_double(r.kin_mean) << delim
        << format_double(r.quasi_mean) << delim << format_double(r.kin_median) << delim
        << format_double(r.quasi_median) << delim << format_double(r.t_p) << delim << format_double(r.mwu_p)
        << delim << r.n_kin << delim << r.n_quasi << '\n';
  }
}

void write_variation_table(std::ostream& out, std::span<const VariationRow> rows, char delim) {
  out << "Variable" << delim << "AlterType" << delim << "EgoSex" << delim << "KinSdOfAgeMeans" << delim
      << "NonKinSdOfAgeMeans" << delim << "p-value" << delim << "KinTotalSd" << delim << "NonKinTotalSd" << delim
      << "age_bins\n";
  for (const auto& r : rows) {
    out << to_string(r.metric) << delim << to_string(r.slot) << delim << to_string(r.ego_sex) << delim
        << format_double(r.kin_sd_of_age_means) << delim << format_double(r.quasi_sd_of_age_means) << delim
        << format_double(r.p_value) << delim << format_double(r.kin_total_sd) << delim
        << format_double(r.quasi_total_sd) << delim << r.age_bins << '\n';
  }
}

}  // namespace kincall
