#include "kincall/kinclass.hpp"

#include <algorithm>
#include <map>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "kincall/parallel.hpp"
#include "kincall/table_io.hpp"

namespace kincall {

std::string_view to_string(Slot slot) noexcept {
  switch (slot) {
    case Slot::kMother: return "mother";
    case Slot::kFather: return "father";
    case Slot::kDaughter: return "daughter";
    case Slot::kSon: return "son";
  }
  return "unknown";
}

std::optional<Slot> parse_slot(std::string_view text) noexcept {
  for (Slot s : kAllSlots) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

namespace {
constexpr std::array<std::string_view, 8> kCategoryNames = {
    "Mother", "QuasiMother", "Father", "QuasiFather", "Daughter", "QuasiDaughter", "Son", "QuasiSon"};
}

std::string_view to_string(RelationCategory category) noexcept {
  return kCategoryNames[static_cast<std::size_t>(category)];
}

std::optional<RelationCategory> parse_category(std::string_view text) noexcept {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == text) return static_cast<RelationCategory>(i);
  }
  return std::nullopt;
}

RelationCategory category_for(Slot slot, bool kin) noexcept {
  return static_cast<RelationCategory>(static_cast<int>(slot) * 2 + (kin ? 0 : 1));
}

bool is_kin(RelationCategory category) noexcept { return static_cast<int>(category) % 2 == 0; }

Slot slot_of(RelationCategory category) noexcept { return static_cast<Slot>(static_cast<int>(category) / 2); }

void SlotBounds::validate() const {
  const auto check = [](const AgeRange& r, const char* name) {
    if (r.min > r.max) throw std::invalid_argument(std::string("age range '") + name + "': min > max");
    if (r.min < 0) throw std::invalid_argument(std::string("age range '") + name + "': negative gap");
  };
  check(mother, "mother");
  check(father, "father");
  check(child_of_female, "child_of_female");
  check(child_of_male, "child_of_male");
}

SlotSpec slot_spec(Slot slot, Sex ego_sex, const SlotBounds& bounds) {
  SlotSpec spec;
  spec.slot = slot;
  switch (slot) {
    case Slot::kMother:
      spec.alter_sex = Sex::kFemale;
      spec.age_offset = bounds.mother;
      spec.surname_rule = SurnameRule::kEgoMaternalIsAlterPaternal;
      break;
    case Slot::kFather:
      spec.alter_sex = Sex::kMale;
      spec.age_offset = bounds.father;
      spec.surname_rule = SurnameRule::kEgoPaternalIsAlterPaternal;
      break;
    case Slot::kDaughter:
    case Slot::kSon: {
      spec.alter_sex = slot == Slot::kDaughter ? Sex::kFemale : Sex::kMale;
      const AgeRange& gap = ego_sex == Sex::kFemale ? bounds.child_of_female : bounds.child_of_male;
      spec.age_offset = {-gap.max, -gap.min};
      spec.surname_rule = ego_sex == Sex::kFemale ? SurnameRule::kEgoPaternalIsAlterMaternal
                                                  : SurnameRule::kEgoPaternalIsAlterPaternal;
      break;
    }
  }
  return spec;
}

std::vector<const AlterEntry*> demographic_filter(const Metadata& ego, std::span<const AlterEntry> alters,
                                                  const SlotSpec& spec) {
  std::vector<const AlterEntry*> out;
  for (const auto& a : alters) {
    if (!a.meta || a.meta->sex != spec.alter_sex) continue;
    if (spec.age_offset.contains(a.meta->age - ego.age)) out.push_back(&a);
  }
  return out;
}

const AlterEntry* frequency_select(std::span<const AlterEntry* const> candidates) noexcept {
  const AlterEntry* best = nullptr;
  for (const AlterEntry* c : candidates) {
    if (!best) {
      best = c;
      continue;
    }
    const auto& m = c->metrics;
    const auto& b = best->metrics;
    if (m.frequency != b.frequency) {
      if (m.frequency > b.frequency) best = c;
    } else if (m.total_sec != b.total_sec) {
      if (m.total_sec > b.total_sec) best = c;
    } else if (c->alter < best->alter) {
      best = c;
    }
  }
  return best;
}

SurnameVerdict surname_filter(const Metadata& ego, const Metadata& alter, const SlotSpec& spec) noexcept {
  const std::string* ego_token = nullptr;
  const std::string* alter_token = nullptr;
  switch (spec.surname_rule) {
    case SurnameRule::kEgoMaternalIsAlterPaternal:
      ego_token = &ego.ln_m;
      alter_token = &alter.ln_p;
      break;
    case SurnameRule::kEgoPaternalIsAlterPaternal:
      ego_token = &ego.ln_p;
      alter_token = &alter.ln_p;
      break;
    case SurnameRule::kEgoPaternalIsAlterMaternal:
      ego_token = &ego.ln_p;
      alter_token = &alter.ln_m;
      break;
  }
  if (ego_token->empty() || alter_token->empty()) return SurnameVerdict::kUnresolvable;
  return *ego_token == *alter_token ? SurnameVerdict::kKin : SurnameVerdict::kQuasi;
}

void ClassifyStats::absorb(const ClassifyStats& other) noexcept {
  egos += other.egos;
  skipped_grey += other.skipped_grey;
  assignments += other.assignments;
  unresolvable += other.unresolvable;
  overlaps += other.overlaps;
}

std::vector<KinAssignment> classify_ego(const EgoNetwork& ego, const SlotBounds& bounds, ClassifyStats* stats) {
  ClassifyStats local;
  local.egos = 1;
  std::vector<KinAssignment> out;
  for (Slot slot : kAllSlots) {
    const SlotSpec spec = slot_spec(slot, ego.ego_meta.sex, bounds);
    const auto pool = demographic_filter(ego.ego_meta, ego.alters, spec);
    const AlterEntry* chosen = frequency_select(pool);
    if (!chosen) continue;
    const auto verdict = surname_filter(ego.ego_meta, *chosen->meta, spec);
    if (verdict == SurnameVerdict::kUnresolvable) {
      ++local.unresolvable;
      continue;
    }
    KinAssignment a;
    a.ego = ego.ego;
    a.ego_sex = ego.ego_meta.sex;
    a.ego_age = ego.ego_meta.age;
    a.slot = slot;
    a.alter = chosen->alter;
    a.category = category_for(slot, verdict == SurnameVerdict::kKin);
    a.metrics = chosen->metrics;
    a.candidate_pool_size = pool.size();
    out.push_back(std::move(a));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = i + 1; j < out.size(); ++j) {
      if (out[i].alter == out[j].alter) ++local.overlaps;
    }
  }
  local.assignments = out.size();
  if (stats) stats->absorb(local);
  return out;
}

std::vector<KinAssignment> classify_graph(const CallGraph& graph, const SlotBounds& bounds, unsigned workers,
                                          ClassifyStats* stats) {
  workers = std::max(1u, workers);
  std::vector<std::vector<KinAssignment>> parts(workers);
  std::vector<ClassifyStats> part_stats(workers);
  parallel_chunks(graph.node_count(), workers, [&](std::size_t w, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (!graph.label(i)) {
        ++part_stats[w].skipped_grey;
        continue;
      }
      const auto net = ego_network(graph, i);
      if (!net) continue;
      auto got = classify_ego(*net, bounds, &part_stats[w]);
      parts[w].insert(parts[w].end(), std::make_move_iterator(got.begin()), std::make_move_iterator(got.end()));
    }
  });
  std::vector<KinAssignment> out;
  for (std::size_t w = 0; w < workers; ++w) {
    out.insert(out.end(), std::make_move_iterator(parts[w].begin()), std::make_move_iterator(parts[w].end()));
    if (stats) stats->absorb(part_stats[w]);
  }
  return out;
}

std::vector<ConfirmationRow> confirmation_ratio(std::span<const KinAssignment> assignments) {
  std::map<std::tuple<int, int, int>, std::pair<std::uint64_t, std::uint64_t>> groups;
  for (const auto& a : assignments) {
    auto& g = groups[{a.ego_age, static_cast<int>(a.ego_sex), static_cast<int>(a.slot)}];
    (a.kin() ? g.first : g.second) += 1;
  }
  std::vector<ConfirmationRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, counts] : groups) {
    const auto total = counts.first + counts.second;
    if (total == 0) continue;
    rows.push_back({std::get<0>(key), static_cast<Sex>(std::get<1>(key)), static_cast<Slot>(std::get<2>(key)),
                    counts.first, counts.second, static_cast<double>(counts.first) / static_cast<double>(total)});
  }
  return rows;
}

void write_assignments(std::ostream& out, std::span<const KinAssignment> assignments, char delim) {
  out << "ego" << delim << "ego_sex" << delim << "ego_age" << delim << "slot" << delim << "alter" << delim
      << "category" << delim << "candidate_pool_size" << delim << "frequency" << delim << "frac_of_time" << delim
      << "out_call_frac" << delim << "call_length" << delim << "total_sec\n";
  for (const auto& a : assignments) {
    out << a.ego.view() << delim << to_string(a.ego_sex) << delim << a.ego_age << delim << to_string(a.slot) << delim
        << a.alter.view() << delim << to_string(a.category) << delim << a.candidate_pool_size << delim
        << a.metrics.frequency << delim << format_double(a.metrics.frac_of_time) << delim
        << format_double(a.metrics.out_call_frac) << delim << format_double(a.metrics.call_length) << delim
        << a.metrics.total_sec << '\n';
  }
}

std::vector<KinAssignment> read_assignments(std::istream& in, char delim) {
  std::vector<KinAssignment> out;
  std::vector<std::string> header;
  for_each_row(in, delim, header, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
    const auto fail = [line_no](const char* what) {
      throw std::runtime_error("assignments line " + std::to_string(line_no) + ": " + what);
    };
    if (f.size() != 12) fail("expected 12 columns");
    KinAssignment a;
    const auto ego = HashedId::parse(f[0]);
    const auto sex = parse_sex(f[1]);
    const auto age = parse_int(f[2]);
    const auto slot = parse_slot(f[3]);
    const auto alter = HashedId::parse(f[4]);
    const auto category = parse_category(f[5]);
    const auto pool = parse_int(f[6]);
    const auto freq = parse_int(f[7]);
    const auto fot = parse_double(f[8]);
    const auto ocf = parse_double(f[9]);
    const auto cl = parse_double(f[10]);
    const auto sec = parse_int(f[11]);
    if (!ego || !sex || !age || !slot || !alter || !category || !pool || !freq || !fot || !ocf || !cl || !sec) {
      fail("unparseable field");
    }
    if (slot_of(*category) != *slot) fail("category does not match slot");
    a.ego = *ego;
    a.ego_sex = *sex;
    a.ego_age = static_cast<int>(*age);
    a.slot = *slot;
    a.alter = *alter;
    a.category = *category;
    a.candidate_pool_size = static_cast<std::size_t>(*pool);
    a.metrics.frequency = static_cast<std::uint64_t>(*freq);
    a.metrics.frac_of_time = *fot;
    a.metrics.out_call_frac = *ocf;
    a.metrics.call_length = *cl;
    a.metrics.total_sec = static_cast<std::uint64_t>(*sec);
    out.push_back(std::move(a));
  });
  return out;
}

void write_confirmation(std::ostream& out, std::span<const ConfirmationRow> rows, char delim) {
  out << "ego_age" << delim << "ego_sex" << delim << "slot" << delim << "kin" << delim << "quasi" << delim
      << "ratio\n";
  for (const auto& r : rows) {
    out << r.ego_age << delim << to_string(r.ego_sex) << delim << to_string(r.slot) << delim << r.kin << delim
        << r.quasi << delim << format_double(r.ratio) << '\n';
  }
}

}  // namespace kincall
