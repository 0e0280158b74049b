#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "kincall/callgraph.hpp"
#include "kincall/registry.hpp"

namespace kincall {

/// Cross-generational candidate positions around an ego.
enum class Slot : std::uint8_t { kMother, kFather, kDaughter, kSon };
inline constexpr std::array<Slot, 4> kAllSlots = {Slot::kMother, Slot::kFather, Slot::kDaughter, Slot::kSon};

std::string_view to_string(Slot slot) noexcept;
std::optional<Slot> parse_slot(std::string_view text) noexcept;

enum class RelationCategory : std::uint8_t {
  kMother,
  kQuasiMother,
  kFather,
  kQuasiFather,
  kDaughter,
  kQuasiDaughter,
  kSon,
  kQuasiSon,
};

std::string_view to_string(RelationCategory category) noexcept;
std::optional<RelationCategory> parse_category(std::string_view text) noexcept;
RelationCategory category_for(Slot slot, bool kin) noexcept;
bool is_kin(RelationCategory category) noexcept;
Slot slot_of(RelationCategory category) noexcept;

/// Inclusive integer range.
struct AgeRange {
  int min = 0;
  int max = 0;
  bool contains(int v) const noexcept { return v >= min && v <= max; }
  bool operator==(const AgeRange&) const = default;
};

/// Generation gaps in years, all positive. Defaults are the standard
/// relationship definitions: mothers 15-40 older, fathers 17-42 older,
/// children 15-40 younger for female egos and 17-42 younger for male egos.
struct SlotBounds {
  AgeRange mother{15, 40};
  AgeRange father{17, 42};
  AgeRange child_of_female{15, 40};
  AgeRange child_of_male{17, 42};

  /// Throws std::invalid_argument when a range has min > max or min < 0.
  void validate() const;
  bool operator==(const SlotBounds&) const = default;
};

/// Which ego surname has to equal which alter surname for a kin label.
enum class SurnameRule : std::uint8_t {
  kEgoMaternalIsAlterPaternal,  // mother
  kEgoPaternalIsAlterPaternal,  // father; children of a male ego
  kEgoPaternalIsAlterMaternal,  // children of a female ego
};

struct SlotSpec {
  Slot slot = Slot::kMother;
  Sex alter_sex = Sex::kFemale;
  AgeRange age_offset;  // alter_age - ego_age
  SurnameRule surname_rule = SurnameRule::kEgoMaternalIsAlterPaternal;
};

SlotSpec slot_spec(Slot slot, Sex ego_sex, const SlotBounds& bounds);

struct KinAssignment {
  HashedId ego;
  Sex ego_sex = Sex::kFemale;
  int ego_age = 0;
  Slot slot = Slot::kMother;
  HashedId alter;
  RelationCategory category = RelationCategory::kMother;
  MetricTuple metrics;
  std::size_t candidate_pool_size = 0;

  bool kin() const noexcept { return is_kin(category); }
  bool operator==(const KinAssignment&) const = default;
};

/// Labeled alters of the slot's sex whose age offset lies in the slot range.
std::vector<const AlterEntry*> demographic_filter(const Metadata& ego, std::span<const AlterEntry> alters,
                                                  const SlotSpec& spec);

/// Most frequently called candidate. Ties go to more total seconds, then to
/// the smaller alter id. nullptr for an empty pool.
const AlterEntry* frequency_select(std::span<const AlterEntry* const> candidates) noexcept;

enum class SurnameVerdict : std::uint8_t { kKin, kQuasi, kUnresolvable };

/// kUnresolvable when a surname needed by the rule is missing on either side.
SurnameVerdict surname_filter(const Metadata& ego, const Metadata& alter, const SlotSpec& spec) noexcept;

struct ClassifyStats {
  std::uint64_t egos = 0;          // labeled egos with at least one edge
  std::uint64_t skipped_grey = 0;  // grey nodes not classified
  std::uint64_t assignments = 0;
  std::uint64_t unresolvable = 0;  // slots dropped for missing surnames
  std::uint64_t overlaps = 0;      // same alter selected for two slots of one ego

  void absorb(const ClassifyStats& other) noexcept;
};

/// Demographic, frequency and surname filters for each of the four slots.
/// Only the single most called child of each sex is kept; siblings of the
/// selected child are not considered. Result is in slot order and does not
/// depend on the order of ego.alters.
std::vector<KinAssignment> classify_ego(const EgoNetwork& ego, const SlotBounds& bounds,
                                        ClassifyStats* stats = nullptr);

/// classify_ego over every labeled node, in node order.
std::vector<KinAssignment> classify_graph(const CallGraph& graph, const SlotBounds& bounds, unsigned workers,
                                          ClassifyStats* stats = nullptr);

struct ConfirmationRow {
  int ego_age = 0;
  Sex ego_sex = Sex::kFemale;
  Slot slot = Slot::kMother;
  std::uint64_t kin = 0;
  std::uint64_t quasi = 0;
  double ratio = 0.0;  // kin / (kin + quasi)
};

/// Share of frequency-age-sex candidates confirmed by surnames, per
/// (ego_age, ego_sex, slot). Empty groups are omitted.
std::vector<ConfirmationRow> confirmation_ratio(std::span<const KinAssignment> assignments);

void write_assignments(std::ostream& out, std::span<const KinAssignment> assignments, char delim);
/// Throws std::runtime_error on a malformed row.
std::vector<KinAssignment> read_assignments(std::istream& in, char delim);
void write_confirmation(std::ostream& out, std::span<const ConfirmationRow> rows, char delim);

}  // namespace kincall
