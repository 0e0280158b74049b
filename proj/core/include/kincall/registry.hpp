#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kincall/hashed_id.hpp"

namespace kincall {

enum class Sex : std::uint8_t { kFemale, kMale };

std::string_view to_string(Sex sex) noexcept;
/// Accepts female/male/f/m in any case.
std::optional<Sex> parse_sex(std::string_view text) noexcept;

enum class ContractType : std::uint8_t { kIndividual, kFamily };

std::string_view to_string(ContractType contract) noexcept;
std::optional<ContractType> parse_contract(std::string_view text) noexcept;

inline constexpr int kMaxAge = 120;

/// Demographic labels of a subscriber. Surnames are opaque hashed tokens
/// compared by equality only.
struct Metadata {
  std::string ln_p;  // paternal (first) surname
  std::string ln_m;  // maternal (second) surname
  Sex sex = Sex::kFemale;
  int age = 0;  // whole years on the reference date

  bool operator==(const Metadata&) const = default;
};

/// A registry row. `meta` is empty for grey nodes: labels are all present
/// or all absent.
struct SubscriberRecord {
  HashedId phone;
  std::optional<Metadata> meta;
  std::string owner_id;
  ContractType contract = ContractType::kIndividual;
  std::string contract_start;  // YYYY-MM-DD, empty when unknown

  bool labeled() const noexcept { return meta.has_value(); }
  bool operator==(const SubscriberRecord&) const = default;
};

struct RegistryLoadReport {
  std::uint64_t rows = 0;
  std::uint64_t loaded = 0;
  std::uint64_t malformed = 0;       // unusable row, dropped
  std::uint64_t coerced_grey = 0;    // partial or out-of-range labels
  std::uint64_t duplicate_phones = 0;
};

/// Columns: phone, ln_p, ln_m, sex, age, owner_id, contract,
/// contract_start_date. The literal NULL denotes a missing value.
std::vector<SubscriberRecord> read_registry(std::istream& in, char delim, RegistryLoadReport* report = nullptr);
void write_registry(std::ostream& out, std::span<const SubscriberRecord> records, char delim);

struct ResolveReport {
  std::uint64_t family_groups = 0;
  std::uint64_t nulled = 0;
  std::uint64_t ties = 0;  // groups whose earliest start date was shared
};

/// Family-plan rule: within each family-contract owner group only the phone
/// with the earliest contract start keeps its labels; every other phone of
/// the group becomes grey. Equal start dates are broken by the smaller
/// phone id. Individual contracts are untouched. Output is sorted by phone.
std::vector<SubscriberRecord> resolve_family_contracts(std::vector<SubscriberRecord> records,
                                                       ResolveReport* report = nullptr);

/// Read-only phone -> labels index. Safe for concurrent readers.
class Registry {
 public:
  Registry() = default;
  /// Later duplicates of a phone are ignored.
  explicit Registry(std::vector<SubscriberRecord> records);

  /// Labels of `phone`, or nullptr for a grey node (unknown or unlabeled).
  const Metadata* lookup(const HashedId& phone) const noexcept;
  const SubscriberRecord* find(const HashedId& phone) const noexcept;

  std::span<const SubscriberRecord> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  std::size_t labeled_count() const noexcept;

 private:
  std::vector<SubscriberRecord> records_;  // sorted by phone, unique
};

}  // namespace kincall
