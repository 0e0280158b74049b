#include "kincall/registry.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_set>

#include "kincall/table_io.hpp"

namespace kincall {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_null(std::string_view s) noexcept { return s.empty() || s == "NULL"; }

bool valid_date(std::string_view s) noexcept {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(Sex sex) noexcept { return sex == Sex::kFemale ? "Female" : "Male"; }

std::optional<Sex> parse_sex(std::string_view text) noexcept {
  const auto t = lower(trim(text));
  if (t == "female" || t == "f") return Sex::kFemale;
  if (t == "male" || t == "m") return Sex::kMale;
  return std::nullopt;
}

std::string_view to_string(ContractType contract) noexcept {
  return contract == ContractType::kFamily ? "family" : "individual";
}

std::optional<ContractType> parse_contract(std::string_view text) noexcept {
  const auto t = lower(trim(text));
  if (t == "family") return ContractType::kFamily;
  if (t == "individual") return ContractType::kIndividual;
  return std::nullopt;
}

std::vector<SubscriberRecord> read_registry(std::istream& in, char delim, RegistryLoadReport* report) {
  RegistryLoadReport local;
  std::vector<SubscriberRecord> out;
  std::unordered_set<HashedId> seen;
  std::vector<std::string> header;
  for_each_row(in, delim, header, [&](std::size_t, const std::vector<std::string_view>& f) {
    ++local.rows;
    if (f.size() != 8) {
      ++local.malformed;
      return;
    }
    const auto phone = HashedId::parse(trim(f[0]));
    const auto contract = parse_contract(f[6]);
    if (!phone || !contract) {
      ++local.malformed;
      return;
    }
    if (!seen.insert(*phone).second) ++local.duplicate_phones;
    SubscriberRecord rec;
    rec.phone = *phone;
    rec.owner_id = std::string(trim(f[5]));
    if (is_null(rec.owner_id)) rec.owner_id.clear();
    rec.contract = *contract;
    const auto start = trim(f[7]);
    rec.contract_start = valid_date(start) ? std::string(start) : std::string();

    const auto ln_p = trim(f[1]);
    const auto ln_m = trim(f[2]);
    const auto sex_text = trim(f[3]);
    const auto age_text = trim(f[4]);
    const bool all_null = is_null(ln_p) && is_null(ln_m) && is_null(sex_text) && is_null(age_text);
    if (!all_null) {
      const auto sex = parse_sex(sex_text);
      const auto age = parse_int(age_text);
      const bool complete = !is_null(ln_p) && !is_null(ln_m) && sex && age && *age >= 0 && *age <= kMaxAge;
      if (complete) {
        rec.meta = Metadata{std::string(ln_p), std::string(ln_m), *sex, static_cast<int>(*age)};
      } else {
        ++local.coerced_grey;
      }
    }
    ++local.loaded;
    out.push_back(std::move(rec));
  });
  if (report) {
    report->rows += local.rows;
    report->loaded += local.loaded;
    report->malformed += local.malformed;
    report->coerced_grey += local.coerced_grey;
    report->duplicate_phones += local.duplicate_phones;
  }
  return out;
}

void write_registry(std::ostream& out, std::span<const SubscriberRecord> records, char delim) {
  out << "phone" << delim << "ln_p" << delim << "ln_m" << delim << "sex" << delim << "age" << delim << "owner_id"
      << delim << "contract" << delim << "contract_start_date\n";
  for (const auto& r : records) {
    out << r.phone.view() << delim;
    if (r.meta) {
      out << r.meta->ln_p << delim << r.meta->ln_m << delim << to_string(r.meta->sex) << delim << r.meta->age;
    } else {
      out << "NULL" << delim << "NULL" << delim << "NULL" << delim << "NULL";
    }
    out << delim << (r.owner_id.empty() ? std::string("NULL") : r.owner_id) << delim << to_string(r.contract)
        << delim << (r.contract_start.empty() ? std::string("NULL") : r.contract_start) << '\n';
  }
}

std::vector<SubscriberRecord> resolve_family_contracts(std::vector<SubscriberRecord> records,
                                                       ResolveReport* report) {
  ResolveReport local;
  std::stable_sort(records.begin(), records.end(),
                   [](const SubscriberRecord& a, const SubscriberRecord& b) { return a.phone < b.phone; });

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].contract == ContractType::kFamily) groups[records[i].owner_id].push_back(i);
  }
  // Unknown start dates sort after every real date.
  const auto start_key = [](const SubscriberRecord& r) -> std::string_view {
    return r.contract_start.empty() ? std::string_view("9999-99-99") : std::string_view(r.contract_start);
  };
  for (const auto& [owner, members] : groups) {
    ++local.family_groups;
    std::size_t keep = members.front();
    bool tie = false;
    for (std::size_t k = 1; k < members.size(); ++k) {
      const auto& cand = records[members[k]];
      const auto& best = records[keep];
      if (start_key(cand) < start_key(best)) {
        keep = members[k];
        tie = false;
      } else if (start_key(cand) == start_key(best)) {
        tie = true;  // members are in phone order, so `keep` stays the smaller id
      }
    }
    if (tie) ++local.ties;
    for (std::size_t idx : members) {
      if (idx != keep && records[idx].meta) {
        records[idx].meta.reset();
        ++local.nulled;
      }
    }
  }
  if (report) {
    report->family_groups += local.family_groups;
    report->nulled += local.nulled;
    report->ties += local.ties;
  }
  return records;
}

Registry::Registry(std::vector<SubscriberRecord> records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const SubscriberRecord& a, const SubscriberRecord& b) { return a.phone < b.phone; });
  records.erase(std::unique(records.begin(), records.end(),
                            [](const SubscriberRecord& a, const SubscriberRecord& b) { return a.phone == b.phone; }),
                records.end());
  records_ = std::move(records);
}

const SubscriberRecord* Registry::find(const HashedId& phone) const noexcept {
  const auto it = std::lower_bound(records_.begin(), records_.end(), phone,
                                   [](const SubscriberRecord& r, const HashedId& p) { return r.phone < p; });
  if (it == records_.end() || !(it->phone == phone)) return nullptr;
  return &*it;
}

const Metadata* Registry::lookup(const HashedId& phone) const noexcept {
  const auto* rec = find(phone);
  return rec && rec->meta ? &*rec->meta : nullptr;
}

std::size_t Registry::labeled_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [](const SubscriberRecord& r) { return r.labeled(); }));
}

}  // namespace kincall
