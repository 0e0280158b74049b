#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kincall/hashed_id.hpp"
#include "kincall/phone_hash.hpp"

namespace kincall {

/// One billing record as delivered by the operator.
struct RawCallRecord {
  std::string origin;
  std::string destination;
  std::int64_t timestamp = 0;  // seconds since 1970-01-01T00:00:00 UTC
  std::int64_t duration_sec = 0;
};

/// Half-open observation window [begin, end) in epoch seconds.
struct TimeWindow {
  std::int64_t begin = 0;
  std::int64_t end = 0;

  static TimeWindow calendar_year(int year);
  bool contains(std::int64_t t) const noexcept { return t >= begin && t < end; }
};

/// Parses "YYYY-MM-DDTHH:MM:SS" (a space may replace the 'T', a trailing
/// 'Z' is allowed).
std::optional<std::int64_t> parse_timestamp(std::string_view text) noexcept;
std::string format_timestamp(std::int64_t epoch_seconds);

/// Calls between two phones, stored once per unordered pair. Counts are
/// oriented relative to `phone_a`, the smaller id.
struct DyadAggregate {
  HashedId phone_a;
  HashedId phone_b;
  std::uint64_t out_calls = 0;  // phone_a -> phone_b
  std::uint64_t in_calls = 0;   // phone_b -> phone_a
  std::uint64_t total_sec = 0;  // both directions

  std::uint64_t calls() const noexcept { return out_calls + in_calls; }
  bool operator==(const DyadAggregate&) const = default;
};

/// Sorted by (phone_a, phone_b), one entry per pair.
using DyadSet = std::vector<DyadAggregate>;

enum class RejectReason : std::uint8_t {
  kMalformed,
  kBadPhone,
  kSelfCall,
  kNegativeDuration,
  kBadTimestamp,
  kOutOfWindow,
};
inline constexpr std::size_t kRejectReasonCount = 6;
std::string_view to_string(RejectReason reason) noexcept;

struct IngestReport {
  std::uint64_t records = 0;  // data lines seen (header excluded)
  std::uint64_t accepted = 0;
  std::uint64_t accepted_seconds = 0;
  std::array<std::uint64_t, kRejectReasonCount> rejected{};

  std::uint64_t total_rejected() const noexcept;
  void reject(RejectReason reason) noexcept { ++rejected[static_cast<std::size_t>(reason)]; }
  void absorb(const IngestReport& other) noexcept;
};

/// Single-threaded accumulation of calls into dyads. Several accumulators
/// can run on disjoint parts of a stream and be combined with absorb();
/// because every field is an integer sum the result does not depend on how
/// the stream was split.
class DyadAccumulator {
 public:
  DyadAccumulator(const PhoneHasher& hasher, TimeWindow window);

  /// Returns false (and counts the reason) when the record is rejected.
  bool add(const RawCallRecord& record);

  /// Parses one delimited line "origin, destination, timestamp, duration".
  bool add_line(std::string_view line, char delim);

  /// Adds an already pseudonymized call. `from` must differ from `to`.
  void add_call(const HashedId& from, const HashedId& to, std::uint64_t duration_sec);

  void absorb(DyadAccumulator&& other);

  /// Sorted dyad set. Leaves the accumulator empty.
  DyadSet finish();

  const IngestReport& report() const noexcept { return report_; }
  IngestReport& report() noexcept { return report_; }

 private:
  struct Key {
    HashedId a;
    HashedId b;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept { return k.a.hash() * 31 + k.b.hash(); }
  };
  struct Counts {
    std::uint64_t out = 0;
    std::uint64_t in = 0;
    std::uint64_t sec = 0;
  };

  std::optional<HashedId> hash_cached(std::string_view raw, std::string& digits);
  bool accept(std::string_view origin, std::string_view destination, std::int64_t timestamp,
              std::int64_t duration);

  const PhoneHasher* hasher_;
  TimeWindow window_;
  std::unordered_map<Key, Counts, KeyHash> table_;
  std::unordered_map<std::uint64_t, HashedId> cache_;
  std::string origin_digits_;
  std::string destination_digits_;
  IngestReport report_;
};

/// In-memory aggregation of a record sequence.
DyadSet aggregate(std::span<const RawCallRecord> records, const PhoneHasher& hasher, TimeWindow window,
                  IngestReport* report = nullptr);

struct IngestOptions {
  char delimiter = '\t';
  unsigned workers = 1;
  std::size_t block_bytes = std::size_t{32} << 20;
  TimeWindow window = TimeWindow::calendar_year(2015);
};

/// Streams delimited raw records in fixed-size blocks, splitting each block
/// across `workers` threads. Output is identical for any worker count and
/// block size. A first line starting with "origin" is treated as a header.
DyadSet aggregate_stream(std::istream& in, const PhoneHasher& hasher, const IngestOptions& options,
                         IngestReport& report);

/// Field-wise sum of two dyad sets. Throws std::logic_error if either input
/// is not canonical (unsorted, duplicated or mis-oriented pairs).
DyadSet merge(const DyadSet& lhs, const DyadSet& rhs);

/// True when sorted, unique and every pair has phone_a < phone_b.
bool is_canonical(const DyadSet& dyads) noexcept;

/// Reads the five-column aggregated format (Phone_A, Phone_B, OutCalls,
/// InCalls, Sec). Rows may come in either orientation and repeat; they are
/// canonicalized and summed.
DyadSet read_dyads(std::istream& in, char delim, IngestReport* report = nullptr);

void write_dyads(std::ostream& out, const DyadSet& dyads, char delim);

}  // namespace kincall
