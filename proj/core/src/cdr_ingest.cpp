#include "kincall/cdr_ingest.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "kincall/table_io.hpp"

namespace kincall {
namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

bool parse_fixed(std::string_view s, std::size_t pos, std::size_t len, int& out) noexcept {
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    const char c = s[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

// Digits only, with the same formatting characters normalize_phone() drops.
// Returns false on garbage.
bool normalize_into(std::string_view raw, std::string& digits) {
  digits.clear();
  bool seen_plus = false;
  for (char c : raw) {
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
    } else if (c == ' ' || c == '-' || c == '.' || c == '/' || c == '(' || c == ')' || c == '\r') {
      continue;
    } else if (c == '+' && digits.empty() && !seen_plus) {
      seen_plus = true;
    } else {
      return false;
    }
  }
  return !digits.empty();
}

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

TimeWindow TimeWindow::calendar_year(int year) {
  using namespace std::chrono;
  const auto begin = sys_days{std::chrono::year{year} / January / 1};
  const auto end = sys_days{std::chrono::year{year + 1} / January / 1};
  return {begin.time_since_epoch().count() * kSecondsPerDay, end.time_since_epoch().count() * kSecondsPerDay};
}

std::optional<std::int64_t> parse_timestamp(std::string_view text) noexcept {
  text = trim(text);
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  if (text.size() != 19) return std::nullopt;
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') || text[13] != ':' ||
      text[16] != ':') {
    return std::nullopt;
  }
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!parse_fixed(text, 0, 4, y) || !parse_fixed(text, 5, 2, mo) || !parse_fixed(text, 8, 2, d) ||
      !parse_fixed(text, 11, 2, h) || !parse_fixed(text, 14, 2, mi) || !parse_fixed(text, 17, 2, s)) {
    return std::nullopt;
  }
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) return std::nullopt;
  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  return days * kSecondsPerDay + h * 3600 + mi * 60 + s;
}

std::string format_timestamp(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  std::int64_t days = epoch_seconds / kSecondsPerDay;
  std::int64_t rem = epoch_seconds % kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>(rem % 3600 / 60), static_cast<int>(rem % 60));
  return buf;
}

std::string_view to_string(RejectReason reason) noexcept {
  switch (reason) {
    case RejectReason::kMalformed: return "malformed";
    case RejectReason::kBadPhone: return "bad_phone";
    case RejectReason::kSelfCall: return "self_call";
    case RejectReason::kNegativeDuration: return "negative_duration";
    case RejectReason::kBadTimestamp: return "bad_timestamp";
    case RejectReason::kOutOfWindow: return "out_of_window";
  }
  return "unknown";
}

std::uint64_t IngestReport::total_rejected() const noexcept {
  std::uint64_t total = 0;
  for (auto r : rejected) total += r;
  return total;
}

void IngestReport::absorb(const IngestReport& other) noexcept {
  records += other.records;
  accepted += other.accepted;
  accepted_seconds += other.accepted_seconds;
  for (std::size_t i = 0; i < rejected.size(); ++i) rejected[i] += other.rejected[i];
}

DyadAccumulator::DyadAccumulator(const PhoneHasher& hasher, TimeWindow window)
    : hasher_(&hasher), window_(window) {}

std::optional<HashedId> DyadAccumulator::hash_cached(std::string_view raw, std::string& digits) {
  if (!normalize_into(raw, digits)) return std::nullopt;
  // Digit strings up to 17 long pack losslessly (value * 32 + length) into
  // a 64-bit cache key; longer ones bypass the cache.
  if (digits.size() > 17) return hasher_->hash_normalized(digits);
  std::uint64_t key = 0;
  for (char c : digits) key = key * 10 + static_cast<std::uint64_t>(c - '0');
  key = key * 32 + digits.size();
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  if (cache_.size() > (std::size_t{1} << 22)) cache_.clear();
  const HashedId id = hasher_->hash_normalized(digits);
  cache_.emplace(key, id);
  return id;
}

bool DyadAccumulator::accept(std::string_view origin, std::string_view destination, std::int64_t timestamp,
                             std::int64_t duration) {
  const auto from = hash_cached(origin, origin_digits_);
  const auto to = hash_cached(destination, destination_digits_);
  if (!from || !to) {
    report_.reject(RejectReason::kBadPhone);
    return false;
  }
  if (origin_digits_ == destination_digits_) {
    report_.reject(RejectReason::kSelfCall);
    return false;
  }
  if (duration < 0) {
    report_.reject(RejectReason::kNegativeDuration);
    return false;
  }
  if (!window_.contains(timestamp)) {
    report_.reject(RejectReason::kOutOfWindow);
    return false;
  }
  add_call(*from, *to, static_cast<std::uint64_t>(duration));
  ++report_.accepted;
  report_.accepted_seconds += static_cast<std::uint64_t>(duration);
  return true;
}

bool DyadAccumulator::add(const RawCallRecord& record) {
  ++report_.records;
  return accept(record.origin, record.destination, record.timestamp, record.duration_sec);
}

bool DyadAccumulator::add_line(std::string_view line, char delim) {
  ++report_.records;
  std::array<std::string_view, 4> f;
  std::size_t n = 0;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (n == f.size()) {
      report_.reject(RejectReason::kMalformed);
      return false;
    }
    if (pos == std::string_view::npos) {
      f[n++] = line.substr(start);
      break;
    }
    f[n++] = line.substr(start, pos - start);
    start = pos + 1;
  }
  if (n != f.size()) {
    report_.reject(RejectReason::kMalformed);
    return false;
  }
  const auto duration = parse_int(f[3]);
  if (!duration) {
    report_.reject(RejectReason::kMalformed);
    return false;
  }
  const auto timestamp = parse_timestamp(f[2]);
  if (!timestamp) {
    // Phones are still validated first so a garbage row is not reported as
    // a timestamp problem.
    std::string scratch;
    if (!normalize_into(f[0], scratch) || !normalize_into(f[1], scratch)) {
      report_.reject(RejectReason::kBadPhone);
    } else {
      report_.reject(RejectReason::kBadTimestamp);
    }
    return false;
  }
  return accept(f[0], f[1], *timestamp, *duration);
}

void DyadAccumulator::add_call(const HashedId& from, const HashedId& to, std::uint64_t duration_sec) {
  if (from < to) {
    auto& c = table_[Key{from, to}];
    ++c.out;
    c.sec += duration_sec;
  } else {
    auto& c = table_[Key{to, from}];
    ++c.in;
    c.sec += duration_sec;
  }
}

void DyadAccumulator::absorb(DyadAccumulator&& other) {
  if (table_.empty()) {
    table_ = std::move(other.table_);
  } else {
    for (const auto& [key, counts] : other.table_) {
      auto& c = table_[key];
      c.out += counts.out;
      c.in += counts.in;
      c.sec += counts.sec;
    }
  }
  other.table_.clear();
  report_.absorb(other.report_);
  other.report_ = {};
}

DyadSet DyadAccumulator::finish() {
  DyadSet out;
  out.reserve(table_.size());
  for (const auto& [key, c] : table_) out.push_back({key.a, key.b, c.out, c.in, c.sec});
  table_.clear();
  std::sort(out.begin(), out.end(), [](const DyadAggregate& x, const DyadAggregate& y) {
    return std::tie(x.phone_a, x.phone_b) < std::tie(y.phone_a, y.phone_b);
  });
  return out;
}

DyadSet aggregate(std::span<const RawCallRecord> records, const PhoneHasher& hasher, TimeWindow window,
                  IngestReport* report) {
  DyadAccumulator acc(hasher, window);
  for (const auto& r : records) acc.add(r);
  if (report) report->absorb(acc.report());
  return acc.finish();
}

namespace {

void consume_lines(DyadAccumulator& acc, std::string_view text, char delim) {
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) acc.add_line(line, delim);
    start = end + 1;
  }
}

}  // namespace

DyadSet aggregate_stream(std::istream& in, const PhoneHasher& hasher, const IngestOptions& options,
                         IngestReport& report) {
  const unsigned workers = std::max(1u, options.workers);
  std::vector<DyadAccumulator> accs;
  accs.reserve(workers);
  for (unsigned i = 0; i < workers; ++i) accs.emplace_back(hasher, options.window);

  std::vector<char> buf;
  std::size_t carry = 0;
  bool first_block = true;
  const std::size_t block = std::max<std::size_t>(options.block_bytes, 1024);

  while (true) {
    buf.resize(carry + block);
    in.read(buf.data() + carry, static_cast<std::streamsize>(block));
    const std::size_t got = static_cast<std::size_t>(in.gcount());
    const bool eof = got < block;
    const std::size_t filled = carry + got;

    std::size_t usable = filled;
    if (!eof) {
      const auto* begin = buf.data();
      std::size_t last_nl = filled;
      while (last_nl > 0 && begin[last_nl - 1] != '\n') --last_nl;
      if (last_nl == 0) {
        // A single line longer than the block; grow and keep reading.
        carry = filled;
        continue;
      }
      usable = last_nl;
    }

    std::string_view text(buf.data(), usable);
    if (first_block) {
      first_block = false;
      const auto nl = text.find('\n');
      const auto first = text.substr(0, nl);
      if (first.rfind("origin", 0) == 0) text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    }

    if (workers == 1 || text.size() < 4096) {
      consume_lines(accs[0], text, options.delimiter);
    } else {
      std::vector<std::string_view> parts;
      std::size_t start = 0;
      for (unsigned w = 0; w < workers; ++w) {
        std::size_t end = (w + 1 == workers) ? text.size() : text.size() * (w + 1) / workers;
        if (end < start) end = start;
        while (end > 0 && end < text.size() && text[end - 1] != '\n') ++end;
        parts.push_back(text.substr(start, end - start));
        start = end;
      }
      std::vector<std::thread> threads;
      threads.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] { consume_lines(accs[w], parts[w], options.delimiter); });
      }
      for (auto& t : threads) t.join();
    }

    if (eof) break;
    carry = filled - usable;
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(usable), buf.begin() + static_cast<std::ptrdiff_t>(filled),
              buf.begin());
  }

  for (unsigned w = 1; w < workers; ++w) accs[0].absorb(std::move(accs[w]));
  report.absorb(accs[0].report());
  return accs[0].finish();
}

bool is_canonical(const DyadSet& dyads) noexcept {
  for (std::size_t i = 0; i < dyads.size(); ++i) {
    if (!(dyads[i].phone_a < dyads[i].phone_b)) return false;
    if (i > 0 && !(std::tie(dyads[i - 1].phone_a, dyads[i - 1].phone_b) <
                   std::tie(dyads[i].phone_a, dyads[i].phone_b))) {
      return false;
    }
  }
  return true;
}

DyadSet merge(const DyadSet& lhs, const DyadSet& rhs) {
  if (!is_canonical(lhs) || !is_canonical(rhs)) {
    throw std::logic_error("merge: dyad set is not canonical (internal corruption)");
  }
  DyadSet out;
  out.reserve(lhs.size() + rhs.size());
  auto l = lhs.begin();
  auto r = rhs.begin();
  const auto key_less = [](const DyadAggregate& x, const DyadAggregate& y) {
    return std::tie(x.phone_a, x.phone_b) < std::tie(y.phone_a, y.phone_b);
  };
  while (l != lhs.end() || r != rhs.end()) {
    if (r == rhs.end() || (l != lhs.end() && key_less(*l, *r))) {
      out.push_back(*l++);
    } else if (l == lhs.end() || key_less(*r, *l)) {
      out.push_back(*r++);
    } else {
      DyadAggregate sum = *l++;
      sum.out_calls += r->out_calls;
      sum.in_calls += r->in_calls;
      sum.total_sec += r->total_sec;
      ++r;
      out.push_back(sum);
    }
  }
  return out;
}

DyadSet read_dyads(std::istream& in, char delim, IngestReport* report) {
  IngestReport local;
  std::vector<DyadAggregate> rows;
  std::vector<std::string> header;
  for_each_row(in, delim, header, [&](std::size_t, const std::vector<std::string_view>& f) {
    ++local.records;
    if (f.size() != 5) {
      local.reject(RejectReason::kMalformed);
      return;
    }
    const auto a = HashedId::parse(trim(f[0]));
    const auto b = HashedId::parse(trim(f[1]));
    if (!a || !b) {
      local.reject(RejectReason::kBadPhone);
      return;
    }
    if (*a == *b) {
      local.reject(RejectReason::kSelfCall);
      return;
    }
    const auto out_calls = parse_int(f[2]);
    const auto in_calls = parse_int(f[3]);
    const auto sec = parse_int(f[4]);
    if (!out_calls || !in_calls || !sec || *out_calls < 0 || *in_calls < 0 || *out_calls + *in_calls < 1) {
      local.reject(RejectReason::kMalformed);
      return;
    }
    if (*sec < 0) {
      local.reject(RejectReason::kNegativeDuration);
      return;
    }
    DyadAggregate d{*a, *b, static_cast<std::uint64_t>(*out_calls), static_cast<std::uint64_t>(*in_calls),
                    static_cast<std::uint64_t>(*sec)};
    if (*b < *a) {
      std::swap(d.phone_a, d.phone_b);
      std::swap(d.out_calls, d.in_calls);
    }
    ++local.accepted;
    local.accepted_seconds += d.total_sec;
    rows.push_back(d);
  });

  const auto key_less = [](const DyadAggregate& x, const DyadAggregate& y) {
    return std::tie(x.phone_a, x.phone_b) < std::tie(y.phone_a, y.phone_b);
  };
  std::sort(rows.begin(), rows.end(), key_less);
  DyadSet out;
  out.reserve(rows.size());
  for (const auto& d : rows) {
    if (!out.empty() && out.back().phone_a == d.phone_a && out.back().phone_b == d.phone_b) {
      out.back().out_calls += d.out_calls;
      out.back().in_calls += d.in_calls;
      out.back().total_sec += d.total_sec;
    } else {
      out.push_back(d);
    }
  }
  if (report) report->absorb(local);
  return out;
}

void write_dyads(std::ostream& out, const DyadSet& dyads, char delim) {
  out << "Phone_A" << delim << "Phone_B" << delim << "OutCalls" << delim << "InCalls" << delim << "Sec\n";
  for (const auto& d : dyads) {
    out << d.phone_a.view() << delim << d.phone_b.view() << delim << d.out_calls << delim << d.in_calls << delim
        << d.total_sec << '\n';
  }
}

}  // namespace kincall
