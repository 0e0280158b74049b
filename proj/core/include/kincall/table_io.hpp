#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kincall {

/// Splits `line` on `delim` into `fields` (views into `line`).
void split_fields(std::string_view line, char delim, std::vector<std::string_view>& fields);

std::optional<std::int64_t> parse_int(std::string_view text) noexcept;
std::optional<double> parse_double(std::string_view text) noexcept;

/// Shortest round-trip decimal form; "NA" for NaN.
std::string format_double(double value);

/// Delimiter names accepted in configs: "tab", "comma", "semicolon", "pipe"
/// or a single literal character.
char parse_delimiter(std::string_view name);

/// Writes to `<path>.tmp` and renames over `path` on commit(). An
/// uncommitted file is removed on destruction.
class AtomicFileWriter {
 public:
  explicit AtomicFileWriter(std::filesystem::path path);
  ~AtomicFileWriter();
  AtomicFileWriter(const AtomicFileWriter&) = delete;
  AtomicFileWriter& operator=(const AtomicFileWriter&) = delete;

  std::ofstream& stream() { return out_; }
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

/// BLAKE2b-256 of a file's bytes, streamed.
std::string file_digest_hex(const std::filesystem::path& path);

/// Reads a delimited table with a header row. Each callback invocation gets
/// the 1-based line number and the split fields.
template <typename RowFn>
void for_each_row(std::istream& in, char delim, std::vector<std::string>& header, RowFn&& fn) {
  std::string line;
  std::vector<std::string_view> fields;
  std::size_t line_no = 0;
  header.clear();
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    split_fields(line, delim, fields);
    if (header.empty()) {
      for (auto f : fields) header.emplace_back(f);
      continue;
    }
    fn(line_no, fields);
  }
}

}  // namespace kincall
