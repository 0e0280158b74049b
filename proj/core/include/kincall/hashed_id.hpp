#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace kincall {

/// Pseudonymized phone identifier: a fixed-length lowercase hex token.
///
/// Ordering is plain byte-lexicographic on the hex text, which is the
/// canonical order used to orient dyads and break ties.
class HashedId {
 public:
  static constexpr std::size_t kMaxLength = 32;

  HashedId() = default;

  /// Accepts 1..kMaxLength lowercase hex characters.
  static std::optional<HashedId> parse(std::string_view hex) noexcept;

  /// Like parse(), but throws std::invalid_argument.
  static HashedId from_hex(std::string_view hex);

  std::string_view view() const noexcept { return {chars_.data(), size_}; }
  std::string str() const { return std::string(view()); }
  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  // Padding bytes are '\0', which sorts below every hex digit, so comparing
  // the whole array first gives string order.
  auto operator<=>(const HashedId&) const = default;
  bool operator==(const HashedId&) const = default;

  std::size_t hash() const noexcept;

 private:
  std::array<char, kMaxLength> chars_{};
  std::uint8_t size_ = 0;
};

}  // namespace kincall

template <>
struct std::hash<kincall::HashedId> {
  std::size_t operator()(const kincall::HashedId& id) const noexcept { return id.hash(); }
};
