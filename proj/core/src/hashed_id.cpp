#include "kincall/hashed_id.hpp"

#include <cstring>
#include <stdexcept>

namespace kincall {

std::optional<HashedId> HashedId::parse(std::string_view hex) noexcept {
  if (hex.empty() || hex.size() > kMaxLength) return std::nullopt;
  HashedId id;
  for (std::size_t i = 0; i < hex.size(); ++i) {
    const char c = hex[i];
    const bool digit = c >= '0' && c <= '9';
    const bool lower = c >= 'a' && c <= 'f';
    if (!digit && !lower) return std::nullopt;
    id.chars_[i] = c;
  }
  id.size_ = static_cast<std::uint8_t>(hex.size());
  return id;
}

HashedId HashedId::from_hex(std::string_view hex) {
  auto id = parse(hex);
  if (!id) throw std::invalid_argument("not a hashed id: '" + std::string(hex) + "'");
  return *id;
}

std::size_t HashedId::hash() const noexcept {
  // Ids are already uniformly distributed hex, a light mix is enough.
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  std::memcpy(&lo, chars_.data(), 8);
  std::memcpy(&hi, chars_.data() + 8, 8);
  std::uint64_t h = lo * 0x9E3779B97F4A7C15ULL ^ (hi + size_) * 0xC2B2AE3D27D4EB4FULL;
  h ^= h >> 29;
  return static_cast<std::size_t>(h);
}

}  // namespace kincall
