#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "kincall/hashed_id.hpp"

namespace kincall {

/// Strips formatting (spaces, dashes, dots, slashes, parentheses and a
/// leading '+') and returns the digit string. Anything else, or an empty
/// result, yields nullopt.
std::optional<std::string> normalize_phone(std::string_view raw);

/// Salted pseudonymization of phone numbers.
///
/// Keyed BLAKE2b over the normalized digit string, hex encoded and
/// truncated to `hex_length` characters. The key is derived from the salt,
/// so equal (raw, salt) pairs always map to the same id.
class PhoneHasher {
 public:
  static constexpr std::size_t kDefaultHexLength = 20;

  explicit PhoneHasher(std::string_view salt, std::size_t hex_length = kDefaultHexLength);

  /// nullopt for empty or garbage input.
  std::optional<HashedId> hash(std::string_view raw) const;

  /// Hashes an already-normalized digit string.
  HashedId hash_normalized(std::string_view digits) const;

  std::size_t hex_length() const noexcept { return hex_length_; }

 private:
  std::array<unsigned char, 32> key_{};
  std::size_t hex_length_;
};

/// Free-function form used by tests and tools.
std::optional<HashedId> hash_phone(std::string_view raw, std::string_view salt,
                                   std::size_t hex_length = PhoneHasher::kDefaultHexLength);

/// BLAKE2b-256 hex digest of a byte string (used for manifest checksums).
std::string digest_hex(std::string_view bytes);

}  // namespace kincall
