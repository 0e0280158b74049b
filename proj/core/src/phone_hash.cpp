#include "kincall/phone_hash.hpp"

#include <sodium.h>

#include <mutex>
#include <stdexcept>

namespace kincall {
namespace {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  });
}

constexpr char kHex[] = "0123456789abcdef";

}  // namespace

std::optional<std::string> normalize_phone(std::string_view raw) {
  std::string digits;
  digits.reserve(raw.size());
  bool seen_plus = false;
  for (char c : raw) {
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
    } else if (c == ' ' || c == '-' || c == '.' || c == '/' || c == '(' || c == ')' || c == '\r') {
      continue;
    } else if (c == '+' && digits.empty() && !seen_plus) {
      seen_plus = true;
    } else {
      return std::nullopt;
    }
  }
  if (digits.empty()) return std::nullopt;
  return digits;
}

PhoneHasher::PhoneHasher(std::string_view salt, std::size_t hex_length) : hex_length_(hex_length) {
  if (hex_length < 8 || hex_length > HashedId::kMaxLength) {
    throw std::invalid_argument("hash hex length must be within [8, 32]");
  }
  ensure_sodium();
  crypto_generichash(key_.data(), key_.size(), reinterpret_cast<const unsigned char*>(salt.data()),
                     salt.size(), nullptr, 0);
}

HashedId PhoneHasher::hash_normalized(std::string_view digits) const {
  std::array<unsigned char, 16> out{};
  crypto_generichash(out.data(), out.size(), reinterpret_cast<const unsigned char*>(digits.data()),
                     digits.size(), key_.data(), key_.size());
  std::array<char, 32> hex{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    hex[2 * i] = kHex[out[i] >> 4];
    hex[2 * i + 1] = kHex[out[i] & 0x0f];
  }
  return *HashedId::parse(std::string_view(hex.data(), hex_length_));
}

std::optional<HashedId> PhoneHasher::hash(std::string_view raw) const {
  auto digits = normalize_phone(raw);
  if (!digits) return std::nullopt;
  return hash_normalized(*digits);
}

std::optional<HashedId> hash_phone(std::string_view raw, std::string_view salt, std::size_t hex_length) {
  return PhoneHasher(salt, hex_length).hash(raw);
}

std::string digest_hex(std::string_view bytes) {
  ensure_sodium();
  std::array<unsigned char, 32> out{};
  crypto_generichash(out.data(), out.size(), reinterpret_cast<const unsigned char*>(bytes.data()),
                     bytes.size(), nullptr, 0);
  std::string hex;
  hex.reserve(64);
  for (unsigned char b : out) {
    hex.push_back(kHex[b >> 4]);
    hex.push_back(kHex[b & 0x0f]);
  }
  return hex;
}

}  // namespace kincall
