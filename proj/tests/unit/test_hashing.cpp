#include <gtest/gtest.h>

#include <set>
#include <unordered_set>

#include "kincall/hashed_id.hpp"
#include "kincall/phone_hash.hpp"

using kincall::HashedId;
using kincall::PhoneHasher;

TEST(NormalizePhone, StripsFormatting) {
  EXPECT_EQ(kincall::normalize_phone("+56 9 1234-5678"), "56912345678");
  EXPECT_EQ(kincall::normalize_phone("(02) 123.45/67"), "021234567");
  EXPECT_EQ(kincall::normalize_phone("0042"), "0042");
}

TEST(NormalizePhone, RejectsGarbage) {
  EXPECT_FALSE(kincall::normalize_phone(""));
  EXPECT_FALSE(kincall::normalize_phone("+"));
  EXPECT_FALSE(kincall::normalize_phone(" - "));
  EXPECT_FALSE(kincall::normalize_phone("12a4"));
  EXPECT_FALSE(kincall::normalize_phone("12+4"));
  EXPECT_FALSE(kincall::normalize_phone("++12"));
  EXPECT_FALSE(kincall::normalize_phone("NULL"));
}

// Expected ids come from Python's hashlib: blake2b(digits, key=blake2b(salt,
// digest_size=32), digest_size=16), hex, truncated.
TEST(PhoneHasher, MatchesKeyedBlake2bReference) {
  EXPECT_EQ(kincall::hash_phone("+56 9 1234 5678", "kincall")->str(), "41a16bf70988b60905ef");
  EXPECT_EQ(kincall::hash_phone("56912345678", "other-salt")->str(), "36fc66dea0eed0459b54");
  EXPECT_EQ(kincall::hash_phone("56912345678", "kincall", 32)->str(), "41a16bf70988b60905ef18159ec0d18a");
  EXPECT_EQ(kincall::hash_phone("1", "kincall", 8)->str(), "e6d567fd");
}

TEST(PhoneHasher, FormattingDoesNotChangeId) {
  const PhoneHasher h("s");
  EXPECT_EQ(h.hash("+56 9 1234 5678"), h.hash("56-9-1234-5678"));
  EXPECT_EQ(h.hash("56912345678"), h.hash_normalized("56912345678"));
  EXPECT_NE(h.hash("56912345678"), h.hash("56912345679"));
}

TEST(PhoneHasher, GarbageIsNullopt) {
  const PhoneHasher h("s");
  EXPECT_FALSE(h.hash(""));
  EXPECT_FALSE(h.hash("abc"));
}

TEST(PhoneHasher, HexLengthBounds) {
  EXPECT_THROW(PhoneHasher("s", 7), std::invalid_argument);
  EXPECT_THROW(PhoneHasher("s", 33), std::invalid_argument);
  for (std::size_t n = 8; n <= 32; ++n) EXPECT_EQ(PhoneHasher("s", n).hash("123")->size(), n);
}

TEST(PhoneHasher, NoCollisionsOnDistinctNumbers) {
  const PhoneHasher h("s");
  std::unordered_set<HashedId> seen;
  for (int i = 0; i < 50000; ++i) seen.insert(*h.hash(std::to_string(56900000000LL + i)));
  EXPECT_EQ(seen.size(), 50000u);
}

TEST(HashedId, ParseAcceptsLowercaseHexOnly) {
  EXPECT_TRUE(HashedId::parse("0123456789abcdef"));
  EXPECT_FALSE(HashedId::parse(""));
  EXPECT_FALSE(HashedId::parse("ABCD"));
  EXPECT_FALSE(HashedId::parse("12g4"));
  EXPECT_FALSE(HashedId::parse(std::string(33, 'a')));
  EXPECT_THROW(HashedId::from_hex("xyz"), std::invalid_argument);
}

TEST(HashedId, OrderingIsStringOrder) {
  const std::vector<std::string> raw = {"b", "a", "ab", "a0", "ff", "0", "abc", "aa"};
  std::set<std::string> strings(raw.begin(), raw.end());
  std::set<HashedId> ids;
  for (const auto& s : raw) ids.insert(HashedId::from_hex(s));
  std::vector<std::string> from_ids;
  for (const auto& id : ids) from_ids.push_back(id.str());
  EXPECT_EQ(from_ids, std::vector<std::string>(strings.begin(), strings.end()));
}

TEST(Digest, Blake2b256Reference) {
  EXPECT_EQ(kincall::digest_hex("abc"), "bddd813c634239723171ef3fee98579b94964e3bb1cb3e427262c8c068d52319");
}
