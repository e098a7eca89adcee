// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "pstore/bytes.hpp"

namespace pstore {

// Multihash registry code for SHA-256.
inline constexpr std::uint64_t kSha2_256 = 0x12;

struct HashFunction {
  std::uint64_t code = 0;
  std::string name;
  std::size_t digest_size = 0;
  std::function<Bytes(ByteView)> digest;
};

// Registers an additional hash function. Re-registering an existing code
// replaces it; SHA-256 is always present.
void register_hash_function(HashFunction fn);
void unregister_hash_function(std::uint64_t code);
bool hash_function_known(std::uint64_t code);
std::size_t hash_digest_size(std::uint64_t code);

struct Multihash {
  std::uint64_t code = 0;
  Bytes digest;

  bool operator==(const Multihash&) const = default;
};

// varint(code) ++ varint(len(digest)) ++ digest
Bytes multihash_encode(std::uint64_t code, ByteView digest);
Multihash multihash_decode(ByteView bytes);

// Bitcoin alphabet; leading zero bytes map to leading '1's.
std::string base58_encode(ByteView data);
Bytes base58_decode(std::string_view text);

/// Content identifier: a self-describing multihash whose text form is the
/// bare base58 encoding of the multihash bytes (the "Qm..." form for SHA-256).
class Cid {
 public:
  Cid() = default;

  static Cid from_bytes(ByteView data, std::uint64_t code = kSha2_256);
  static Cid parse(std::string_view text);
  static Cid from_multihash(ByteView multihash_bytes);

  std::uint64_t code() const { return code_; }
  ByteView digest() const { return ByteView(mh_).subspan(digest_offset_); }
  const Bytes& bytes() const { return mh_; }
  std::string to_string() const { return base58_encode(mh_); }
  bool empty() const { return mh_.empty(); }

  bool operator==(const Cid& other) const { return mh_ == other.mh_; }
  std::strong_ordering operator<=>(const Cid& other) const { return mh_ <=> other.mh_; }

 private:
  Bytes mh_;
  std::uint64_t code_ = 0;
  std::size_t digest_offset_ = 0;
};

bool cid_verify(ByteView data, const Cid& cid);

}  // namespace pstore

template <>
struct std::hash<pstore::Cid> {
  std::size_t operator()(const pstore::Cid& c) const noexcept {
    std::size_t h = 0;
    for (auto b : c.bytes()) h = h * 131 + b;
    return h;
  }
};
