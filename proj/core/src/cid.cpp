// SPDX-License-Identifier: Apache-2.0

#include "pstore/cid.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>

#include "pstore/crypto.hpp"
#include "pstore/error.hpp"

namespace pstore {
namespace {

class HashRegistry {
 public:
  HashRegistry() {
    functions_[kSha2_256] = HashFunction{kSha2_256, "sha2-256", 32, [](ByteView data) {
                                           auto d = crypto::sha256(data);
                                           return Bytes(d.begin(), d.end());
                                         }};
  }

  void put(HashFunction fn) {
    std::unique_lock lock(mutex_);
    functions_[fn.code] = std::move(fn);
  }

  void erase(std::uint64_t code) {
    if (code == kSha2_256) return;
    std::unique_lock lock(mutex_);
    functions_.erase(code);
  }

  std::optional<HashFunction> find(std::uint64_t code) const {
    std::shared_lock lock(mutex_);
    auto it = functions_.find(code);
    if (it == functions_.end()) return std::nullopt;
    return it->second;
  }

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::uint64_t, HashFunction> functions_;
};

HashRegistry& registry() {
  static HashRegistry r;
  return r;
}

constexpr std::string_view kAlphabet = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";

constexpr std::array<std::int8_t, 128> make_reverse() {
  std::array<std::int8_t, 128> rev{};
  for (auto& r : rev) r = -1;
  for (std::size_t i = 0; i < kAlphabet.size(); ++i) rev[static_cast<std::size_t>(kAlphabet[i])] = static_cast<std::int8_t>(i);
  return rev;
}

constexpr auto kReverse = make_reverse();

}  // namespace

void register_hash_function(HashFunction fn) {
  if (fn.digest_size == 0 || !fn.digest) throw Error(ErrorCode::invalid_argument, "hash function needs a digest");
  registry().put(std::move(fn));
}

void unregister_hash_function(std::uint64_t code) { registry().erase(code); }

bool hash_function_known(std::uint64_t code) { return registry().find(code).has_value(); }

std::size_t hash_digest_size(std::uint64_t code) {
  auto fn = registry().find(code);
  if (!fn) throw Error(ErrorCode::unknown_code, std::to_string(code));
  return fn->digest_size;
}

Bytes multihash_encode(std::uint64_t code, ByteView digest) {
  auto fn = registry().find(code);
  if (!fn) throw Error(ErrorCode::unsupported_code, std::to_string(code));
  if (digest.size() != fn->digest_size)
    throw Error(ErrorCode::length_mismatch,
                "expected " + std::to_string(fn->digest_size) + " bytes, got " + std::to_string(digest.size()));
  Bytes out;
  out.reserve(varint_size(code) + varint_size(digest.size()) + digest.size());
  put_varint(out, code);
  put_varint(out, digest.size());
  out.insert(out.end(), digest.begin(), digest.end());
  return out;
}

Multihash multihash_decode(ByteView bytes) {
  ByteReader in(bytes, ErrorCode::truncated_multihash);
  Multihash mh;
  mh.code = in.varint();
  auto length = in.varint();
  auto fn = registry().find(mh.code);
  if (!fn) throw Error(ErrorCode::unknown_code, std::to_string(mh.code));
  if (length != fn->digest_size) throw Error(ErrorCode::length_mismatch, "digest length does not match hash function");
  mh.digest = in.take_bytes(length);
  if (!in.done()) throw Error(ErrorCode::length_mismatch, "trailing bytes after digest");
  return mh;
}

std::string base58_encode(ByteView data) {
  std::size_t zeros = 0;
  while (zeros < data.size() && data[zeros] == 0) ++zeros;

  // Base-58 digits, least significant first. log(256)/log(58) < 1.37.
  std::vector<std::uint8_t> digits;
  digits.reserve((data.size() - zeros) * 137 / 100 + 1);
  for (std::size_t i = zeros; i < data.size(); ++i) {
    unsigned carry = data[i];
    for (auto& d : digits) {
      carry += static_cast<unsigned>(d) << 8;
      d = static_cast<std::uint8_t>(carry % 58);
      carry /= 58;
    }
    while (carry > 0) {
      digits.push_back(static_cast<std::uint8_t>(carry % 58));
      carry /= 58;
    }
  }

  std::string out(zeros, '1');
  out.reserve(zeros + digits.size());
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) out.push_back(kAlphabet[*it]);
  return out;
}

Bytes base58_decode(std::string_view text) {
  std::size_t ones = 0;
  while (ones < text.size() && text[ones] == '1') ++ones;

  std::vector<std::uint8_t> bytes;  // least significant first
  for (std::size_t i = ones; i < text.size(); ++i) {
    auto c = static_cast<unsigned char>(text[i]);
    int value = c < kReverse.size() ? kReverse[c] : -1;
    if (value < 0) throw Error(ErrorCode::invalid_character, std::string("'") + text[i] + "' is not base58");
    unsigned carry = static_cast<unsigned>(value);
    for (auto& b : bytes) {
      carry += static_cast<unsigned>(b) * 58;
      b = static_cast<std::uint8_t>(carry & 0xff);
      carry >>= 8;
    }
    while (carry > 0) {
      bytes.push_back(static_cast<std::uint8_t>(carry & 0xff));
      carry >>= 8;
    }
  }

  Bytes out(ones, 0);
  out.insert(out.end(), bytes.rbegin(), bytes.rend());
  return out;
}

Cid Cid::from_bytes(ByteView data, std::uint64_t code) {
  auto fn = registry().find(code);
  if (!fn) throw Error(ErrorCode::unsupported_code, std::to_string(code));
  return from_multihash(multihash_encode(code, fn->digest(data)));
}

Cid Cid::parse(std::string_view text) { return from_multihash(base58_decode(text)); }

Cid Cid::from_multihash(ByteView multihash_bytes) {
  auto mh = multihash_decode(multihash_bytes);
  Cid cid;
  cid.mh_.assign(multihash_bytes.begin(), multihash_bytes.end());
  cid.code_ = mh.code;
  cid.digest_offset_ = cid.mh_.size() - mh.digest.size();
  return cid;
}

bool cid_verify(ByteView data, const Cid& cid) {
  if (cid.empty()) return false;
  auto fn = registry().find(cid.code());
  if (!fn) return false;
  auto digest = fn->digest(data);
  return std::ranges::equal(digest, cid.digest());
}

}  // namespace pstore
