// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pstore/bytes.hpp"
#include "pstore/cid.hpp"
#include "pstore/sim_time.hpp"

namespace pstore::dht {

inline constexpr std::size_t kDefaultK = 20;
inline constexpr std::size_t kDefaultAlpha = 3;
inline constexpr std::size_t kProvidersPerKey = 64;
inline constexpr std::size_t kKeyBits = 256;

/// 256-bit identifier in the DHT key space, compared as a big-endian
/// unsigned integer.
class Key256 {
 public:
  using Storage = std::array<std::uint8_t, 32>;

  constexpr Key256() : bytes_{} {}
  explicit constexpr Key256(const Storage& bytes) : bytes_(bytes) {}
  static Key256 from_bytes(ByteView bytes);
  static Key256 from_hex(std::string_view hex);

  const Storage& bytes() const { return bytes_; }
  std::string to_hex() const;
  // Number of leading zero bits; 256 for the zero key.
  std::size_t leading_zeros() const;
  bool is_zero() const { return leading_zeros() == kKeyBits; }

  Key256 operator^(const Key256& other) const;
  bool operator==(const Key256&) const = default;
  std::strong_ordering operator<=>(const Key256& other) const { return bytes_ <=> other.bytes_; }

 private:
  Storage bytes_;
};

using PeerId = Key256;

Key256 xor_distance(const Key256& a, const Key256& b);

// Digest bytes of the multihash (requires a 32-byte digest).
Key256 dht_key_for(const Cid& cid);

PeerId peer_id_from_public_key(ByteView encoded_public_key);

/// "/sim/<node-index>" or "/ip4/<a.b.c.d>/tcp/<port>".
class Multiaddress {
 public:
  enum class Scheme { sim, ip4 };

  static Multiaddress parse(std::string_view text);
  static Multiaddress sim(std::uint32_t index);

  Scheme scheme() const { return scheme_; }
  const std::string& text() const { return text_; }
  std::optional<std::uint32_t> sim_index() const;

  bool operator==(const Multiaddress& other) const { return text_ == other.text_; }

 private:
  Scheme scheme_ = Scheme::sim;
  std::string text_;
  std::uint32_t index_ = 0;
};

struct PeerInfo {
  PeerId peer;
  std::vector<Multiaddress> addresses;
  SimTime last_seen{};

  // Simulator index from the first /sim address, if any.
  std::optional<std::uint32_t> sim_index() const;
};

/// k-bucket routing table. Bucket i holds peers sharing exactly i leading
/// bits with the owner; entries are ordered least-recently-seen first.
class RoutingTable {
 public:
  enum class Update { inserted, refreshed, dropped, ignored };

  RoutingTable(PeerId owner, std::size_t k);

  const PeerId& owner() const { return owner_; }
  std::size_t k() const { return k_; }

  // Insert-or-refresh. A full bucket keeps its incumbents.
  Update update(const PeerInfo& seen);
  bool remove(const PeerId& peer);
  bool contains(const PeerId& peer) const;
  std::optional<PeerInfo> find(const PeerId& peer) const;

  // The n known peers closest to target, ascending by XOR distance.
  std::vector<PeerInfo> closest(const Key256& target, std::size_t n) const;

  std::size_t size() const { return size_; }
  const std::deque<PeerInfo>& bucket(std::size_t index) const { return buckets_.at(index); }
  std::vector<PeerInfo> all() const;

  std::size_t bucket_index(const PeerId& peer) const;

 private:
  PeerId owner_;
  std::size_t k_;
  std::size_t size_ = 0;
  std::vector<std::deque<PeerInfo>> buckets_;
};

struct ProviderRecord {
  Key256 key;
  PeerId provider;
  std::vector<Multiaddress> addresses;
  SimTime expires_at{};
};

/// Per-key provider records; (key, provider) is the record identity.
class ProviderStore {
 public:
  explicit ProviderStore(std::size_t per_key_cap = kProvidersPerKey) : cap_(per_key_cap) {}

  // Inserts or refreshes. When a key is at capacity the soonest-to-expire
  // record is evicted (unless it is the one being refreshed).
  void put(const ProviderRecord& record, SimTime now);
  // Unexpired records only.
  std::vector<ProviderRecord> get(const Key256& key, SimTime now) const;
  bool has(const Key256& key, const PeerId& provider, SimTime now) const;
  std::size_t purge(SimTime now);
  std::size_t size() const;
  std::size_t key_count() const { return records_.size(); }

 private:
  std::size_t cap_;
  std::map<Key256, std::vector<ProviderRecord>> records_;
};

}  // namespace pstore::dht
