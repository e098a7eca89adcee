// SPDX-License-Identifier: Apache-2.0

#include "pstore/dht.hpp"

#include <algorithm>
#include <bit>
#include <charconv>

#include "pstore/crypto.hpp"
#include "pstore/error.hpp"

namespace pstore::dht {

Key256 Key256::from_bytes(ByteView bytes) {
  if (bytes.size() != 32) throw Error(ErrorCode::unsupported_digest, "key must be 32 bytes");
  Storage s;
  std::ranges::copy(bytes, s.begin());
  return Key256(s);
}

Key256 Key256::from_hex(std::string_view hex) { return from_bytes(pstore::from_hex(hex)); }

std::string Key256::to_hex() const { return pstore::to_hex(bytes_); }

std::size_t Key256::leading_zeros() const {
  std::size_t n = 0;
  for (auto b : bytes_) {
    if (b != 0) return n + static_cast<std::size_t>(std::countl_zero(b));
    n += 8;
  }
  return n;
}

Key256 Key256::operator^(const Key256& other) const {
  Storage s;
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = bytes_[i] ^ other.bytes_[i];
  return Key256(s);
}

Key256 xor_distance(const Key256& a, const Key256& b) { return a ^ b; }

Key256 dht_key_for(const Cid& cid) {
  if (cid.digest().size() != 32) throw Error(ErrorCode::unsupported_digest, cid.to_string());
  return Key256::from_bytes(cid.digest());
}

PeerId peer_id_from_public_key(ByteView encoded_public_key) {
  return PeerId(crypto::sha256(encoded_public_key));
}

namespace {

bool parse_u32(std::string_view s, std::uint32_t& out, std::uint32_t max) {
  if (s.empty() || (s.size() > 1 && s[0] == '0')) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && out <= max;
}

}  // namespace

Multiaddress Multiaddress::parse(std::string_view text) {
  auto bad = [&] { return Error(ErrorCode::invalid_argument, "bad multiaddress '" + std::string(text) + "'"); };
  Multiaddress m;
  m.text_ = std::string(text);
  if (text.starts_with("/sim/")) {
    if (!parse_u32(text.substr(5), m.index_, UINT32_MAX)) throw bad();
    m.scheme_ = Scheme::sim;
    return m;
  }
  if (text.starts_with("/ip4/")) {
    auto rest = text.substr(5);
    auto slash = rest.find('/');
    if (slash == std::string_view::npos) throw bad();
    auto addr = rest.substr(0, slash);
    int octets = 0;
    while (true) {
      auto dot = addr.find('.');
      std::uint32_t v = 0;
      if (!parse_u32(addr.substr(0, dot), v, 255)) throw bad();
      ++octets;
      if (dot == std::string_view::npos) break;
      addr.remove_prefix(dot + 1);
    }
    if (octets != 4) throw bad();
    auto tail = rest.substr(slash);
    if (!tail.starts_with("/tcp/")) throw bad();
    std::uint32_t port = 0;
    if (!parse_u32(tail.substr(5), port, 65535)) throw bad();
    m.scheme_ = Scheme::ip4;
    return m;
  }
  throw bad();
}

Multiaddress Multiaddress::sim(std::uint32_t index) { return parse("/sim/" + std::to_string(index)); }

std::optional<std::uint32_t> Multiaddress::sim_index() const {
  if (scheme_ != Scheme::sim) return std::nullopt;
  return index_;
}

std::optional<std::uint32_t> PeerInfo::sim_index() const {
  for (const auto& a : addresses)
    if (auto i = a.sim_index()) return i;
  return std::nullopt;
}

RoutingTable::RoutingTable(PeerId owner, std::size_t k) : owner_(owner), k_(k), buckets_(kKeyBits) {
  if (k == 0) throw Error(ErrorCode::invalid_argument, "k must be positive");
}

std::size_t RoutingTable::bucket_index(const PeerId& peer) const {
  auto lz = xor_distance(owner_, peer).leading_zeros();
  return std::min(lz, kKeyBits - 1);
}

RoutingTable::Update RoutingTable::update(const PeerInfo& seen) {
  if (seen.peer == owner_ || seen.addresses.empty()) return Update::ignored;
  auto& bucket = buckets_[bucket_index(seen.peer)];
  auto it = std::ranges::find(bucket, seen.peer, &PeerInfo::peer);
  if (it != bucket.end()) {
    bucket.erase(it);
    bucket.push_back(seen);
    return Update::refreshed;
  }
  if (bucket.size() >= k_) return Update::dropped;
  bucket.push_back(seen);
  ++size_;
  return Update::inserted;
}

bool RoutingTable::remove(const PeerId& peer) {
  if (peer == owner_) return false;
  auto& bucket = buckets_[bucket_index(peer)];
  auto it = std::ranges::find(bucket, peer, &PeerInfo::peer);
  if (it == bucket.end()) return false;
  bucket.erase(it);
  --size_;
  return true;
}

bool RoutingTable::contains(const PeerId& peer) const { return find(peer).has_value(); }

std::optional<PeerInfo> RoutingTable::find(const PeerId& peer) const {
  if (peer == owner_) return std::nullopt;
  const auto& bucket = buckets_[bucket_index(peer)];
  auto it = std::ranges::find(bucket, peer, &PeerInfo::peer);
  if (it == bucket.end()) return std::nullopt;
  return *it;
}

std::vector<PeerInfo> RoutingTable::closest(const Key256& target, std::size_t n) const {
  std::vector<std::pair<Key256, const PeerInfo*>> ranked;
  ranked.reserve(size_);
  for (const auto& bucket : buckets_)
    for (const auto& p : bucket) ranked.emplace_back(xor_distance(p.peer, target), &p);
  auto count = std::min(n, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(count), ranked.end(),
                    [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<PeerInfo> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(*ranked[i].second);
  return out;
}

std::vector<PeerInfo> RoutingTable::all() const {
  std::vector<PeerInfo> out;
  out.reserve(size_);
  for (const auto& bucket : buckets_) out.insert(out.end(), bucket.begin(), bucket.end());
  return out;
}

void ProviderStore::put(const ProviderRecord& record, SimTime now) {
  if (record.expires_at <= now) return;
  auto& list = records_[record.key];
  std::erase_if(list, [&](const ProviderRecord& r) { return r.expires_at <= now; });
  auto it = std::ranges::find(list, record.provider, &ProviderRecord::provider);
  if (it != list.end()) {
    *it = record;
    return;
  }
  if (list.size() >= cap_) {
    auto soonest = std::ranges::min_element(list, {}, &ProviderRecord::expires_at);
    if (soonest->expires_at >= record.expires_at) return;
    list.erase(soonest);
  }
  list.push_back(record);
}

std::vector<ProviderRecord> ProviderStore::get(const Key256& key, SimTime now) const {
  std::vector<ProviderRecord> out;
  auto it = records_.find(key);
  if (it == records_.end()) return out;
  for (const auto& r : it->second)
    if (r.expires_at > now) out.push_back(r);
  return out;
}

bool ProviderStore::has(const Key256& key, const PeerId& provider, SimTime now) const {
  auto it = records_.find(key);
  if (it == records_.end()) return false;
  return std::ranges::any_of(it->second, [&](const ProviderRecord& r) { return r.provider == provider && r.expires_at > now; });
}

std::size_t ProviderStore::purge(SimTime now) {
  std::size_t removed = 0;
  for (auto it = records_.begin(); it != records_.end();) {
    removed += std::erase_if(it->second, [&](const ProviderRecord& r) { return r.expires_at <= now; });
    it = it->second.empty() ? records_.erase(it) : std::next(it);
  }
  return removed;
}

std::size_t ProviderStore::size() const {
  std::size_t n = 0;
  for (const auto& [_, list] : records_) n += list.size();
  return n;
}

}  // namespace pstore::dht
