// SPDX-License-Identifier: Apache-2.0

#include "pstore/ipns.hpp"

namespace pstore::ipns {

Cid name_for(const crypto::KeyPair& keys) { return Cid::from_bytes(keys.encoded_public_key()); }

dht::Key256 dht_key(const Cid& name) { return dht::dht_key_for(name); }

Bytes signing_payload(const std::string& value, std::uint64_t sequence) {
  static constexpr std::string_view kDomain = "pstore-ipns-v1:";
  Bytes out(kDomain.begin(), kDomain.end());
  put_varint(out, value.size());
  out.insert(out.end(), value.begin(), value.end());
  put_u64(out, sequence);
  return out;
}

IpnsRecord make_record(const crypto::KeyPair& keys, std::string value, std::uint64_t sequence, SimTime expires_at) {
  IpnsRecord r;
  r.public_key = keys.encoded_public_key();
  r.name = Cid::from_bytes(r.public_key);
  r.value = std::move(value);
  r.sequence = sequence;
  r.expires_at = expires_at;
  r.signature = keys.sign(signing_payload(r.value, r.sequence));
  return r;
}

bool verify_record(const IpnsRecord& record) {
  if (record.name.empty() || !cid_verify(record.public_key, record.name)) return false;
  return crypto::verify(record.public_key, signing_payload(record.value, record.sequence), record.signature);
}

bool IpnsStore::put(const IpnsRecord& record, SimTime now) {
  if (record.expires_at <= now || !verify_record(record)) return false;
  auto key = dht_key(record.name);
  auto it = records_.find(key);
  if (it != records_.end() && it->second.expires_at > now && verify_record(it->second)) {
    if (record.sequence < it->second.sequence) return false;
    if (record.sequence == it->second.sequence && record.expires_at <= it->second.expires_at) return false;
  }
  records_[key] = record;
  return true;
}

void IpnsStore::put_unchecked(const IpnsRecord& record) { records_[dht_key(record.name)] = record; }

std::optional<IpnsRecord> IpnsStore::get(const dht::Key256& key, SimTime now) const {
  auto it = records_.find(key);
  if (it == records_.end() || it->second.expires_at <= now) return std::nullopt;
  return it->second;
}

std::size_t IpnsStore::purge(SimTime now) {
  return std::erase_if(records_, [&](const auto& kv) { return kv.second.expires_at <= now; });
}

}  // namespace pstore::ipns
