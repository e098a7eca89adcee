// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "pstore/bytes.hpp"
#include "pstore/cid.hpp"
#include "pstore/crypto.hpp"
#include "pstore/dht.hpp"
#include "pstore/sim_time.hpp"

namespace pstore::ipns {

/// Signed, sequenced pointer from a key-derived name to a path.
struct IpnsRecord {
  Cid name;  // multihash of the encoded public key
  std::string value;  // "/ipfs/..." or "/ipns/..."
  std::uint64_t sequence = 0;
  SimTime expires_at{};
  Bytes public_key;
  Bytes signature;  // over signing_payload(value, sequence)

  bool operator==(const IpnsRecord&) const = default;
};

Cid name_for(const crypto::KeyPair& keys);
dht::Key256 dht_key(const Cid& name);

Bytes signing_payload(const std::string& value, std::uint64_t sequence);
IpnsRecord make_record(const crypto::KeyPair& keys, std::string value, std::uint64_t sequence, SimTime expires_at);
// Public key hashes to the name and the signature checks out.
bool verify_record(const IpnsRecord& record);

/// DHT-side storage: one record per name, highest valid sequence wins.
class IpnsStore {
 public:
  // Returns false if the record is invalid, expired or stale.
  bool put(const IpnsRecord& record, SimTime now);
  // Stores without validation. Fault injection only.
  void put_unchecked(const IpnsRecord& record);
  std::optional<IpnsRecord> get(const dht::Key256& key, SimTime now) const;
  std::size_t purge(SimTime now);
  std::size_t size() const { return records_.size(); }

 private:
  std::map<dht::Key256, IpnsRecord> records_;
};

}  // namespace pstore::ipns
