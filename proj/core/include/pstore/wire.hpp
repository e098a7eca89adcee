// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "pstore/bytes.hpp"
#include "pstore/cid.hpp"
#include "pstore/dht.hpp"
#include "pstore/ipns.hpp"

// Peer-to-peer message codec shared by DHT RPCs and block exchange.
//
// Every message is:
//   version(1)=1 type(1) varint(request_id) sender payload
// where sender is peer-id(32) varint(n) [varint(len) multiaddr-text]*n.
// Integers inside payloads are varints unless noted; times are 8-byte
// big-endian microseconds of simulation time; Cids are varint(len) ++
// multihash bytes; keys are 32 raw bytes. See README for per-type layouts.
namespace pstore::wire {

inline constexpr std::uint8_t kVersion = 1;

enum class Type : std::uint8_t {
  ping = 1,
  pong = 2,
  find_node = 3,
  find_node_reply = 4,
  get_providers = 5,
  get_providers_reply = 6,
  put_provider = 7,
  ack = 8,
  put_ipns = 9,
  get_ipns = 10,
  get_ipns_reply = 11,
  want = 32,
  have = 33,
  block = 34,
  cancel = 35,
  dont_have = 36,
};

struct Ping {};
struct Pong {};
struct FindNode {
  dht::Key256 target;
};
struct FindNodeReply {
  std::vector<dht::PeerInfo> closer;
};
struct GetProviders {
  dht::Key256 key;
};
struct GetProvidersReply {
  std::vector<dht::ProviderRecord> records;
  std::vector<dht::PeerInfo> closer;
};
struct PutProvider {
  dht::ProviderRecord record;
};
struct Ack {
  bool accepted = false;
};
struct PutIpns {
  ipns::IpnsRecord record;
};
struct GetIpns {
  dht::Key256 key;
};
struct GetIpnsReply {
  std::optional<ipns::IpnsRecord> record;
  std::vector<dht::PeerInfo> closer;
};

struct Want {
  Cid cid;
  std::uint32_t priority = 1;
};
struct Have {
  Cid cid;
};
struct BlockData {
  Cid cid;
  Bytes data;
};
struct Cancel {
  Cid cid;
};
struct DontHave {
  Cid cid;
};

using Payload = std::variant<Ping, Pong, FindNode, FindNodeReply, GetProviders, GetProvidersReply, PutProvider, Ack,
                             PutIpns, GetIpns, GetIpnsReply, Want, Have, BlockData, Cancel, DontHave>;

struct Message {
  std::uint64_t request_id = 0;
  dht::PeerInfo sender;
  Payload payload;
};

Bytes encode(const Message& message);
// Throws malformed-message.
Message decode(ByteView bytes);

Type type_of(const Payload& payload);
std::string_view type_name(Type type);
// Reads the type byte of an encoded message without decoding it.
std::optional<Type> peek_type(ByteView bytes);
bool is_exchange(Type type);

}  // namespace pstore::wire
