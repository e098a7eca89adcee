// SPDX-License-Identifier: Apache-2.0

#include "pstore/wire.hpp"

#include "pstore/error.hpp"

namespace pstore::wire {
namespace {

class Writer {
 public:
  Bytes out;

  void u8(std::uint8_t v) { out.push_back(v); }
  void varint(std::uint64_t v) { put_varint(out, v); }
  void time(SimTime t) { put_u64(out, static_cast<std::uint64_t>(to_micros(t))); }
  void raw(ByteView b) { out.insert(out.end(), b.begin(), b.end()); }
  void blob(ByteView b) {
    varint(b.size());
    raw(b);
  }
  void text(std::string_view s) {
    varint(s.size());
    out.insert(out.end(), s.begin(), s.end());
  }
  void key(const dht::Key256& k) { raw(k.bytes()); }
  void cid(const Cid& c) { blob(c.bytes()); }
  void addresses(const std::vector<dht::Multiaddress>& addrs) {
    varint(addrs.size());
    for (const auto& a : addrs) text(a.text());
  }
  void peer(const dht::PeerInfo& p) {
    key(p.peer);
    addresses(p.addresses);
  }
  void peers(const std::vector<dht::PeerInfo>& ps) {
    varint(ps.size());
    for (const auto& p : ps) peer(p);
  }
  void provider(const dht::ProviderRecord& r) {
    key(r.key);
    key(r.provider);
    addresses(r.addresses);
    time(r.expires_at);
  }
  void ipns(const ipns::IpnsRecord& r) {
    cid(r.name);
    text(r.value);
    varint(r.sequence);
    time(r.expires_at);
    blob(r.public_key);
    blob(r.signature);
  }

  void body(const Ping&) {}
  void body(const Pong&) {}
  void body(const FindNode& m) { key(m.target); }
  void body(const FindNodeReply& m) { peers(m.closer); }
  void body(const GetProviders& m) { key(m.key); }
  void body(const GetProvidersReply& m) {
    varint(m.records.size());
    for (const auto& r : m.records) provider(r);
    peers(m.closer);
  }
  void body(const PutProvider& m) { provider(m.record); }
  void body(const Ack& m) { u8(m.accepted ? 1 : 0); }
  void body(const PutIpns& m) { ipns(m.record); }
  void body(const GetIpns& m) { key(m.key); }
  void body(const GetIpnsReply& m) {
    u8(m.record ? 1 : 0);
    if (m.record) ipns(*m.record);
    peers(m.closer);
  }
  void body(const Want& m) {
    cid(m.cid);
    varint(m.priority);
  }
  void body(const Have& m) { cid(m.cid); }
  void body(const BlockData& m) {
    cid(m.cid);
    blob(m.data);
  }
  void body(const Cancel& m) { cid(m.cid); }
  void body(const DontHave& m) { cid(m.cid); }
};

class Reader {
 public:
  explicit Reader(ByteView b) : in(b, ErrorCode::malformed_message) {}
  ByteReader in;

  // Guards list allocations against absurd counts in hostile input.
  std::size_t count(std::size_t min_item_size) {
    auto n = in.varint();
    if (n > in.remaining() / min_item_size) throw Error(ErrorCode::malformed_message, "count exceeds input");
    return static_cast<std::size_t>(n);
  }
  SimTime time() { return from_micros(static_cast<std::int64_t>(in.u64())); }
  Bytes blob() { return in.take_bytes(in.varint()); }
  std::string text() { return in.take_string(in.varint()); }
  dht::Key256 key() { return dht::Key256::from_bytes(in.take(32)); }
  Cid cid() {
    try {
      return Cid::from_multihash(in.take(in.varint()));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::malformed_message) throw;
      throw Error(ErrorCode::malformed_message, e.what());
    }
  }
  std::vector<dht::Multiaddress> addresses() {
    std::vector<dht::Multiaddress> out(count(1));
    for (auto& a : out) {
      try {
        a = dht::Multiaddress::parse(text());
      } catch (const Error& e) {
        if (e.code() == ErrorCode::malformed_message) throw;
        throw Error(ErrorCode::malformed_message, e.what());
      }
    }
    return out;
  }
  dht::PeerInfo peer() {
    dht::PeerInfo p;
    p.peer = key();
    p.addresses = addresses();
    return p;
  }
  std::vector<dht::PeerInfo> peers() {
    std::vector<dht::PeerInfo> out(count(33));
    for (auto& p : out) p = peer();
    return out;
  }
  dht::ProviderRecord provider() {
    dht::ProviderRecord r;
    r.key = key();
    r.provider = key();
    r.addresses = addresses();
    r.expires_at = time();
    return r;
  }
  ipns::IpnsRecord ipns() {
    ipns::IpnsRecord r;
    r.name = cid();
    r.value = text();
    r.sequence = in.varint();
    r.expires_at = time();
    r.public_key = blob();
    r.signature = blob();
    return r;
  }
  bool flag() {
    auto b = in.u8();
    if (b > 1) throw Error(ErrorCode::malformed_message, "bad flag");
    return b == 1;
  }

  Payload body(Type type) {
    switch (type) {
      case Type::ping: return Ping{};
      case Type::pong: return Pong{};
      case Type::find_node: return FindNode{key()};
      case Type::find_node_reply: return FindNodeReply{peers()};
      case Type::get_providers: return GetProviders{key()};
      case Type::get_providers_reply: {
        GetProvidersReply m;
        m.records.resize(count(73));
        for (auto& r : m.records) r = provider();
        m.closer = peers();
        return m;
      }
      case Type::put_provider: return PutProvider{provider()};
      case Type::ack: return Ack{flag()};
      case Type::put_ipns: return PutIpns{ipns()};
      case Type::get_ipns: return GetIpns{key()};
      case Type::get_ipns_reply: {
        GetIpnsReply m;
        if (flag()) m.record = ipns();
        m.closer = peers();
        return m;
      }
      case Type::want: {
        Want m{cid()};
        auto p = in.varint();
        if (p > UINT32_MAX) throw Error(ErrorCode::malformed_message, "priority out of range");
        m.priority = static_cast<std::uint32_t>(p);
        return m;
      }
      case Type::have: return Have{cid()};
      case Type::block: {
        BlockData m;
        m.cid = cid();
        m.data = blob();
        return m;
      }
      case Type::cancel: return Cancel{cid()};
      case Type::dont_have: return DontHave{cid()};
    }
    throw Error(ErrorCode::malformed_message, "unknown message type");
  }
};

bool known_type(std::uint8_t t) {
  return (t >= 1 && t <= 11) || (t >= 32 && t <= 36);
}

}  // namespace

Type type_of(const Payload& payload) {
  return std::visit(
      [](const auto& m) -> Type {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Ping>) return Type::ping;
        else if constexpr (std::is_same_v<T, Pong>) return Type::pong;
        else if constexpr (std::is_same_v<T, FindNode>) return Type::find_node;
        else if constexpr (std::is_same_v<T, FindNodeReply>) return Type::find_node_reply;
        else if constexpr (std::is_same_v<T, GetProviders>) return Type::get_providers;
        else if constexpr (std::is_same_v<T, GetProvidersReply>) return Type::get_providers_reply;
        else if constexpr (std::is_same_v<T, PutProvider>) return Type::put_provider;
        else if constexpr (std::is_same_v<T, Ack>) return Type::ack;
        else if constexpr (std::is_same_v<T, PutIpns>) return Type::put_ipns;
        else if constexpr (std::is_same_v<T, GetIpns>) return Type::get_ipns;
        else if constexpr (std::is_same_v<T, GetIpnsReply>) return Type::get_ipns_reply;
        else if constexpr (std::is_same_v<T, Want>) return Type::want;
        else if constexpr (std::is_same_v<T, Have>) return Type::have;
        else if constexpr (std::is_same_v<T, BlockData>) return Type::block;
        else if constexpr (std::is_same_v<T, Cancel>) return Type::cancel;
        else return Type::dont_have;
      },
      payload);
}

std::string_view type_name(Type type) {
  switch (type) {
    case Type::ping: return "PING";
    case Type::pong: return "PONG";
    case Type::find_node: return "FIND_NODE";
    case Type::find_node_reply: return "FIND_NODE_REPLY";
    case Type::get_providers: return "GET_PROVIDERS";
    case Type::get_providers_reply: return "GET_PROVIDERS_REPLY";
    case Type::put_provider: return "PUT_PROVIDER";
    case Type::ack: return "ACK";
    case Type::put_ipns: return "PUT_IPNS";
    case Type::get_ipns: return "GET_IPNS";
    case Type::get_ipns_reply: return "GET_IPNS_REPLY";
    case Type::want: return "WANT";
    case Type::have: return "HAVE";
    case Type::block: return "BLOCK";
    case Type::cancel: return "CANCEL";
    case Type::dont_have: return "DONT_HAVE";
  }
  return "UNKNOWN";
}

std::optional<Type> peek_type(ByteView bytes) {
  if (bytes.size() < 2 || bytes[0] != kVersion || !known_type(bytes[1])) return std::nullopt;
  return static_cast<Type>(bytes[1]);
}

bool is_exchange(Type type) { return static_cast<std::uint8_t>(type) >= 32; }

Bytes encode(const Message& message) {
  Writer w;
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(type_of(message.payload)));
  w.varint(message.request_id);
  w.peer(message.sender);
  std::visit([&](const auto& m) { w.body(m); }, message.payload);
  return std::move(w.out);
}

Message decode(ByteView bytes) {
  Reader r(bytes);
  if (r.in.u8() != kVersion) throw Error(ErrorCode::malformed_message, "unsupported version");
  auto t = r.in.u8();
  if (!known_type(t)) throw Error(ErrorCode::malformed_message, "unknown message type");
  Message m;
  m.request_id = r.in.varint();
  m.sender = r.peer();
  if (m.sender.addresses.empty()) throw Error(ErrorCode::malformed_message, "sender has no address");
  m.payload = r.body(static_cast<Type>(t));
  if (!r.in.done()) throw Error(ErrorCode::malformed_message, "trailing bytes");
  return m;
}

}  // namespace pstore::wire
