// SPDX-License-Identifier: Apache-2.0

#include "pstore/node.hpp"

#include <algorithm>

#include "node_internal.hpp"

namespace pstore {

void NodeConfig::validate() const {
  auto positive = [](bool ok, const char* field) {
    if (!ok) throw Error(ErrorCode::invalid_argument, std::string(field) + " must be positive");
  };
  positive(chunk_size > 0, "chunk_size");
  positive(fanout >= 2, "fanout (>= 2)");
  positive(capacity_bytes > 0, "capacity_bytes");
  positive(provider_ttl > SimDuration::zero(), "provider_ttl");
  positive(reprovide_interval > SimDuration::zero(), "reprovide_interval");
  positive(k > 0, "k");
  positive(alpha > 0, "alpha");
  positive(gc_interval > SimDuration::zero(), "gc_interval");
  positive(maintenance_interval > SimDuration::zero(), "maintenance_interval");
  positive(rpc_timeout > SimDuration::zero(), "rpc_timeout");
  positive(fetch_timeout > SimDuration::zero(), "fetch_timeout");
  positive(request_timeout > SimDuration::zero(), "request_timeout");
  positive(max_in_flight > 0, "max_in_flight");
  positive(provider_limit > 0, "provider_limit");
}

Node::Node(Environment& env, crypto::KeyPair keys, NodeConfig config)
    : env_(env),
      keys_(std::move(keys)),
      id_(dht::peer_id_from_public_key(keys_.encoded_public_key())),
      config_(config),
      table_(id_, config.k),
      blocks_(config.capacity_bytes) {
  config_.validate();
}

Node::~Node() = default;

dht::PeerInfo Node::self_info() const {
  return dht::PeerInfo{id_, {dht::Multiaddress::sim(env_.self_index())}, env_.now()};
}

void Node::start() {
  if (started_) return;
  started_ = true;
  last_gc_ = env_.now();
  env_.schedule(config_.maintenance_interval, [this] { maintenance(); });
}

void Node::bootstrap(std::vector<dht::PeerInfo> peers, Callback<Unit> done) {
  std::erase_if(peers, [&](const dht::PeerInfo& p) { return p.peer == id_; });
  bootstrap_peers_ = peers;
  if (peers.empty()) {
    if (done) done(Unit{});
    return;
  }
  auto remaining = std::make_shared<std::size_t>(peers.size());
  for (const auto& p : peers) {
    request(p, wire::Ping{}, [this, remaining, done](std::optional<wire::Message>) {
      if (--*remaining > 0) return;
      find_node(id_, [done](Result<LookupResult>) {
        if (done) done(Unit{});
      });
    });
  }
}

void Node::seen(const dht::PeerInfo& peer) {
  if (peer.peer == id_) return;
  auto info = peer;
  info.last_seen = env_.now();
  table_.update(info);
  evicted_.erase(peer.peer);
}

void Node::send_to(const dht::PeerInfo& to, std::uint64_t request_id, wire::Payload payload) {
  auto index = to.sim_index();
  if (!index) return;
  wire::Message m{request_id, self_info(), std::move(payload)};
  env_.send(*index, wire::encode(m));
}

void Node::request(const dht::PeerInfo& to, wire::Payload payload, ReplyHandler handler) {
  auto index = to.sim_index();
  if (!index || to.peer == id_) {
    env_.schedule(SimDuration::zero(), [handler = std::move(handler)] { handler(std::nullopt); });
    return;
  }
  auto id = next_request_id_++;
  auto timer = env_.schedule(config_.rpc_timeout, [this, id] {
    auto it = pending_.find(id);
    if (it == pending_.end()) return;
    auto pending = std::move(it->second);
    pending_.erase(it);
    env_.count("rpc_timeouts");
    if (auto info = table_.find(pending.peer); info && table_.remove(pending.peer))
      evicted_[pending.peer] = EvictedPeer{*info, 0};
    pending.handler(std::nullopt);
  });
  pending_.emplace(id, PendingRequest{to.peer, timer, std::move(handler)});
  send_to(to, id, std::move(payload));
}

void Node::on_reply(const wire::Message& message) {
  auto it = pending_.find(message.request_id);
  if (it == pending_.end() || it->second.peer != message.sender.peer) {
    env_.count("late_replies");
    return;
  }
  auto pending = std::move(it->second);
  pending_.erase(it);
  env_.cancel(pending.timer);
  pending.handler(message);
}

void Node::on_message(std::uint32_t from, ByteView bytes) {
  wire::Message message;
  try {
    message = wire::decode(bytes);
  } catch (const Error&) {
    env_.count("malformed_messages");
    return;
  }
  if (message.sender.sim_index() != from) {
    env_.count("malformed_messages");
    return;
  }
  seen(message.sender);

  switch (wire::type_of(message.payload)) {
    case wire::Type::ping:
    case wire::Type::find_node:
    case wire::Type::get_providers:
    case wire::Type::put_provider:
    case wire::Type::put_ipns:
    case wire::Type::get_ipns:
      if (auto reply = handle_rpc(message)) send_to(message.sender, message.request_id, std::move(*reply));
      break;
    case wire::Type::pong:
    case wire::Type::find_node_reply:
    case wire::Type::get_providers_reply:
    case wire::Type::ack:
    case wire::Type::get_ipns_reply:
      on_reply(message);
      break;
    default:
      if (auto reply = handle_exchange(message.sender, message.payload)) send_to(message.sender, 0, std::move(*reply));
      break;
  }
}

std::optional<wire::Payload> Node::handle_rpc(const wire::Message& message) {
  const auto now = env_.now();
  return std::visit(
      [&](const auto& m) -> std::optional<wire::Payload> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, wire::Ping>) {
          return wire::Pong{};
        } else if constexpr (std::is_same_v<T, wire::FindNode>) {
          return wire::FindNodeReply{table_.closest(m.target, config_.k)};
        } else if constexpr (std::is_same_v<T, wire::GetProviders>) {
          return wire::GetProvidersReply{providers_.get(m.key, now), table_.closest(m.key, config_.k)};
        } else if constexpr (std::is_same_v<T, wire::PutProvider>) {
          bool ok = m.record.provider == message.sender.peer && m.record.expires_at > now && !m.record.addresses.empty();
          if (ok) providers_.put(m.record, now);
          return wire::Ack{ok};
        } else if constexpr (std::is_same_v<T, wire::PutIpns>) {
          return wire::Ack{ipns_store_.put(m.record, now)};
        } else if constexpr (std::is_same_v<T, wire::GetIpns>) {
          return wire::GetIpnsReply{ipns_store_.get(m.key, now), table_.closest(m.key, config_.k)};
        } else {
          return std::nullopt;
        }
      },
      message.payload);
}

void Node::set_reprovide(const Cid& cid, bool enabled) {
  if (enabled)
    no_reprovide_.erase(cid);
  else
    no_reprovide_.insert(cid);
}

bool Node::reprovide_enabled(const Cid& cid) const { return config_.reprovide && !no_reprovide_.contains(cid); }

bool Node::can_share(const Cid& cid) const {
  const auto* block = blocks_.peek(cid);
  if (!block) return false;
  return block->origin == Origin::local || config_.share_cache;
}

std::size_t Node::republish_tick() {
  const auto now = env_.now();
  providers_.purge(now);
  ipns_store_.purge(now);

  std::vector<Cid> due;
  for (auto it = provided_.begin(); it != provided_.end();) {
    const auto& [cid, last] = *it;
    if (!blocks_.has(cid)) {
      it = provided_.erase(it);
      continue;
    }
    if (now - last >= config_.reprovide_interval && reprovide_enabled(cid) && can_share(cid)) due.push_back(cid);
    ++it;
  }
  for (const auto& cid : due) provide(cid, [](Result<ProvideResult>) {});

  if (own_record_ && config_.reprovide && now - own_record_published_ >= config_.reprovide_interval) {
    own_record_ = ipns::make_record(keys_, own_record_->value, own_record_->sequence, now + config_.provider_ttl);
    own_record_published_ = now;
    ipns_store_.put(*own_record_, now);
    put_ipns_record(*own_record_, [](Result<Unit>) {});
  }
  if (!due.empty()) env_.count("republished", due.size());
  return due.size();
}

void Node::recheck_evicted() {
  constexpr int kMaxFailures = 3;
  constexpr std::size_t kPerTick = 8;
  std::vector<dht::PeerInfo> batch;
  for (auto it = evicted_.begin(); it != evicted_.end() && batch.size() < kPerTick; ++it)
    batch.push_back(it->second.info);
  for (const auto& info : batch) {
    request(info, wire::Ping{}, [this, peer = info.peer](std::optional<wire::Message> reply) {
      if (reply) return;  // seen() already re-added it
      auto it = evicted_.find(peer);
      if (it != evicted_.end() && ++it->second.failures >= kMaxFailures) evicted_.erase(it);
    });
  }
}

void Node::maintenance() {
  republish_tick();
  if (env_.now() - last_gc_ >= config_.gc_interval) {
    gc();
    last_gc_ = env_.now();
  }
  for (const auto& p : bootstrap_peers_)
    if (!table_.contains(p.peer)) request(p, wire::Ping{}, [](std::optional<wire::Message>) {});
  recheck_evicted();
  if (table_.size() < config_.k) find_node(id_, [](Result<LookupResult>) {});
  env_.schedule(config_.maintenance_interval, [this] { maintenance(); });
}

std::vector<Cid> Node::gc() { return gc({}); }

std::vector<Cid> Node::gc(const std::set<Cid>& keep, std::uint64_t reserve) {
  auto protect = pins_.closure(blocks_);
  protect.insert(keep.begin(), keep.end());
  auto evicted = blocks_.gc(protect, reserve);
  for (const auto& cid : evicted) provided_.erase(cid);
  eviction_log_.insert(eviction_log_.end(), evicted.begin(), evicted.end());
  if (!evicted.empty()) env_.count("blocks_evicted", evicted.size());
  return evicted;
}

std::optional<Bytes> Node::local_block(const Cid& cid) {
  if (const auto* b = blocks_.get(cid, env_.now())) return *b;
  return std::nullopt;
}

void Node::restore_ipns(std::uint64_t sequence, std::optional<ipns::IpnsRecord> record) {
  ipns_sequence_ = sequence;
  own_record_ = std::move(record);
  if (own_record_) {
    own_record_published_ = env_.now();
    ipns_store_.put_unchecked(*own_record_);
  }
}

}  // namespace pstore
