// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "node_internal.hpp"

namespace pstore {

Lookup::Lookup(Node& node, Kind kind, dht::Key256 target, ReplyHook hook, Callback<LookupResult> done)
    : node_(node), kind_(kind), target_(target), hook_(std::move(hook)), done_(std::move(done)) {}

void Lookup::start() {
  for (const auto& p : node_.table_.closest(target_, node_.config_.k)) add_candidate(p, 1);
  pump();
}

void Lookup::add_candidate(const dht::PeerInfo& peer, std::size_t depth) {
  if (peer.peer == node_.id_ || peer.addresses.empty()) return;
  candidates_.try_emplace(dht::xor_distance(peer.peer, target_), Candidate{peer, Candidate::State::fresh, depth});
}

wire::Payload Lookup::make_request() const {
  switch (kind_) {
    case Kind::find_node: return wire::FindNode{target_};
    case Kind::get_providers: return wire::GetProviders{target_};
    case Kind::get_ipns: return wire::GetIpns{target_};
  }
  return wire::Ping{};
}

const std::vector<dht::PeerInfo>* Lookup::closer_peers(const wire::Payload& reply) const {
  switch (kind_) {
    case Kind::find_node:
      if (const auto* r = std::get_if<wire::FindNodeReply>(&reply)) return &r->closer;
      break;
    case Kind::get_providers:
      if (const auto* r = std::get_if<wire::GetProvidersReply>(&reply)) return &r->closer;
      break;
    case Kind::get_ipns:
      if (const auto* r = std::get_if<wire::GetIpnsReply>(&reply)) return &r->closer;
      break;
  }
  return nullptr;
}

void Lookup::pump() {
  if (finished_) return;
  const auto k = node_.config_.k;
  std::size_t considered = 0;
  bool settled = true;
  for (auto& [distance, c] : candidates_) {
    if (c.state == Candidate::State::failed) continue;
    if (considered++ >= k) break;
    if (c.state == Candidate::State::fresh) {
      settled = false;
      if (in_flight_ < node_.config_.alpha) query(distance, c);
    } else if (c.state == Candidate::State::waiting) {
      settled = false;
    }
  }
  if (settled) finish();
}

void Lookup::query(const dht::Key256& distance, Candidate& candidate) {
  candidate.state = Candidate::State::waiting;
  ++in_flight_;
  node_.request(candidate.info, make_request(), [self = shared_from_this(), distance](std::optional<wire::Message> reply) {
    self->on_response(distance, std::move(reply));
  });
}

void Lookup::on_response(const dht::Key256& distance, std::optional<wire::Message> reply) {
  --in_flight_;
  if (finished_) return;
  auto it = candidates_.find(distance);
  if (it == candidates_.end()) return;
  auto& c = it->second;
  const auto* closer = reply ? closer_peers(reply->payload) : nullptr;
  if (!closer) {
    c.state = Candidate::State::failed;
    pump();
    return;
  }
  c.state = Candidate::State::done;
  const auto depth = c.depth;
  for (const auto& p : *closer) add_candidate(p, depth + 1);
  if (hook_ && hook_(c.info, reply->payload)) {
    finish();
    return;
  }
  pump();
}

void Lookup::finish() {
  if (finished_) return;
  finished_ = true;
  LookupResult result;
  for (const auto& [_, c] : candidates_) {
    if (c.state != Candidate::State::done) continue;
    result.peers.push_back(c.info);
    result.hops = std::max(result.hops, c.depth);
    if (result.peers.size() >= node_.config_.k) break;
  }
  if (!candidates_.empty()) node_.env_.record_lookup(result.hops);
  auto done = std::move(done_);
  if (done) done(std::move(result));
}

void Node::find_node(const dht::Key256& target, Callback<LookupResult> done) {
  std::make_shared<Lookup>(*this, Lookup::Kind::find_node, target, nullptr, std::move(done))->start();
}

void Node::provide(const Cid& cid, Callback<ProvideResult> done) {
  dht::Key256 key;
  try {
    key = dht::dht_key_for(cid);
  } catch (const Error& e) {
    done(e);
    return;
  }
  provided_[cid] = env_.now();
  find_node(key, [this, key, done = std::move(done)](Result<LookupResult> lookup) {
    auto peers = lookup.ok() ? std::move(lookup.value().peers) : std::vector<dht::PeerInfo>{};
    const auto k = config_.k;
    const auto now = env_.now();
    bool local = peers.size() < k || dht::xor_distance(id_, key) < dht::xor_distance(peers[k - 1].peer, key);
    peers.resize(std::min(peers.size(), local ? k - 1 : k));

    dht::ProviderRecord record{key, id_, self_info().addresses, now + config_.provider_ttl};
    if (local) providers_.put(record, now);

    auto result = std::make_shared<ProvideResult>(ProvideResult{0, local});
    if (peers.empty()) {
      done(*result);
      return;
    }
    auto remaining = std::make_shared<std::size_t>(peers.size());
    for (const auto& p : peers) {
      request(p, wire::PutProvider{record}, [result, remaining, done](std::optional<wire::Message> reply) {
        if (reply) {
          if (const auto* ack = std::get_if<wire::Ack>(&reply->payload); ack && ack->accepted) ++result->remote;
        }
        if (--*remaining == 0) done(*result);
      });
    }
  });
}

void Node::find_providers(const Cid& cid, std::size_t limit, Callback<std::vector<dht::ProviderRecord>> done) {
  dht::Key256 key;
  try {
    key = dht::dht_key_for(cid);
  } catch (const Error& e) {
    done(e);
    return;
  }
  auto found = std::make_shared<std::map<dht::PeerId, dht::ProviderRecord>>();
  for (const auto& r : providers_.get(key, env_.now())) found->emplace(r.provider, r);

  auto collect = [found, limit]() {
    std::vector<dht::ProviderRecord> out;
    for (const auto& [_, r] : *found) {
      if (out.size() >= limit) break;
      out.push_back(r);
    }
    return out;
  };
  if (found->size() >= limit) {
    done(collect());
    return;
  }
  auto hook = [this, found, key, limit](const dht::PeerInfo&, const wire::Payload& reply) {
    if (const auto* r = std::get_if<wire::GetProvidersReply>(&reply)) {
      for (const auto& rec : r->records)
        if (rec.key == key && rec.expires_at > env_.now() && !rec.addresses.empty()) found->emplace(rec.provider, rec);
    }
    return found->size() >= limit;
  };
  std::make_shared<Lookup>(*this, Lookup::Kind::get_providers, key, hook,
                           [collect, done = std::move(done)](Result<LookupResult>) { done(collect()); })
      ->start();
}

void Node::put_ipns_record(const ipns::IpnsRecord& record, Callback<Unit> done) {
  find_node(ipns::dht_key(record.name), [this, record, done = std::move(done)](Result<LookupResult> lookup) {
    auto peers = lookup.ok() ? std::move(lookup.value().peers) : std::vector<dht::PeerInfo>{};
    if (peers.empty()) {
      done(Unit{});
      return;
    }
    auto remaining = std::make_shared<std::size_t>(peers.size());
    for (const auto& p : peers) {
      request(p, wire::PutIpns{record}, [remaining, done](std::optional<wire::Message>) {
        if (--*remaining == 0) done(Unit{});
      });
    }
  });
}

void Node::ipns_lookup(const Cid& name, Callback<ipns::IpnsRecord> done) {
  dht::Key256 key;
  try {
    key = ipns::dht_key(name);
  } catch (const Error& e) {
    done(e);
    return;
  }
  auto records = std::make_shared<std::vector<ipns::IpnsRecord>>();
  if (auto own = ipns_store_.get(key, env_.now())) records->push_back(*own);
  auto hook = [records](const dht::PeerInfo&, const wire::Payload& reply) {
    if (const auto* r = std::get_if<wire::GetIpnsReply>(&reply); r && r->record) records->push_back(*r->record);
    return false;
  };
  std::make_shared<Lookup>(
      *this, Lookup::Kind::get_ipns, key, hook,
      [this, name, records, done = std::move(done)](Result<LookupResult>) {
        const auto now = env_.now();
        std::optional<ipns::IpnsRecord> best;
        bool any = false;
        for (const auto& r : *records) {
          if (r.name != name || r.expires_at <= now) continue;
          any = true;
          if (!ipns::verify_record(r)) {
            env_.count("ipns_invalid_records");
            continue;
          }
          if (!best || r.sequence > best->sequence) best = r;
        }
        // Never go backwards relative to what this node already returned.
        auto seen = ipns_seen_.find(name);
        if (seen != ipns_seen_.end() && seen->second.expires_at > now && (!best || seen->second.sequence > best->sequence))
          best = seen->second;
        if (!best) {
          done(Error(any ? ErrorCode::invalid_signature : ErrorCode::not_found, name.to_string()));
          return;
        }
        ipns_seen_[name] = *best;
        done(*best);
      })
      ->start();
}

}  // namespace pstore
