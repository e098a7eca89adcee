// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "node_internal.hpp"

namespace pstore {

BlockFetch::BlockFetch(Node& node, Cid cid, std::vector<dht::PeerInfo> candidates, SimDuration timeout,
                       Callback<FetchedBlock> done)
    : node_(node),
      session_(node.next_session_++),
      cid_(std::move(cid)),
      candidates_(std::move(candidates)),
      timeout_(timeout),
      done_(std::move(done)) {
  std::set<dht::PeerId> unique;
  std::erase_if(candidates_, [&](const dht::PeerInfo& p) {
    return p.peer == node_.id_ || !p.sim_index() || !unique.insert(p.peer).second;
  });
}

void BlockFetch::start() {
  if (candidates_.empty()) {
    // Report asynchronously so callers never re-enter themselves.
    node_.env_.schedule(SimDuration::zero(), [self = shared_from_this()] {
      self->finish(Error(ErrorCode::not_found, self->cid_.to_string()));
    });
    return;
  }
  node_.wants_.add(cid_, 1, session_);
  node_.fetches_[cid_].push_back(shared_from_this());
  deadline_ = node_.env_.schedule(timeout_, [self = shared_from_this()] {
    self->finish(Error(ErrorCode::timeout, self->cid_.to_string()));
  });
  widen();
}

void BlockFetch::widen() {
  if (finished_) return;
  while (outstanding_.size() < node_.config_.alpha && next_ < candidates_.size()) {
    const auto& p = candidates_[next_++];
    auto timer = node_.env_.schedule(node_.config_.rpc_timeout, [self = shared_from_this(), peer = p.peer] {
      self->node_.env_.count("want_timeouts");
      self->peer_failed(peer);
    });
    outstanding_[p.peer] = timer;
    node_.send_to(p, 0, wire::Want{cid_, 1});
  }
  if (outstanding_.empty() && next_ >= candidates_.size()) {
    finish(Error(corrupt_ > 0 ? ErrorCode::integrity_violation : ErrorCode::not_found, cid_.to_string()));
  }
}

void BlockFetch::peer_failed(const dht::PeerId& peer) {
  auto it = outstanding_.find(peer);
  if (it == outstanding_.end()) return;
  node_.env_.cancel(it->second);
  outstanding_.erase(it);
  widen();
}

void BlockFetch::on_block(const dht::PeerInfo& from, const dag::Block& block) {
  if (finished_) return;
  auto it = outstanding_.find(from.peer);
  if (it != outstanding_.end()) {
    node_.env_.cancel(it->second);
    outstanding_.erase(it);
  }
  finish(FetchedBlock{block, from});
}

void BlockFetch::on_corrupt(const dht::PeerId& from) {
  if (finished_) return;
  ++corrupt_;
  peer_failed(from);
}

void BlockFetch::on_dont_have(const dht::PeerId& from) {
  if (finished_) return;
  peer_failed(from);
}

void BlockFetch::on_have(const dht::PeerInfo& from) {
  if (finished_ || outstanding_.contains(from.peer)) return;
  if (std::none_of(candidates_.begin(), candidates_.end(), [&](const auto& p) { return p.peer == from.peer; }))
    candidates_.push_back(from);
}

void BlockFetch::cancel() {
  if (finished_) return;
  auto done = std::move(done_);
  finish(Error(ErrorCode::not_found, cid_.to_string()));
}

void BlockFetch::finish(Result<FetchedBlock> result) {
  if (finished_) return;
  finished_ = true;
  node_.env_.cancel(deadline_);
  for (const auto& [peer, timer] : outstanding_) {
    node_.env_.cancel(timer);
    auto info = std::find_if(candidates_.begin(), candidates_.end(), [&](const auto& p) { return p.peer == peer; });
    if (info != candidates_.end()) node_.send_to(*info, 0, wire::Cancel{cid_});
  }
  outstanding_.clear();
  node_.wants_.remove(cid_, session_);
  auto it = node_.fetches_.find(cid_);
  if (it != node_.fetches_.end()) {
    std::erase_if(it->second, [this](const auto& f) { return f.get() == this; });
    if (it->second.empty()) node_.fetches_.erase(it);
  }
  auto done = std::move(done_);
  if (done) done(std::move(result));
}

std::shared_ptr<BlockFetch> start_block_fetch(Node& node, const Cid& cid, std::vector<dht::PeerInfo> candidates,
                                              SimDuration timeout, Callback<FetchedBlock> done) {
  auto fetch = std::make_shared<BlockFetch>(node, cid, std::move(candidates), timeout, std::move(done));
  fetch->start();
  return fetch;
}

void Node::fetch_block(const Cid& cid, std::vector<dht::PeerInfo> candidates, SimDuration timeout,
                       Callback<dag::Block> done) {
  if (const auto* data = blocks_.get(cid, env_.now())) {
    done(dag::Block{cid, *data});
    return;
  }
  start_block_fetch(*this, cid, std::move(candidates), timeout, [done = std::move(done)](Result<FetchedBlock> r) {
    if (r.ok())
      done(std::move(r.value().block));
    else
      done(r.error());
  });
}

void Node::on_block_data(const dht::PeerInfo& from, const wire::BlockData& message) {
  const auto& cid = message.cid;
  if (!cid_verify(message.data, cid)) {
    env_.count("corrupt_blocks_detected");
    auto it = fetches_.find(cid);
    if (it == fetches_.end()) return;
    auto sessions = it->second;
    for (const auto& f : sessions) f->on_corrupt(from.peer);
    return;
  }
  auto it = fetches_.find(cid);
  if (it == fetches_.end() || it->second.empty()) {
    env_.count("duplicate_blocks");
    return;
  }
  env_.count("blocks_received");
  env_.count("block_bytes_received", message.data.size());
  blocks_.put(cid, message.data, Origin::cached, env_.now());
  if (blocks_.over_capacity()) {
    std::set<Cid> keep;
    for (const auto& [wanted, _] : fetches_) keep.insert(wanted);
    gc(keep);
  }
  dag::Block block{cid, message.data};
  auto sessions = it->second;
  for (const auto& f : sessions) f->on_block(from, block);
}

std::optional<wire::Payload> Node::handle_exchange(const dht::PeerInfo& from, const wire::Payload& message) {
  if (const auto* want = std::get_if<wire::Want>(&message)) {
    if (can_share(want->cid)) {
      const auto* data = blocks_.get(want->cid, env_.now());
      env_.count("blocks_served");
      return wire::BlockData{want->cid, *data};
    }
    return wire::DontHave{want->cid};
  }
  if (const auto* have = std::get_if<wire::Have>(&message)) {
    if (auto it = fetches_.find(have->cid); it != fetches_.end()) {
      auto sessions = it->second;
      for (const auto& f : sessions) f->on_have(from);
    }
    return std::nullopt;
  }
  if (const auto* block = std::get_if<wire::BlockData>(&message)) {
    on_block_data(from, *block);
    return std::nullopt;
  }
  if (std::holds_alternative<wire::Cancel>(message)) {
    env_.count("cancels_received");
    return std::nullopt;
  }
  if (const auto* dont = std::get_if<wire::DontHave>(&message)) {
    if (auto it = fetches_.find(dont->cid); it != fetches_.end()) {
      auto sessions = it->second;
      for (const auto& f : sessions) f->on_dont_have(from.peer);
    }
    return std::nullopt;
  }
  throw Error(ErrorCode::malformed_message, "not an exchange message");
}

ProviderResolver Node::dht_resolver() {
  return [this](const Cid& cid, Callback<std::vector<dht::PeerInfo>> done) {
    find_providers(cid, config_.provider_limit, [this, cid, done](Result<std::vector<dht::ProviderRecord>> r) {
      if (!r.ok()) {
        done(r.error());
        return;
      }
      std::vector<dht::PeerInfo> peers;
      for (const auto& rec : r.value())
        if (rec.provider != id_) peers.push_back(dht::PeerInfo{rec.provider, rec.addresses, {}});
      if (peers.empty())
        done(Error(ErrorCode::not_found, cid.to_string()));
      else
        done(std::move(peers));
    });
  };
}

// --- DagFetch ------------------------------------------------------------

DagFetch::DagFetch(Node& node, Cid root, ProviderResolver resolver, Callback<std::vector<dag::Block>> done)
    : node_(node), root_(std::move(root)), resolver_(std::move(resolver)), done_(std::move(done)) {}

void DagFetch::start() {
  seen_.insert(root_);
  queue_.push_back(root_);
  pump();
}

void DagFetch::pump() {
  auto self = shared_from_this();
  while (!finished_ && in_flight_ < node_.config_.max_in_flight && !queue_.empty()) {
    auto cid = queue_.front();
    queue_.pop_front();
    process(cid);
  }
  if (!finished_ && queue_.empty() && in_flight_ == 0) {
    finished_ = true;
    auto done = std::move(done_);
    done(std::move(blocks_));
  }
}

void DagFetch::process(const Cid& cid) {
  if (const auto* data = node_.blocks_.get(cid, node_.env_.now())) {
    on_block(dag::Block{cid, *data});
    return;
  }
  ++in_flight_;
  attempt(cid, !session_peers_.empty(), {});
}

void DagFetch::attempt(const Cid& cid, bool use_session, std::set<dht::PeerId> tried) {
  if (finished_) return;
  if (use_session) {
    auto candidates = session_peers_;
    auto fetch = start_block_fetch(
        node_, cid, candidates, node_.config_.fetch_timeout,
        [self = shared_from_this(), cid, candidates](Result<FetchedBlock> r) {
          if (r.ok() || r.error().code() == ErrorCode::timeout) {
            self->got(std::move(r));
            return;
          }
          std::set<dht::PeerId> tried;
          for (const auto& p : candidates) tried.insert(p.peer);
          self->attempt(cid, false, std::move(tried));
        });
    active_.push_back(fetch);
    return;
  }
  resolver_(cid, [self = shared_from_this(), cid, tried](Result<std::vector<dht::PeerInfo>> r) {
    if (self->finished_) return;
    if (!r.ok()) {
      self->fail(r.error(), cid);
      return;
    }
    auto candidates = std::move(r.value());
    std::erase_if(candidates, [&](const dht::PeerInfo& p) { return tried.contains(p.peer); });
    if (candidates.empty()) {
      self->fail(Error(ErrorCode::not_found), cid);
      return;
    }
    auto fetch = start_block_fetch(self->node_, cid, std::move(candidates), self->node_.config_.fetch_timeout,
                                   [self](Result<FetchedBlock> fr) { self->got(std::move(fr)); });
    self->active_.push_back(fetch);
  });
}

void DagFetch::got(Result<FetchedBlock> result) {
  if (finished_) return;
  --in_flight_;
  if (!result.ok()) {
    fail(result.error(), Cid{});
    return;
  }
  auto& fetched = result.value();
  if (fetched.from && std::none_of(session_peers_.begin(), session_peers_.end(),
                                   [&](const auto& p) { return p.peer == fetched.from->peer; }))
    session_peers_.push_back(*fetched.from);
  std::erase_if(active_, [](const auto& w) { return w.expired(); });
  on_block(fetched.block);
  pump();
}

void DagFetch::on_block(const dag::Block& block) {
  if (finished_) return;
  dag::DagNode node;
  try {
    node = block.node();
  } catch (const Error& e) {
    fail(e, block.cid);
    return;
  }
  blocks_.push_back(block);
  for (const auto& link : node.links)
    if (seen_.insert(link.target).second) queue_.push_back(link.target);
}

void DagFetch::fail(const Error& error, const Cid& cid) {
  if (finished_) return;
  finished_ = true;
  for (const auto& w : active_)
    if (auto f = w.lock()) f->cancel();
  active_.clear();
  std::string what = error.what();
  if (!cid.empty() && what.find(cid.to_string()) == std::string::npos) {
    done_(Error(error.code(), cid.to_string()));
    return;
  }
  auto done = std::move(done_);
  done(error);
}

void Node::fetch_dag(const Cid& root, ProviderResolver resolver, Callback<std::vector<dag::Block>> done) {
  std::make_shared<DagFetch>(*this, root, std::move(resolver), std::move(done))->start();
}

}  // namespace pstore
