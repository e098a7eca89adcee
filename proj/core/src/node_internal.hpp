// SPDX-License-Identifier: Apache-2.0

// Asynchronous state machines driven by a Node: iterative DHT lookups,
// single-block fetch sessions and whole-DAG fetches.

#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "pstore/node.hpp"

namespace pstore {

/// Kademlia iterative lookup. Queries up to alpha of the closest unqueried
/// candidates at a time and finishes once the k closest live candidates
/// have all answered.
class Lookup : public std::enable_shared_from_this<Lookup> {
 public:
  enum class Kind { find_node, get_providers, get_ipns };
  // Called for every reply; returning true ends the lookup early.
  using ReplyHook = std::function<bool(const dht::PeerInfo& from, const wire::Payload& reply)>;

  Lookup(Node& node, Kind kind, dht::Key256 target, ReplyHook hook, Callback<LookupResult> done);
  void start();

 private:
  struct Candidate {
    enum class State { fresh, waiting, done, failed };
    dht::PeerInfo info;
    State state = State::fresh;
    std::size_t depth = 1;
  };

  void pump();
  void query(const dht::Key256& distance, Candidate& candidate);
  void on_response(const dht::Key256& distance, std::optional<wire::Message> reply);
  void add_candidate(const dht::PeerInfo& peer, std::size_t depth);
  void finish();
  wire::Payload make_request() const;
  const std::vector<dht::PeerInfo>* closer_peers(const wire::Payload& reply) const;

  Node& node_;
  Kind kind_;
  dht::Key256 target_;
  ReplyHook hook_;
  Callback<LookupResult> done_;
  std::map<dht::Key256, Candidate> candidates_;  // keyed by XOR distance to target
  std::size_t in_flight_ = 0;
  bool finished_ = false;
};

struct FetchedBlock {
  dag::Block block;
  std::optional<dht::PeerInfo> from;
};

/// One want-list session for one block.
class BlockFetch : public std::enable_shared_from_this<BlockFetch> {
 public:
  BlockFetch(Node& node, Cid cid, std::vector<dht::PeerInfo> candidates, SimDuration timeout,
             Callback<FetchedBlock> done);

  void start();
  void on_block(const dht::PeerInfo& from, const dag::Block& block);
  void on_corrupt(const dht::PeerId& from);
  void on_dont_have(const dht::PeerId& from);
  void on_have(const dht::PeerInfo& from);
  void cancel();

  const Cid& cid() const { return cid_; }
  bool finished() const { return finished_; }

 private:
  void widen();
  void peer_failed(const dht::PeerId& peer);
  void finish(Result<FetchedBlock> result);

  Node& node_;
  exchange::SessionId session_;
  Cid cid_;
  std::vector<dht::PeerInfo> candidates_;
  std::size_t next_ = 0;
  std::map<dht::PeerId, Environment::TimerId> outstanding_;
  std::size_t corrupt_ = 0;
  bool finished_ = false;
  SimDuration timeout_;
  Environment::TimerId deadline_ = 0;
  Callback<FetchedBlock> done_;
};

/// Breadth-first fetch of every block under a root with bounded
/// concurrency. Peers that served blocks are tried first for later blocks
/// before falling back to a provider lookup.
class DagFetch : public std::enable_shared_from_this<DagFetch> {
 public:
  DagFetch(Node& node, Cid root, ProviderResolver resolver, Callback<std::vector<dag::Block>> done);
  void start();

 private:
  void pump();
  void process(const Cid& cid);
  void attempt(const Cid& cid, bool use_session, std::set<dht::PeerId> tried);
  void fetch_from(const Cid& cid, std::vector<dht::PeerInfo> candidates, bool from_session);
  void got(Result<FetchedBlock> result);
  void on_block(const dag::Block& block);
  void fail(const Error& error, const Cid& cid);

  Node& node_;
  Cid root_;
  ProviderResolver resolver_;
  Callback<std::vector<dag::Block>> done_;
  std::deque<Cid> queue_;
  std::set<Cid> seen_;
  std::vector<dag::Block> blocks_;
  std::vector<dht::PeerInfo> session_peers_;
  std::vector<std::weak_ptr<BlockFetch>> active_;
  std::size_t in_flight_ = 0;
  bool finished_ = false;
};

std::shared_ptr<BlockFetch> start_block_fetch(Node& node, const Cid& cid, std::vector<dht::PeerInfo> candidates,
                                              SimDuration timeout, Callback<FetchedBlock> done);

}  // namespace pstore
