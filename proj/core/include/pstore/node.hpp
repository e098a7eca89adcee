// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pstore/blockstore.hpp"
#include "pstore/bytes.hpp"
#include "pstore/cid.hpp"
#include "pstore/crypto.hpp"
#include "pstore/dag.hpp"
#include "pstore/dht.hpp"
#include "pstore/error.hpp"
#include "pstore/exchange.hpp"
#include "pstore/ipns.hpp"
#include "pstore/sim_time.hpp"
#include "pstore/wire.hpp"

namespace pstore {

using namespace std::chrono_literals;

struct NodeConfig {
  std::size_t chunk_size = dag::kDefaultChunkSize;
  std::size_t fanout = dag::kDefaultFanout;
  std::uint64_t capacity_bytes = std::uint64_t{1} << 30;
  SimDuration provider_ttl = 24h;
  SimDuration reprovide_interval = 12h;
  bool share_cache = true;
  bool reprovide = true;
  std::size_t k = dht::kDefaultK;
  std::size_t alpha = dht::kDefaultAlpha;
  SimDuration gc_interval = 1h;
  SimDuration maintenance_interval = 1h;
  SimDuration rpc_timeout = 2s;
  SimDuration fetch_timeout = 30s;
  SimDuration request_timeout = 60s;
  std::size_t max_in_flight = 16;
  std::size_t provider_limit = 20;

  // Throws invalid-argument unless every field is positive.
  void validate() const;
};

/// What a node needs from the network it lives in. The simulator provides
/// one per node; all callbacks run on the single simulation driver.
class Environment {
 public:
  using TimerId = std::uint64_t;

  virtual ~Environment() = default;
  virtual SimTime now() const = 0;
  virtual std::uint32_t self_index() const = 0;
  virtual void send(std::uint32_t to, Bytes payload) = 0;
  virtual TimerId schedule(SimDuration delay, std::function<void()> fn) = 0;
  virtual void cancel(TimerId timer) = 0;
  virtual void count(std::string_view counter, std::uint64_t n = 1) = 0;
  virtual void record_lookup(std::size_t hops) = 0;
};

template <typename T>
using Callback = std::function<void(Result<T>)>;

struct Content {
  Cid cid;
  Bytes data;
};

struct LookupResult {
  std::vector<dht::PeerInfo> peers;  // closest first, self excluded
  std::size_t hops = 0;
};

struct ProvideResult {
  std::size_t remote = 0;  // peers that acknowledged the record
  bool local = false;      // stored by this node because it is among the k closest
  std::size_t total() const { return remote + (local ? 1 : 0); }
};

// Domain name -> TXT record strings.
using TxtLookup = std::function<std::vector<std::string>(std::string_view domain)>;
// Cid -> candidate providers.
using ProviderResolver = std::function<void(const Cid&, Callback<std::vector<dht::PeerInfo>>)>;

class Lookup;
class BlockFetch;
class DagFetch;

/// A peer: DHT participant, block exchange endpoint and content store.
///
/// All state is owned by the node and mutated only from Environment
/// callbacks and public calls made on the simulation driver, so no locking
/// is needed. Asynchronous operations report through a Callback exactly
/// once, unless the node leaves the network first.
class Node {
 public:
  Node(Environment& env, crypto::KeyPair keys, NodeConfig config);
  ~Node();
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  const dht::PeerId& id() const { return id_; }
  const crypto::KeyPair& keys() const { return keys_; }
  const NodeConfig& config() const { return config_; }
  dht::PeerInfo self_info() const;
  Cid ipns_name() const { return ipns::name_for(keys_); }

  // Schedules periodic maintenance (republish, gc, routing refresh).
  void start();
  // Pings the bootstrap peers and runs a self-lookup to fill the table.
  void bootstrap(std::vector<dht::PeerInfo> peers, Callback<Unit> done = {});
  void on_message(std::uint32_t from, ByteView bytes);

  // --- dht -------------------------------------------------------------
  void find_node(const dht::Key256& target, Callback<LookupResult> done);
  void provide(const Cid& cid, Callback<ProvideResult> done);
  void find_providers(const Cid& cid, std::size_t limit, Callback<std::vector<dht::ProviderRecord>> done);
  // Serves one RPC; std::nullopt for messages that are not DHT requests.
  std::optional<wire::Payload> handle_rpc(const wire::Message& message);
  std::size_t republish_tick();

  // --- exchange --------------------------------------------------------
  void fetch_block(const Cid& cid, std::vector<dht::PeerInfo> candidates, SimDuration timeout,
                   Callback<dag::Block> done);
  void fetch_dag(const Cid& root, ProviderResolver resolver, Callback<std::vector<dag::Block>> done);
  std::optional<wire::Payload> handle_exchange(const dht::PeerInfo& from, const wire::Payload& message);
  const exchange::WantList& want_list() const { return wants_; }
  ProviderResolver dht_resolver();

  // --- content ---------------------------------------------------------
  // Chunks and stores locally without touching the network; returns the
  // root and every block Cid. Throws storage-full.
  dag::FileDag import(ByteView data, bool pin);
  void add(Bytes data, bool pin, Callback<Cid> done);
  void add_directory(std::vector<std::pair<std::string, Bytes>> entries, bool pin, Callback<Cid> done);
  void get(std::string path, Callback<Content> done);
  void resolve(std::string path, Callback<Cid> done);
  void ls(std::string path, Callback<std::vector<dag::Link>> done);
  void pin(const Cid& cid, bool recursive, Callback<Unit> done);
  bool unpin(const Cid& cid);
  std::vector<Cid> gc();
  // Gc of everything outside `keep` and the pin closure, leaving `reserve`
  // bytes free.
  std::vector<Cid> gc(const std::set<Cid>& keep, std::uint64_t reserve = 0);
  // Local-only read used by reassembly after a fetch.
  std::optional<Bytes> local_block(const Cid& cid);

  // --- naming ----------------------------------------------------------
  void ipns_publish(std::string path, Callback<Cid> done);
  void ipns_resolve(const Cid& name, Callback<dag::IpfsPath> done);
  void dnslink_resolve(std::string domain, Callback<dag::IpfsPath> done);
  void dnslink_resolve(std::string domain, TxtLookup txt, Callback<dag::IpfsPath> done);
  // Resolves /ipfs/, /ipns/<name> and /ipns/<domain> paths to an /ipfs path.
  void resolve_name_path(std::string path, Callback<dag::IpfsPath> done);
  void set_txt_lookup(TxtLookup txt) { txt_ = std::move(txt); }

  // --- policy ----------------------------------------------------------
  void set_share_cache(bool enabled) { config_.share_cache = enabled; }
  bool share_cache() const { return config_.share_cache; }
  void set_reprovide(const Cid& cid, bool enabled);
  bool reprovide_enabled(const Cid& cid) const;
  bool can_share(const Cid& cid) const;

  // --- state access ----------------------------------------------------
  dht::RoutingTable& routing_table() { return table_; }
  const dht::RoutingTable& routing_table() const { return table_; }
  dht::ProviderStore& provider_store() { return providers_; }
  const dht::ProviderStore& provider_store() const { return providers_; }
  ipns::IpnsStore& ipns_store() { return ipns_store_; }
  Blockstore& blockstore() { return blocks_; }
  const Blockstore& blockstore() const { return blocks_; }
  PinSet& pins() { return pins_; }
  const PinSet& pins() const { return pins_; }
  const std::map<Cid, SimTime>& provided() const { return provided_; }
  const std::set<Cid>& reprovide_disabled() const { return no_reprovide_; }
  std::uint64_t ipns_sequence() const { return ipns_sequence_; }
  const std::optional<ipns::IpnsRecord>& own_ipns_record() const { return own_record_; }
  void restore_ipns(std::uint64_t sequence, std::optional<ipns::IpnsRecord> record);
  const std::vector<Cid>& eviction_log() const { return eviction_log_; }
  SimTime now() const { return env_.now(); }
  Environment& environment() { return env_; }

 private:
  friend class Lookup;
  friend class BlockFetch;
  friend class DagFetch;

  using ReplyHandler = std::function<void(std::optional<wire::Message>)>;

  struct PendingRequest {
    dht::PeerId peer;
    Environment::TimerId timer = 0;
    ReplyHandler handler;
  };

  void send_to(const dht::PeerInfo& to, std::uint64_t request_id, wire::Payload payload);
  void request(const dht::PeerInfo& to, wire::Payload payload, ReplyHandler handler);
  void on_reply(const wire::Message& message);
  void seen(const dht::PeerInfo& peer);

  void provide_many(std::vector<Cid> cids, Callback<Unit> done);
  void store_new(const std::vector<dag::Block>& nodes);
  void get_block(const Cid& cid, Callback<dag::Block> done);
  void announce_cached(const std::vector<dag::Block>& blocks);
  void resolve_segments(dag::IpfsPath path, std::size_t index, Callback<Cid> done);
  void resolve_name_path(std::string path, TxtLookup txt, int depth, Callback<dag::IpfsPath> done);
  void ipns_lookup(const Cid& name, Callback<ipns::IpnsRecord> done);
  void dnslink_resolve(std::string domain, TxtLookup txt, int depth, Callback<dag::IpfsPath> done);
  void maintenance();
  void recheck_evicted();
  void put_ipns_record(const ipns::IpnsRecord& record, Callback<Unit> done);
  void on_block_data(const dht::PeerInfo& from, const wire::BlockData& block);

  Environment& env_;
  crypto::KeyPair keys_;
  dht::PeerId id_;
  NodeConfig config_;

  dht::RoutingTable table_;
  dht::ProviderStore providers_;
  ipns::IpnsStore ipns_store_;
  Blockstore blocks_;
  PinSet pins_;
  exchange::WantList wants_;

  std::uint64_t next_request_id_ = 1;
  std::map<std::uint64_t, PendingRequest> pending_;
  exchange::SessionId next_session_ = 1;
  std::map<Cid, std::vector<std::shared_ptr<BlockFetch>>> fetches_;

  std::map<Cid, SimTime> provided_;
  std::set<Cid> no_reprovide_;
  std::vector<dht::PeerInfo> bootstrap_peers_;
  std::uint64_t ipns_sequence_ = 0;
  std::optional<ipns::IpnsRecord> own_record_;
  SimTime own_record_published_{};
  std::map<Cid, ipns::IpnsRecord> ipns_seen_;
  struct EvictedPeer {
    dht::PeerInfo info;
    int failures = 0;
  };
  std::map<dht::PeerId, EvictedPeer> evicted_;
  SimTime last_gc_{};
  std::vector<Cid> eviction_log_;
  TxtLookup txt_;
  bool started_ = false;
};

}  // namespace pstore
