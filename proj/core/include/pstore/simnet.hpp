// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pstore/node.hpp"

namespace pstore::sim {

using NodeIndex = std::uint32_t;

struct SimConfig {
  std::uint64_t seed = 1;
  SimDuration latency_min = 10ms;
  SimDuration latency_max = 100ms;
  double drop_rate = 0.0;
  std::size_t bootstrap_count = 4;

  // Throws invalid-argument.
  void validate() const;
};

// Inspects one message in transit. May rewrite the payload; returning
// false drops it.
using FaultInjector = std::function<bool(NodeIndex from, NodeIndex to, Bytes& payload)>;

struct LookupStats {
  std::size_t count = 0;
  double mean = 0;
  std::size_t p50 = 0;
  std::size_t p95 = 0;
  std::size_t max = 0;
};

/// Deterministic discrete-event network. Exactly one driver (the caller)
/// advances the queue; every node handler runs inside step().
class Simulator {
 public:
  explicit Simulator(SimConfig config = {});
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  const SimConfig& config() const { return config_; }
  SimTime now() const { return now_; }

  // Creates a node with a key derived from the seeded generator (or from
  // `identity_seed`), bootstraps it to the first bootstrap_count online
  // nodes and starts its maintenance loop.
  NodeIndex spawn_node(NodeConfig config = {}, std::optional<Bytes> identity_seed = std::nullopt);
  Node& node(NodeIndex index);
  bool online(NodeIndex index) const;
  std::size_t size() const { return slots_.size(); }
  std::vector<NodeIndex> online_nodes() const;

  // Abrupt departure: no handoff, pending timers are discarded.
  void leave(NodeIndex index);
  // Brings a departed slot back as a fresh peer: new key, empty stores.
  void rejoin(NodeIndex index);

  void send(NodeIndex from, NodeIndex to, Bytes payload);

  // Processes one event; returns 0 if the queue is empty.
  std::size_t step();
  std::size_t run_until(SimTime t);
  std::size_t run_for(SimDuration d) { return run_until(now_ + d); }
  bool idle() const { return queue_.empty(); }

  // Throws overlapping-groups or unknown-node. Nodes left out of every
  // group form one more implicit group.
  void partition(std::vector<std::vector<NodeIndex>> groups);
  void heal();
  bool partitioned() const { return !group_of_.empty(); }
  bool separated(NodeIndex a, NodeIndex b) const;

  // One churn epoch: every online node outside `exempt` leaves with
  // probability leave_rate; departed nodes rejoin fresh if `rejoin`.
  // Returns the nodes that left.
  std::vector<NodeIndex> churn_step(double leave_rate, const std::set<NodeIndex>& exempt, bool rejoin);
  // Schedules `epochs` churn steps, one every `epoch`.
  void churn(double leave_rate, SimDuration epoch, std::size_t epochs, std::set<NodeIndex> exempt, bool rejoin);

  void set_fault_injector(FaultInjector injector) { injector_ = std::move(injector); }

  // --- observation -----------------------------------------------------
  void set_trace_enabled(bool enabled) { trace_enabled_ = enabled; }
  const std::vector<std::string>& trace() const { return trace_; }
  // FNV-1a over every trace line, maintained even when lines are not kept.
  std::uint64_t trace_digest() const { return trace_digest_; }
  std::uint64_t counter(const std::string& name) const;
  std::uint64_t messages_of(std::string_view type_name) const;
  std::uint64_t exchange_messages() const;
  LookupStats lookup_stats() const;
  std::map<std::string, std::size_t> replica_counts() const;
  // Deterministic JSON report.
  std::string metrics_report() const;
  void reset_lookup_stats() { hops_.clear(); }

  // --- driving asynchronous operations to completion -------------------
  template <typename T>
  Result<T> await(const std::function<void(Callback<T>)>& start, SimDuration limit = 1h) {
    auto slot = std::make_shared<std::optional<Result<T>>>();
    start([slot](Result<T> r) {
      if (!*slot) *slot = std::move(r);
    });
    const auto deadline = now_ + limit;
    while (!*slot && !queue_.empty() && queue_.top().at <= deadline) step();
    if (!*slot) return Error(ErrorCode::timeout, "simulation deadline passed");
    return std::move(**slot);
  }

  Result<Cid> add(NodeIndex at, Bytes data, bool pin = false);
  Result<Cid> add_directory(NodeIndex at, std::vector<std::pair<std::string, Bytes>> entries, bool pin = false);
  Result<Content> get(NodeIndex at, const std::string& path);
  Result<Unit> pin(NodeIndex at, const Cid& cid, bool recursive = true);
  Result<ProvideResult> provide(NodeIndex at, const Cid& cid);
  Result<std::vector<dht::ProviderRecord>> find_providers(NodeIndex at, const Cid& cid, std::size_t limit = 20);
  Result<LookupResult> find_node(NodeIndex at, const dht::Key256& target);
  Result<Cid> ipns_publish(NodeIndex at, const std::string& path);
  Result<dag::IpfsPath> ipns_resolve(NodeIndex at, const Cid& name);

 private:
  class NodeEnv;
  struct Slot {
    std::unique_ptr<NodeEnv> env;
    std::unique_ptr<Node> node;
    NodeConfig config;
    bool online = false;
    std::uint64_t generation = 0;
  };
  struct Event {
    SimTime at;
    std::uint64_t seq;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };

  void push(SimTime at, std::function<void()> fn);
  void trace(const std::string& line);
  void start_node(NodeIndex index, Bytes seed);
  Bytes next_seed();
  Environment::TimerId schedule_timer(NodeIndex index, SimDuration delay, std::function<void()> fn);
  void cancel_timer(Environment::TimerId timer) { live_timers_.erase(timer); }
  void deliver(NodeIndex from, NodeIndex to, const Bytes& payload);
  void count(std::string_view name, std::uint64_t n);

  SimConfig config_;
  std::mt19937_64 rng_;
  SimTime now_{};
  std::uint64_t next_seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::vector<Slot> slots_;
  std::set<Environment::TimerId> live_timers_;
  Environment::TimerId next_timer_ = 1;
  std::map<NodeIndex, std::size_t> group_of_;
  std::size_t implicit_group_ = 0;
  FaultInjector injector_;

  std::map<std::string, std::uint64_t, std::less<>> counters_;
  std::map<std::string, std::uint64_t, std::less<>> sent_by_type_;
  std::vector<std::size_t> hops_;
  bool trace_enabled_ = false;
  std::vector<std::string> trace_;
  std::uint64_t trace_digest_ = 0xcbf29ce484222325ULL;
};

}  // namespace pstore::sim
