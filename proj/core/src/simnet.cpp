// SPDX-License-Identifier: Apache-2.0

#include "pstore/simnet.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <sstream>

namespace pstore::sim {

namespace {

double unit_interval(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

void SimConfig::validate() const {
  if (latency_min < SimDuration::zero() || latency_min > latency_max)
    throw Error(ErrorCode::invalid_argument, "latency_min must be in [0, latency_max]");
  if (!(drop_rate >= 0.0 && drop_rate < 1.0)) throw Error(ErrorCode::invalid_argument, "drop_rate must be in [0, 1)");
}

class Simulator::NodeEnv final : public Environment {
 public:
  NodeEnv(Simulator& sim, NodeIndex index) : sim_(sim), index_(index) {}

  SimTime now() const override { return sim_.now_; }
  std::uint32_t self_index() const override { return index_; }
  void send(std::uint32_t to, Bytes payload) override { sim_.send(index_, to, std::move(payload)); }
  TimerId schedule(SimDuration delay, std::function<void()> fn) override {
    return sim_.schedule_timer(index_, delay, std::move(fn));
  }
  void cancel(TimerId timer) override { sim_.cancel_timer(timer); }
  void count(std::string_view counter, std::uint64_t n) override { sim_.count(counter, n); }
  void record_lookup(std::size_t hops) override { sim_.hops_.push_back(hops); }

 private:
  Simulator& sim_;
  NodeIndex index_;
};

Simulator::Simulator(SimConfig config) : config_(config), rng_(config.seed) { config_.validate(); }

Simulator::~Simulator() {
  // Drop queued closures before the nodes they point at.
  while (!queue_.empty()) queue_.pop();
}

void Simulator::push(SimTime at, std::function<void()> fn) { queue_.push(Event{at, next_seq_++, std::move(fn)}); }

void Simulator::trace(const std::string& line) {
  for (unsigned char c : line) {
    trace_digest_ ^= c;
    trace_digest_ *= 0x100000001b3ULL;
  }
  trace_digest_ ^= '\n';
  trace_digest_ *= 0x100000001b3ULL;
  if (trace_enabled_) trace_.push_back(line);
}

void Simulator::count(std::string_view name, std::uint64_t n) {
  auto it = counters_.find(name);
  if (it == counters_.end())
    counters_.emplace(std::string(name), n);
  else
    it->second += n;
}

Bytes Simulator::next_seed() {
  Bytes seed(crypto::KeyPair::kSeedSize);
  for (std::size_t i = 0; i < seed.size(); i += 8) {
    auto v = rng_();
    for (std::size_t j = 0; j < 8; ++j) seed[i + j] = static_cast<std::uint8_t>(v >> (8 * j));
  }
  return seed;
}

NodeIndex Simulator::spawn_node(NodeConfig config, std::optional<Bytes> identity_seed) {
  config.validate();
  auto index = static_cast<NodeIndex>(slots_.size());
  slots_.emplace_back();
  slots_.back().config = config;
  start_node(index, identity_seed ? *identity_seed : next_seed());
  return index;
}

void Simulator::start_node(NodeIndex index, Bytes seed) {
  auto& slot = slots_[index];
  slot.node.reset();
  slot.env = std::make_unique<NodeEnv>(*this, index);
  slot.node = std::make_unique<Node>(*slot.env, crypto::KeyPair::from_seed(seed), slot.config);
  slot.online = true;
  ++slot.generation;

  std::vector<dht::PeerInfo> bootstrap;
  for (NodeIndex i = 0; i < slots_.size() && bootstrap.size() < config_.bootstrap_count; ++i) {
    if (i == index || !slots_[i].online) continue;
    bootstrap.push_back(slots_[i].node->self_info());
  }
  trace("t=" + std::to_string(to_micros(now_)) + " join " + std::to_string(index) + " " +
        slot.node->id().to_hex().substr(0, 16));
  slot.node->start();
  slot.node->bootstrap(std::move(bootstrap));
}

Node& Simulator::node(NodeIndex index) {
  if (index >= slots_.size()) throw Error(ErrorCode::unknown_node, std::to_string(index));
  return *slots_[index].node;
}

bool Simulator::online(NodeIndex index) const { return index < slots_.size() && slots_[index].online; }

std::vector<NodeIndex> Simulator::online_nodes() const {
  std::vector<NodeIndex> out;
  for (NodeIndex i = 0; i < slots_.size(); ++i)
    if (slots_[i].online) out.push_back(i);
  return out;
}

void Simulator::leave(NodeIndex index) {
  if (!online(index)) return;
  slots_[index].online = false;
  ++slots_[index].generation;
  trace("t=" + std::to_string(to_micros(now_)) + " leave " + std::to_string(index));
  count("node_departures", 1);
}

void Simulator::rejoin(NodeIndex index) {
  if (index >= slots_.size()) throw Error(ErrorCode::unknown_node, std::to_string(index));
  if (slots_[index].online) return;
  count("node_rejoins", 1);
  start_node(index, next_seed());
}

Environment::TimerId Simulator::schedule_timer(NodeIndex index, SimDuration delay, std::function<void()> fn) {
  auto id = next_timer_++;
  live_timers_.insert(id);
  auto generation = slots_[index].generation;
  push(now_ + std::max(delay, SimDuration::zero()), [this, id, index, generation, fn = std::move(fn)] {
    if (!live_timers_.erase(id)) return;
    const auto& slot = slots_[index];
    if (!slot.online || slot.generation != generation) return;
    fn();
  });
  return id;
}

void Simulator::send(NodeIndex from, NodeIndex to, Bytes payload) {
  auto type = wire::peek_type(payload);
  std::string type_name = type ? std::string(wire::type_name(*type)) : "UNKNOWN";
  ++sent_by_type_[type_name];
  count("messages_sent", 1);
  count("bytes_sent", payload.size());
  const auto prefix = "t=" + std::to_string(to_micros(now_)) + " ";
  const auto route = std::to_string(from) + "->" + std::to_string(to) + " " + type_name;

  if (to >= slots_.size() || !online(from)) {
    count("messages_dropped_offline", 1);
    trace(prefix + "drop " + route + " offline");
    return;
  }
  const auto span = static_cast<std::uint64_t>((config_.latency_max - config_.latency_min).count());
  const auto latency = config_.latency_min + SimDuration(static_cast<std::int64_t>(rng_() % (span + 1)));
  const bool lost = config_.drop_rate > 0 && unit_interval(rng_) < config_.drop_rate;
  if (lost) {
    count("messages_dropped_random", 1);
    trace(prefix + "drop " + route + " random");
    return;
  }
  if (injector_ && !injector_(from, to, payload)) {
    count("messages_dropped_injected", 1);
    trace(prefix + "drop " + route + " injected");
    return;
  }
  trace(prefix + "send " + route + " " + std::to_string(payload.size()) + " +" + std::to_string(latency.count()));
  push(now_ + latency, [this, from, to, payload = std::move(payload)] { deliver(from, to, payload); });
}

void Simulator::deliver(NodeIndex from, NodeIndex to, const Bytes& payload) {
  const auto prefix = "t=" + std::to_string(to_micros(now_)) + " ";
  const auto route = std::to_string(from) + "->" + std::to_string(to);
  if (!online(to)) {
    count("messages_dropped_offline", 1);
    trace(prefix + "drop " + route + " offline");
    return;
  }
  if (separated(from, to)) {
    count("messages_dropped_partition", 1);
    trace(prefix + "drop " + route + " partition");
    return;
  }
  count("messages_delivered", 1);
  count("bytes_delivered", payload.size());
  trace(prefix + "deliver " + route + " " + std::to_string(payload.size()));
  slots_[to].node->on_message(from, payload);
}

std::size_t Simulator::step() {
  if (queue_.empty()) return 0;
  // top() is const; moving out is safe because pop() follows immediately.
  auto event = std::move(const_cast<Event&>(queue_.top()));
  queue_.pop();
  now_ = std::max(now_, event.at);
  event.fn();
  return 1;
}

std::size_t Simulator::run_until(SimTime t) {
  std::size_t n = 0;
  while (!queue_.empty() && queue_.top().at <= t) n += step();
  now_ = std::max(now_, t);
  return n;
}

void Simulator::partition(std::vector<std::vector<NodeIndex>> groups) {
  std::map<NodeIndex, std::size_t> group_of;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (auto n : groups[g]) {
      if (n >= slots_.size()) throw Error(ErrorCode::unknown_node, std::to_string(n));
      if (!group_of.emplace(n, g).second) throw Error(ErrorCode::overlapping_groups, std::to_string(n));
    }
  }
  for (NodeIndex n = 0; n < slots_.size(); ++n) group_of.try_emplace(n, groups.size());
  group_of_ = std::move(group_of);
  implicit_group_ = groups.size();
  trace("t=" + std::to_string(to_micros(now_)) + " partition " + std::to_string(groups.size()));
}

void Simulator::heal() {
  group_of_.clear();
  trace("t=" + std::to_string(to_micros(now_)) + " heal");
}

bool Simulator::separated(NodeIndex a, NodeIndex b) const {
  if (group_of_.empty()) return false;
  auto ga = group_of_.find(a);
  auto gb = group_of_.find(b);
  // Slots spawned after the split join the implicit group.
  auto group = [&](auto it) { return it == group_of_.end() ? implicit_group_ : it->second; };
  return group(ga) != group(gb);
}

std::vector<NodeIndex> Simulator::churn_step(double leave_rate, const std::set<NodeIndex>& exempt, bool rejoin_fresh) {
  std::vector<NodeIndex> left;
  for (auto n : online_nodes()) {
    if (exempt.contains(n)) continue;
    if (unit_interval(rng_) < leave_rate) left.push_back(n);
  }
  for (auto n : left) leave(n);
  if (rejoin_fresh)
    for (auto n : left) rejoin(n);
  return left;
}

void Simulator::churn(double leave_rate, SimDuration epoch, std::size_t epochs, std::set<NodeIndex> exempt,
                      bool rejoin_fresh) {
  for (std::size_t e = 1; e <= epochs; ++e) {
    push(now_ + epoch * static_cast<std::int64_t>(e),
         [this, leave_rate, exempt, rejoin_fresh] { churn_step(leave_rate, exempt, rejoin_fresh); });
  }
}

std::uint64_t Simulator::counter(const std::string& name) const {
  auto it = counters_.find(name);
  return it == counters_.end() ? 0 : it->second;
}

std::uint64_t Simulator::messages_of(std::string_view type_name) const {
  auto it = sent_by_type_.find(type_name);
  return it == sent_by_type_.end() ? 0 : it->second;
}

std::uint64_t Simulator::exchange_messages() const {
  std::uint64_t total = 0;
  for (auto t : {wire::Type::want, wire::Type::have, wire::Type::block, wire::Type::cancel, wire::Type::dont_have})
    total += messages_of(wire::type_name(t));
  return total;
}

LookupStats Simulator::lookup_stats() const {
  LookupStats s;
  s.count = hops_.size();
  if (hops_.empty()) return s;
  auto sorted = hops_;
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t sum = 0;
  for (auto h : sorted) sum += h;
  s.mean = static_cast<double>(sum) / static_cast<double>(sorted.size());
  auto rank = [&](double q) { return sorted[static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1))]; };
  s.p50 = rank(0.50);
  s.p95 = rank(0.95);
  s.max = sorted.back();
  return s;
}

std::map<std::string, std::size_t> Simulator::replica_counts() const {
  std::map<std::string, std::size_t> out;
  for (const auto& slot : slots_) {
    if (!slot.online) continue;
    for (const auto& cid : slot.node->blockstore().cids()) ++out[cid.to_string()];
  }
  return out;
}

std::string Simulator::metrics_report() const {
  nlohmann::json report;
  report["seed"] = config_.seed;
  report["time_us"] = to_micros(now_);
  report["nodes"] = slots_.size();
  report["online"] = online_nodes().size();
  nlohmann::json by_type = nlohmann::json::object();
  for (const auto& [type, n] : sent_by_type_) by_type[type] = n;
  report["messages_by_type"] = by_type;
  nlohmann::json counters = nlohmann::json::object();
  for (const auto& [name, n] : counters_) counters[name] = n;
  for (auto name : {"messages_sent", "messages_delivered", "bytes_sent", "bytes_delivered", "duplicate_blocks",
                    "corrupt_blocks_detected", "cross_partition_deliveries"})
    if (!counters.contains(name)) counters[name] = 0;
  report["counters"] = counters;
  auto hops = lookup_stats();
  report["lookup_hops"] = {{"count", hops.count}, {"mean", hops.mean}, {"p50", hops.p50}, {"p95", hops.p95},
                           {"max", hops.max}};
  nlohmann::json replicas = nlohmann::json::object();
  for (const auto& [cid, n] : replica_counts()) replicas[cid] = n;
  report["replicas"] = replicas;
  std::ostringstream digest;
  digest << std::hex << trace_digest_;
  report["trace_digest"] = digest.str();
  return report.dump(2);
}

Result<Cid> Simulator::add(NodeIndex at, Bytes data, bool pin) {
  auto& n = node(at);
  return await<Cid>([&](Callback<Cid> cb) { n.add(std::move(data), pin, std::move(cb)); });
}

Result<Cid> Simulator::add_directory(NodeIndex at, std::vector<std::pair<std::string, Bytes>> entries, bool pin) {
  auto& n = node(at);
  return await<Cid>([&](Callback<Cid> cb) { n.add_directory(std::move(entries), pin, std::move(cb)); });
}

Result<Content> Simulator::get(NodeIndex at, const std::string& path) {
  auto& n = node(at);
  return await<Content>([&](Callback<Content> cb) { n.get(path, std::move(cb)); });
}

Result<Unit> Simulator::pin(NodeIndex at, const Cid& cid, bool recursive) {
  auto& n = node(at);
  return await<Unit>([&](Callback<Unit> cb) { n.pin(cid, recursive, std::move(cb)); });
}

Result<ProvideResult> Simulator::provide(NodeIndex at, const Cid& cid) {
  auto& n = node(at);
  return await<ProvideResult>([&](Callback<ProvideResult> cb) { n.provide(cid, std::move(cb)); });
}

Result<std::vector<dht::ProviderRecord>> Simulator::find_providers(NodeIndex at, const Cid& cid, std::size_t limit) {
  auto& n = node(at);
  return await<std::vector<dht::ProviderRecord>>(
      [&](Callback<std::vector<dht::ProviderRecord>> cb) { n.find_providers(cid, limit, std::move(cb)); });
}

Result<LookupResult> Simulator::find_node(NodeIndex at, const dht::Key256& target) {
  auto& n = node(at);
  return await<LookupResult>([&](Callback<LookupResult> cb) { n.find_node(target, std::move(cb)); });
}

Result<Cid> Simulator::ipns_publish(NodeIndex at, const std::string& path) {
  auto& n = node(at);
  return await<Cid>([&](Callback<Cid> cb) { n.ipns_publish(path, std::move(cb)); });
}

Result<dag::IpfsPath> Simulator::ipns_resolve(NodeIndex at, const Cid& name) {
  auto& n = node(at);
  return await<dag::IpfsPath>([&](Callback<dag::IpfsPath> cb) { n.ipns_resolve(name, std::move(cb)); });
}

}  // namespace pstore::sim
