// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Pass a criterion number to run just that one.

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "pstore/gateway.hpp"
#include "pstore/scenario.hpp"
#include "pstore/simnet.hpp"

using namespace pstore;
using sim::NodeIndex;
using sim::Simulator;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

constexpr std::uint64_t kMiB = 1 << 20;

std::unique_ptr<Simulator> make_network(std::uint64_t seed, std::size_t nodes, const NodeConfig& config) {
  auto sim = std::make_unique<Simulator>(sim::SimConfig{seed});
  for (std::size_t i = 0; i < nodes; ++i) {
    sim->spawn_node(config);
    sim->run_for(1s);
  }
  sim->run_for(2min);
  return sim;
}

NodeConfig small_k() {
  NodeConfig c;
  c.k = 8;
  return c;
}

Bytes random_file(std::mt19937_64& rng, std::size_t size) { return oracle::random_bytes(rng, size); }

NodeIndex pick(std::mt19937_64& rng, const std::vector<NodeIndex>& pool) { return pool[rng() % pool.size()]; }

std::vector<NodeIndex> pick_distinct(std::mt19937_64& rng, std::vector<NodeIndex> pool, std::size_t n) {
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min(n, pool.size()));
  return pool;
}

void clear_blocks(Simulator& sim) {
  for (NodeIndex i = 0; i < sim.size(); ++i) {
    auto& store = sim.node(i).blockstore();
    for (const auto& cid : store.cids()) store.erase(cid);
  }
}

// 1. CID format -------------------------------------------------------------
Outcome cid_format() {
  std::mt19937_64 rng(101);
  std::size_t ok = 0;
  for (int i = 0; i < 1000; ++i) {
    auto data = oracle::random_bytes(rng, rng() % 2048);
    auto cid = Cid::from_bytes(data);
    auto text = cid.to_string();
    auto digest = oracle::sha256(data);
    oracle::Bytes mh{0x12, 0x20};
    mh.insert(mh.end(), digest.begin(), digest.end());
    bool good = Cid::parse(text) == cid && text.starts_with("Qm") && cid.bytes() == mh && text == oracle::base58(mh);
    ok += good ? 1 : 0;
  }
  return {ok == 1000, std::to_string(ok) + "/1000 cids round-trip, start with Qm and match the reference multihash"};
}

// 2. Round-trip fidelity and corruption detection ---------------------------
Outcome round_trip() {
  std::mt19937_64 rng(202);
  auto sim = make_network(2, 16, small_k());
  auto nodes = sim->online_nodes();

  std::vector<std::size_t> sizes{0, 4 * kMiB};
  while (sizes.size() < 100) sizes.push_back(rng() % (4 * kMiB + 1));

  std::size_t identical = 0, recovered = 0, injected = 0;
  const auto detected_before = sim->counter("corrupt_blocks_detected");
  for (auto size : sizes) {
    auto data = random_file(rng, size);
    auto trio = pick_distinct(rng, nodes, 3);
    const NodeIndex a = trio[0], b = trio[1], c = trio[2];
    auto root = sim->add(a, data);
    if (!root.ok()) return {false, std::string("add failed: ") + root.error().what()};
    auto got = sim->get(b, "/ipfs/" + root.value().to_string());
    if (got.ok() && got.value().data == data) ++identical;
    sim->run_for(1min);  // let b announce its cached copy

    // Corrupt the first block delivered to c; a and b both hold honest copies.
    bool fired = false;
    sim->set_fault_injector([&](NodeIndex, NodeIndex to, Bytes& payload) {
      if (fired || to != c || wire::peek_type(payload) != wire::Type::block) return true;
      auto m = wire::decode(payload);
      auto& block = std::get<wire::BlockData>(m.payload);
      block.data[block.data.size() / 2] ^= 0x5a;
      payload = wire::encode(m);
      fired = true;
      ++injected;
      return true;
    });
    auto again = sim->get(c, "/ipfs/" + root.value().to_string());
    sim->set_fault_injector(nullptr);
    if (again.ok() && again.value().data == data) ++recovered;
    if (again.ok() && again.value().data != data) return {false, "silent corruption"};
    clear_blocks(*sim);
  }
  sim->run_for(1s);
  const auto detected = sim->counter("corrupt_blocks_detected") - detected_before;

  // A sole provider whose every block is corrupted in transit.
  auto data = random_file(rng, 700000);
  auto root = sim->add(nodes[0], data).value();
  sim->set_fault_injector([&](NodeIndex, NodeIndex to, Bytes& payload) {
    if (to != nodes[1] || wire::peek_type(payload) != wire::Type::block) return true;
    auto m = wire::decode(payload);
    std::get<wire::BlockData>(m.payload).data[0] ^= 0xff;
    payload = wire::encode(m);
    return true;
  });
  auto bad = sim->get(nodes[1], "/ipfs/" + root.to_string());
  sim->set_fault_injector(nullptr);
  bool sole_detected = !bad.ok() && bad.error().code() == ErrorCode::integrity_violation;

  std::ostringstream d;
  d << identical << "/100 byte-identical; " << detected << "/" << injected << " injected corruptions detected; "
    << recovered << "/100 recovered from the honest provider; sole corrupt provider -> "
    << (bad.ok() ? std::string("success?!") : std::string(error_name(bad.error().code())));
  return {identical == 100 && injected == 100 && detected == injected && recovered == 100 && sole_detected, d.str()};
}

// 3. Deduplication ------------------------------------------------------------
Outcome dedup() {
  std::mt19937_64 rng(303);
  const std::size_t chunk = dag::kDefaultChunkSize;
  auto prefix = random_file(rng, 512 * 1024);
  auto f1 = prefix, f2 = prefix;
  auto t1 = random_file(rng, kMiB - prefix.size());
  auto t2 = random_file(rng, kMiB - prefix.size());
  f1.insert(f1.end(), t1.begin(), t1.end());
  f2.insert(f2.end(), t2.begin(), t2.end());

  Simulator sim(sim::SimConfig{3});
  NodeConfig config;
  config.chunk_size = chunk;
  auto n = sim.spawn_node(config);
  auto d1 = sim.node(n).import(f1, false);
  auto d2 = sim.node(n).import(f2, false);

  auto leaf_set = [&](const dag::FileDag& f) {
    std::set<Cid> out;
    for (const auto& b : f.nodes)
      if (b.node().kind == dag::NodeKind::leaf) out.insert(b.cid);
    return out;
  };
  auto l1 = leaf_set(d1), l2 = leaf_set(d2);
  std::size_t shared = 0;
  for (const auto& c : l1) shared += l2.count(c);

  // Oracle: identical slices are the only possible shared leaves.
  auto s1 = oracle::slices(f1, chunk), s2 = oracle::slices(f2, chunk);
  std::size_t oracle_shared = 0;
  for (const auto& a : s1)
    for (const auto& b : s2) oracle_shared += a == b ? 1 : 0;
  const auto blocks1 = s1.size() + 1, blocks2 = s2.size() + 1;  // leaves plus one root (fanout >= leaves)
  const auto expected = blocks1 + blocks2 - oracle_shared;
  const auto stored = sim.node(n).blockstore().count();

  std::ostringstream d;
  d << "shared leaves " << shared << " (oracle " << oracle_shared << "); stored " << stored << " blocks (oracle "
    << blocks1 << "+" << blocks2 << "-" << oracle_shared << "=" << expected << ")";
  return {shared == 2 && oracle_shared == 2 && stored == expected && d1.nodes.size() == blocks1, d.str()};
}

// 4. DHT correctness ------------------------------------------------------------
Outcome dht_correctness() {
  std::mt19937_64 rng(404);
  auto sim = make_network(4, 64, small_k());
  auto nodes = sim->online_nodes();
  sim->reset_lookup_stats();
  std::size_t exact = 0;
  double hop_sum = 0;
  for (int t = 0; t < 50; ++t) {
    dht::Key256::Storage raw;
    for (auto& b : raw) b = static_cast<std::uint8_t>(rng());
    dht::Key256 target(raw);
    auto from = pick(rng, nodes);
    std::vector<dht::Key256::Storage> ids;
    std::vector<NodeIndex> who;
    for (auto n : nodes) {
      if (n == from) continue;
      ids.push_back(sim->node(n).id().bytes());
      who.push_back(n);
    }
    std::set<dht::PeerId> expected;
    for (auto i : oracle::k_closest(ids, raw, 8)) expected.insert(sim->node(who[i]).id());
    auto r = sim->find_node(from, target);
    if (!r.ok()) continue;
    std::set<dht::PeerId> got;
    for (const auto& p : r.value().peers) got.insert(p.peer);
    exact += got == expected ? 1 : 0;
    hop_sum += static_cast<double>(r.value().hops);
  }
  const double mean = hop_sum / 50;
  std::ostringstream d;
  d << exact << "/50 lookups return the brute-force 8-closest set; mean hops " << mean;
  return {exact == 50 && mean <= 8.0, d.str()};
}

// 5. Provider routing ------------------------------------------------------------
Outcome provider_routing() {
  std::mt19937_64 rng(505);
  auto sim = make_network(5, 64, small_k());
  auto nodes = sim->online_nodes();
  const auto provider = pick(rng, nodes);
  auto data = random_file(rng, 4000);
  auto cid = sim->add(provider, data).value();
  const auto key = dht::dht_key_for(cid);
  const auto pid = sim->node(provider).id();

  std::vector<dht::Key256::Storage> ids;
  for (auto n : nodes) ids.push_back(sim->node(n).id().bytes());
  std::set<NodeIndex> expected;
  for (auto i : oracle::k_closest(ids, key.bytes(), 8)) expected.insert(nodes[i]);
  std::set<NodeIndex> holders;
  for (auto n : nodes)
    if (sim->node(n).provider_store().has(key, pid, sim->now())) holders.insert(n);

  std::vector<NodeIndex> others;
  for (auto n : nodes)
    if (n != provider) others.push_back(n);
  auto probes = pick_distinct(rng, others, 10);
  std::size_t found = 0;
  for (auto n : probes) {
    auto r = sim->find_providers(n, cid);
    if (r.ok() && std::any_of(r.value().begin(), r.value().end(), [&](const auto& rec) { return rec.provider == pid; }))
      ++found;
  }

  sim->node(provider).set_reprovide(cid, false);
  sim->run_for(sim->node(provider).config().provider_ttl + 1min);
  std::size_t empty = 0;
  for (auto n : probes) {
    auto r = sim->find_providers(n, cid);
    if (r.ok() && r.value().empty()) ++empty;
  }
  std::ostringstream d;
  d << "records on " << holders.size() << " peers, " << (holders == expected ? "exactly" : "NOT") << " the 8 closest; "
    << found << "/10 lookups find the provider; " << empty << "/10 empty after ttl";
  return {holders == expected && found == 10 && empty == 10, d.str()};
}

// 6. Partition tolerance ------------------------------------------------------------
Outcome partition_tolerance() {
  std::mt19937_64 rng(606);
  auto sim = make_network(6, 64, small_k());
  auto nodes = sim->online_nodes();
  const auto provider = pick(rng, nodes);
  auto data = random_file(rng, 300 * 1000);
  auto cid = sim->add(provider, data).value();
  const auto pid = sim->node(provider).id();
  const auto path = "/ipfs/" + cid.to_string();

  std::set<NodeIndex> a{provider};
  for (const auto& block : sim->node(provider).blockstore().cids()) {
    auto key = dht::dht_key_for(block);
    for (auto n : nodes)
      if (sim->node(n).provider_store().has(key, pid, sim->now())) a.insert(n);
  }
  for (auto n : nodes) {
    if (a.size() >= 32) break;
    a.insert(n);
  }
  if (a.size() != 32) return {false, "record holders do not fit in one half"};
  std::vector<NodeIndex> ga(a.begin(), a.end()), gb;
  for (auto n : nodes)
    if (!a.contains(n)) gb.push_back(n);
  sim->partition({ga, gb});

  std::size_t a_ok = 0, b_failed = 0;
  for (auto n : ga) {
    if (n == provider) continue;
    auto r = sim->get(n, path);
    a_ok += (r.ok() && r.value().data == data) ? 1 : 0;
  }
  for (auto n : gb) {
    auto r = sim->get(n, path);
    if (!r.ok() && (r.error().code() == ErrorCode::not_found || r.error().code() == ErrorCode::timeout) &&
        gateway::status_for(r.error().code()) == 504)
      ++b_failed;
  }
  const auto cross = sim->counter("cross_partition_deliveries");
  sim->heal();
  sim->run_for(2h);
  std::size_t b_ok = 0;
  for (auto n : gb) {
    auto r = sim->get(n, path);
    b_ok += (r.ok() && r.value().data == data) ? 1 : 0;
  }
  std::ostringstream d;
  d << "split: " << a_ok << "/" << ga.size() - 1 << " A gets succeed, " << b_failed << "/" << gb.size()
    << " B gets fail with 504-class errors, " << cross << " cross-partition deliveries; healed: " << b_ok << "/"
    << gb.size() << " B gets succeed";
  return {a_ok == ga.size() - 1 && b_failed == gb.size() && cross == 0 && b_ok == gb.size(), d.str()};
}

// 7. Best-effort storage under churn ------------------------------------------------
Outcome churn() {
  std::mt19937_64 rng(707);
  std::size_t unreachable = 0;
  {
    auto sim = make_network(7, 64, small_k());
    auto nodes = sim->online_nodes();
    const auto provider = pick(rng, nodes);
    auto cid = sim->add(provider, random_file(rng, 600 * 1000)).value();
    sim->leave(provider);
    std::vector<NodeIndex> others;
    for (auto n : sim->online_nodes()) others.push_back(n);
    for (auto n : pick_distinct(rng, others, 10)) {
      auto r = sim->get(n, "/ipfs/" + cid.to_string());
      unreachable += r.ok() ? 0 : 1;
    }
  }

  NodeConfig config = small_k();
  config.reprovide_interval = 30min;
  config.maintenance_interval = 10min;
  auto sim = make_network(77, 64, config);
  auto nodes = sim->online_nodes();
  std::set<NodeIndex> pinners{1, 2, 3, 4, 5};
  const NodeIndex origin = 40;
  auto data = random_file(rng, 1000 * 1000);
  auto cid = sim->add(origin, data).value();
  for (auto p : pinners)
    if (!sim->pin(p, cid).ok()) return {false, "pinning failed"};

  std::size_t reachable = 0, departures = 0;
  for (int epoch = 0; epoch < 20; ++epoch) {
    sim->run_for(1h);
    departures += sim->churn_step(0.2, pinners, true).size();
    sim->run_for(1min);
    std::vector<NodeIndex> pool;
    for (auto n : sim->online_nodes())
      if (!pinners.contains(n)) pool.push_back(n);
    auto r = sim->get(pick(rng, pool), "/ipfs/" + cid.to_string());
    reachable += (r.ok() && r.value().data == data) ? 1 : 0;
  }
  std::ostringstream d;
  d << "sole unpinned provider gone: " << 10 - unreachable << "/10 retrievals succeed; pinned on 5 under churn ("
    << departures << " departures): " << reachable << "/20 epoch probes succeed";
  return {unreachable == 10 && reachable == 20, d.str()};
}

// 8. GC and pinning ------------------------------------------------------------------
Outcome gc_pinning() {
  std::mt19937_64 rng(808);
  auto sim = make_network(8, 8, small_k());
  NodeConfig gconfig = small_k();
  gconfig.capacity_bytes = 10 * kMiB;
  const auto g = sim->spawn_node(gconfig);
  sim->run_for(1min);
  auto& node = sim->node(g);

  std::map<Cid, std::size_t> file_of;  // block -> file index
  for (std::size_t i = 0; i < 15; ++i) {
    auto data = random_file(rng, kMiB);
    auto cid = sim->add(static_cast<NodeIndex>(i % 8), data).value();
    for (const auto& b : dag::build_file_dag(dag::chunk(data), dag::kDefaultFanout).nodes) file_of[b.cid] = i;
    auto r = sim->get(g, "/ipfs/" + cid.to_string());
    if (!r.ok() || r.value().data != data) return {false, "fetch " + std::to_string(i) + " failed"};
    sim->run_for(1s);
  }
  node.gc();
  const auto used = node.blockstore().used_bytes();

  // Oracle: files were accessed in order, so evictions must walk the file
  // indices in non-decreasing order and the survivors must be a suffix.
  bool ordered = true;
  std::size_t last = 0, evicted_files = 0;
  for (const auto& c : node.eviction_log()) {
    auto f = file_of.at(c);
    if (f < last) ordered = false;
    last = f;
  }
  std::set<std::size_t> touched;
  for (const auto& c : node.eviction_log()) touched.insert(file_of.at(c));
  for (std::size_t i = 0; i < touched.size(); ++i)
    if (!touched.contains(i)) ordered = false;
  evicted_files = touched.size();

  // Recursively pinned 3 MiB DAG under add/gc pressure.
  auto pinned_data = random_file(rng, 3 * kMiB);
  auto pinned = sim->add(g, pinned_data, true).value();
  auto closure = node.pins().closure(node.blockstore());
  const auto log_before = node.eviction_log().size();
  std::size_t lost = 0;
  for (int cycle = 0; cycle < 10; ++cycle) {
    auto r = sim->add(g, random_file(rng, 2 * kMiB));
    if (!r.ok()) return {false, std::string("pressure add failed: ") + r.error().what()};
    node.gc();
    for (const auto& c : closure) lost += node.blockstore().has(c) ? 0 : 1;
  }
  for (std::size_t i = log_before; i < node.eviction_log().size(); ++i)
    lost += closure.contains(node.eviction_log()[i]) ? 1 : 0;
  auto back = sim->get(g, "/ipfs/" + pinned.to_string());

  std::ostringstream d;
  d << "post-gc usage " << used << " <= " << 10 * kMiB << "; " << log_before << " evictions across " << evicted_files << " oldest files, LRU order " << (ordered ? "verified" : "VIOLATED")
    << "; pinned " << closure.size() << "-block DAG: " << lost << " blocks lost over 10 cycles";
  return {used <= 10 * kMiB && ordered && evicted_files >= 5 && closure.size() >= 13 && lost == 0 && back.ok() &&
              back.value().data == pinned_data,
          d.str()};
}

// 9. IPNS ----------------------------------------------------------------------------
Outcome ipns_records() {
  std::mt19937_64 rng(909);
  auto sim = make_network(9, 64, small_k());
  auto nodes = sim->online_nodes();
  const auto publisher = pick(rng, nodes);
  auto c1 = sim->add(publisher, random_file(rng, 1000)).value();
  auto c2 = sim->add(publisher, random_file(rng, 1000)).value();
  auto n1 = sim->ipns_publish(publisher, "/ipfs/" + c1.to_string()).value();
  auto n2 = sim->ipns_publish(publisher, "/ipfs/" + c2.to_string()).value();
  const auto want = "/ipfs/" + c2.to_string();

  std::vector<NodeIndex> others;
  for (auto n : nodes)
    if (n != publisher) others.push_back(n);
  std::shuffle(others.begin(), others.end(), rng);
  std::size_t v2 = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    auto r = sim->ipns_resolve(others[i], n2);
    v2 += (r.ok() && r.value().to_string() == want) ? 1 : 0;
  }

  // Overwrite record holders: a third get a forged record, a third a stale one.
  const auto key = ipns::dht_key(n2);
  std::vector<NodeIndex> holders;
  for (auto n : nodes)
    if (n != publisher && sim->node(n).ipns_store().get(key, sim->now())) holders.push_back(n);
  auto genuine = *sim->node(holders.front()).ipns_store().get(key, sim->now());
  auto forged = genuine;
  forged.value = "/ipfs/" + c1.to_string();
  forged.sequence = 99;
  forged.signature[0] ^= 0x01;
  auto stale = ipns::make_record(sim->node(publisher).keys(), "/ipfs/" + c1.to_string(), 1, genuine.expires_at);
  const auto third = std::max<std::size_t>(1, holders.size() / 3);
  for (std::size_t i = 0; i < holders.size(); ++i) {
    if (i < third)
      sim->node(holders[i]).ipns_store().put_unchecked(forged);
    else if (i < 2 * third)
      sim->node(holders[i]).ipns_store().put_unchecked(stale);
  }
  std::size_t ignored = 0;
  for (std::size_t i = 10; i < 20; ++i) {
    auto r = sim->ipns_resolve(others[i], n2);
    ignored += (r.ok() && r.value().to_string() == want) ? 1 : 0;
  }
  std::ostringstream d;
  d << "same name for v1/v2: " << (n1 == n2 ? "yes" : "no") << "; " << v2 << "/10 resolve v2; with " << third
    << " forged and " << third << " stale holders of " << holders.size() << ": " << ignored << "/10 still resolve v2";
  return {n1 == n2 && v2 == 10 && ignored == 10, d.str()};
}

// 10. Gateway ------------------------------------------------------------------------
Outcome gateway_conformance() {
  std::mt19937_64 rng(1010);
  auto sim = make_network(10, 16, small_k());
  std::map<std::string, Bytes> files{{"file1", random_file(rng, 100 * 1000)},
                                     {"file2", random_file(rng, 600 * 1000)},
                                     {"file3", random_file(rng, 1500 * 1000)}};
  std::vector<std::pair<std::string, Bytes>> entries(files.begin(), files.end());
  auto dir = sim->add_directory(0, entries).value();
  const NodeIndex g = 9;

  gateway::GatewayConfig config{"127.0.0.1:0", 30s};
  gateway::SimBackend backend(*sim, g);
  gateway::Gateway gw(backend, config);
  gateway::Server server(gw);
  server.start();
  httplib::Client client("127.0.0.1", server.port());
  client.set_read_timeout(120, 0);

  std::size_t exact = 0;
  for (const auto& [name, data] : files) {
    auto res = client.Get("/ipfs/" + dir.to_string() + "/" + name);
    if (res && res->status == 200 && res->get_header_value("Content-Type") == "application/octet-stream" &&
        oracle::sha256(oracle::Bytes(res->body.begin(), res->body.end())) == oracle::sha256(data))
      ++exact;
  }
  auto bad = client.Get("/ipfs/not-base58!");
  auto missing = client.Get("/ipfs/" + dir.to_string() + "/nope");
  const auto unprovided = Cid::from_bytes(random_file(rng, 64));
  const auto before = sim->now();
  auto slow = client.Get("/ipfs/" + unprovided.to_string());
  const auto waited = sim->now() - before;

  const auto exchange_before = sim->exchange_messages();
  auto cached = client.Get("/ipfs/" + dir.to_string() + "/file2");
  const auto exchange_delta = sim->exchange_messages() - exchange_before;
  server.stop();

  auto status = [](const httplib::Result& r) { return r ? r->status : -1; };
  std::ostringstream d;
  d << exact << "/3 files 200 hash-exact; bad cid " << status(bad) << "; missing entry " << status(missing)
    << "; unprovided " << status(slow) << " after " << std::chrono::duration<double>(waited).count()
    << "s simulated (limit 30s); cached re-GET " << status(cached) << " with " << exchange_delta
    << " exchange messages";
  return {exact == 3 && status(bad) == 400 && status(missing) == 404 && status(slow) == 504 && waited <= 30s &&
              status(cached) == 200 && exchange_delta == 0,
          d.str()};
}

// 11. Determinism --------------------------------------------------------------------
Outcome determinism() {
  std::ifstream in(std::string(PSTORE_SCENARIO_DIR) + "/partition.scn");
  std::stringstream script;
  script << in.rdbuf();
  auto r1 = sim::run_scenario(script.str());
  auto r2 = sim::run_scenario(script.str());

  auto traced = [] {
    std::mt19937_64 rng(1111);
    Simulator sim(sim::SimConfig{11});
    sim.set_trace_enabled(true);
    for (int i = 0; i < 12; ++i) sim.spawn_node(small_k());
    sim.run_for(1min);
    auto cid = sim.add(3, oracle::random_bytes(rng, 500000)).value();
    (void)sim.get(7, "/ipfs/" + cid.to_string());
    sim.churn_step(0.3, {3}, true);
    sim.run_for(30min);
    return std::make_pair(sim.trace(), sim.metrics_report());
  };
  auto t1 = traced();
  auto t2 = traced();
  std::ostringstream d;
  d << "scenario reports " << (r1.report == r2.report ? "identical" : "DIFFER") << " (" << r1.report.size()
    << " bytes); traces " << (t1.first == t2.first ? "identical" : "DIFFER") << " (" << t1.first.size()
    << " events); metrics " << (t1.second == t2.second ? "identical" : "DIFFER");
  return {r1.passed && r1.report == r2.report && t1 == t2 && !t1.first.empty(), d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"CID format", cid_format},
      {"round-trip fidelity", round_trip},
      {"deduplication", dedup},
      {"DHT correctness", dht_correctness},
      {"provider routing", provider_routing},
      {"partition tolerance", partition_tolerance},
      {"best-effort storage under churn", churn},
      {"GC/pinning", gc_pinning},
      {"IPNS", ipns_records},
      {"gateway conformance", gateway_conformance},
      {"determinism", determinism},
  };
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(static_cast<std::size_t>(std::atoi(argv[i])));

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.contains(i + 1)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all = all && o.pass;
    std::cout << "criterion " << i + 1 << " [" << criteria[i].first << "]: " << (o.pass ? "PASS" : "FAIL") << " - "
              << o.detail << " (" << static_cast<int>(secs * 10) / 10.0 << "s)" << std::endl;
  }
  return all ? 0 : 1;
}
