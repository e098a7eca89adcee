// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <map>
#include <sstream>

#include "oracles.hpp"
#include "pstore/simnet.hpp"

using namespace pstore;
using namespace std::chrono_literals;
using sim::NodeIndex;
using sim::Simulator;

namespace {

struct TraceLine {
  std::int64_t t = 0;
  std::string verb;
  NodeIndex from = 0, to = 0;
};

std::optional<TraceLine> parse(const std::string& line) {
  std::istringstream in(line);
  std::string t, verb, route;
  in >> t >> verb >> route;
  auto arrow = route.find("->");
  if (arrow == std::string::npos) return std::nullopt;
  return TraceLine{std::stoll(t.substr(2)), verb, static_cast<NodeIndex>(std::stoul(route.substr(0, arrow))),
                   static_cast<NodeIndex>(std::stoul(route.substr(arrow + 2)))};
}

void grow(Simulator& sim, std::size_t n) {
  NodeConfig c;
  c.k = 8;
  for (std::size_t i = 0; i < n; ++i) {
    sim.spawn_node(c);
    sim.run_for(1s);
  }
  sim.run_for(1min);
}

}  // namespace

TEST_SUITE("simnet") {
  TEST_CASE("config validation") {
    sim::SimConfig bad;
    bad.latency_min = 200ms;
    CHECK_THROWS_AS(Simulator{bad}, Error);
    sim::SimConfig drop;
    drop.drop_rate = 1.0;
    CHECK_THROWS_AS(Simulator{drop}, Error);
  }

  TEST_CASE("events run in time order, ties by insertion") {
    Simulator sim;
    grow(sim, 1);
    std::vector<int> order;
    auto& env = sim.node(0).environment();
    env.schedule(5ms, [&] { order.push_back(2); });
    env.schedule(1ms, [&] { order.push_back(1); });
    env.schedule(5ms, [&] { order.push_back(3); });
    auto cancelled = env.schedule(3ms, [&] { order.push_back(99); });
    env.cancel(cancelled);
    sim.run_for(10ms);
    CHECK(order == std::vector<int>{1, 2, 3});
  }

  TEST_CASE("run_until is prefix-composable") {
    auto run = [](bool split) {
      Simulator sim(sim::SimConfig{60});
      sim.set_trace_enabled(true);
      grow(sim, 6);
      if (split) {
        sim.run_until(sim.now() + 7min);
        sim.run_until(sim.now() + 13min);
      } else {
        sim.run_until(sim.now() + 20min);
      }
      return std::make_pair(sim.trace_digest(), sim.now());
    };
    CHECK(run(true) == run(false));
  }

  TEST_CASE("causality and determinism of traces") {
    auto run = [] {
      std::mt19937_64 rng(61);
      Simulator sim(sim::SimConfig{61, 10ms, 100ms, 0.05});
      sim.set_trace_enabled(true);
      grow(sim, 10);
      auto cid = sim.add(0, oracle::random_bytes(rng, 400000)).value();
      (void)sim.get(6, "/ipfs/" + cid.to_string());
      return std::make_pair(sim.trace(), sim.metrics_report());
    };
    auto a = run();
    CHECK(a == run());
    std::int64_t last = 0;
    std::map<std::pair<NodeIndex, NodeIndex>, long> in_flight;
    for (const auto& line : a.first) {
      auto p = parse(line);
      if (!p) continue;
      REQUIRE(p->t >= last);
      last = p->t;
      if (p->verb == "send") ++in_flight[{p->from, p->to}];
      if (p->verb == "deliver") REQUIRE(--in_flight[{p->from, p->to}] >= 0);
    }
  }

  TEST_CASE("partition soundness") {
    Simulator sim(sim::SimConfig{62});
    sim.set_trace_enabled(true);
    grow(sim, 12);
    CHECK_THROWS_AS(sim.partition({{0, 1, 2}, {2, 3}}), Error);
    CHECK_THROWS_AS(sim.partition({{0, 99}}), Error);
    sim.partition({{0, 1, 2, 3, 4, 5}, {6, 7, 8, 9}});  // 10 and 11 form an implicit group
    CHECK(sim.separated(0, 6));
    CHECK(sim.separated(6, 10));
    CHECK(sim.separated(0, 11));
    CHECK_FALSE(sim.separated(10, 11));
    const auto from = sim.trace().size();
    for (NodeIndex n : {0u, 7u, 10u}) (void)sim.find_node(n, sim.node(11 - n % 11).id());
    sim.run_for(3h);
    std::size_t crossing = 0;
    for (std::size_t i = from; i < sim.trace().size(); ++i) {
      auto p = parse(sim.trace()[i]);
      if (p && p->verb == "deliver" && sim.separated(p->from, p->to)) ++crossing;
    }
    CHECK(crossing == 0);
    CHECK(sim.counter("messages_dropped_partition") > 0);
    sim.heal();
    CHECK_FALSE(sim.partitioned());
  }

  TEST_CASE("churn soundness: departed nodes neither send nor receive") {
    Simulator sim(sim::SimConfig{63});
    sim.set_trace_enabled(true);
    grow(sim, 12);
    sim.leave(4);
    CHECK_FALSE(sim.online(4));
    const auto from = sim.trace().size();
    sim.run_for(2h);
    for (std::size_t i = from; i < sim.trace().size(); ++i) {
      auto p = parse(sim.trace()[i]);
      if (!p) continue;
      if (p->verb == "send") CHECK(p->from != 4);
      if (p->verb == "deliver") CHECK(p->to != 4);
    }
    const auto old_id = sim.node(4).id();
    sim.rejoin(4);
    CHECK(sim.online(4));
    CHECK(sim.node(4).id() != old_id);
    CHECK(sim.counter("node_departures") == 1);
    CHECK(sim.counter("node_rejoins") == 1);
  }

  TEST_CASE("churn steps respect exemptions and rate") {
    Simulator sim(sim::SimConfig{64});
    grow(sim, 20);
    CHECK(sim.churn_step(0.0, {}, false).empty());
    auto left = sim.churn_step(0.25, {0, 1}, false);
    for (auto n : left) {
      CHECK(n > 1);
      CHECK_FALSE(sim.online(n));
    }
    CHECK(sim.online_nodes().size() == 20 - left.size());
    auto rest = sim.churn_step(1.0, {0, 1}, false);
    CHECK(sim.online_nodes() == std::vector<NodeIndex>{0, 1});
    CHECK(left.size() + rest.size() == 18);
  }

  TEST_CASE("metrics report carries the expected fields") {
    Simulator sim(sim::SimConfig{65});
    grow(sim, 5);
    auto report = sim.metrics_report();
    for (const char* key : {"\"seed\"", "\"messages_by_type\"", "\"counters\"", "\"lookup_hops\"", "\"trace_digest\"",
                            "\"cross_partition_deliveries\""})
      CHECK(report.find(key) != std::string::npos);
    CHECK(sim.messages_of("FIND_NODE") > 0);
  }
}
