// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>

#include "pstore/dht.hpp"
#include "pstore/simnet.hpp"

using namespace pstore;
using namespace std::chrono_literals;

namespace {

dht::Key256 random_key(std::mt19937_64& rng) {
  dht::Key256::Storage s;
  for (auto& b : s) b = static_cast<std::uint8_t>(rng());
  return dht::Key256(s);
}

void BM_RoutingTableClosest(benchmark::State& state) {
  std::mt19937_64 rng(1);
  dht::RoutingTable table(random_key(rng), 20);
  for (std::int64_t i = 0; i < state.range(0); ++i)
    table.update({random_key(rng), {dht::Multiaddress::sim(static_cast<std::uint32_t>(i))}, {}});
  for (auto _ : state) benchmark::DoNotOptimize(table.closest(random_key(rng), 20));
}
BENCHMARK(BM_RoutingTableClosest)->Arg(100)->Arg(1000);

// Simulated-network lookups; reports mean hops alongside wall time.
void BM_SimLookup(benchmark::State& state) {
  std::mt19937_64 rng(2);
  sim::Simulator sim(sim::SimConfig{2});
  NodeConfig config;
  config.k = 8;
  const auto n = static_cast<std::size_t>(state.range(0));
  for (std::size_t i = 0; i < n; ++i) {
    sim.spawn_node(config);
    sim.run_for(1s);
  }
  sim.run_for(2min);
  sim.reset_lookup_stats();
  for (auto _ : state) {
    auto from = static_cast<sim::NodeIndex>(rng() % n);
    benchmark::DoNotOptimize(sim.find_node(from, random_key(rng)));
  }
  state.counters["mean_hops"] = sim.lookup_stats().mean;
}
BENCHMARK(BM_SimLookup)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SimTransfer(benchmark::State& state) {
  sim::Simulator sim(sim::SimConfig{3});
  for (int i = 0; i < 16; ++i) {
    sim.spawn_node();
    sim.run_for(1s);
  }
  sim.run_for(1min);
  Bytes data(static_cast<std::size_t>(state.range(0)));
  std::mt19937_64 rng(3);
  for (auto& b : data) b = static_cast<std::uint8_t>(rng());
  std::uint32_t salt = 0;
  for (auto _ : state) {
    data[0] = static_cast<std::uint8_t>(++salt);
    data[1] = static_cast<std::uint8_t>(salt >> 8);
    auto cid = sim.add(0, data).value();
    benchmark::DoNotOptimize(sim.get(static_cast<sim::NodeIndex>(1 + salt % 15), "/ipfs/" + cid.to_string()));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_SimTransfer)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

}  // namespace
