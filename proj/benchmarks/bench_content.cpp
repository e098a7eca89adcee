// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "pstore/cid.hpp"
#include "pstore/dag.hpp"
#include "pstore/wire.hpp"

using namespace pstore;

namespace {

Bytes random_bytes(std::size_t n) {
  std::mt19937_64 rng(n);
  Bytes out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

void BM_CidFromBytes(benchmark::State& state) {
  auto data = random_bytes(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Cid::from_bytes(data));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_CidFromBytes)->Arg(1 << 10)->Arg(256 << 10);

void BM_CidTextRoundTrip(benchmark::State& state) {
  auto cid = Cid::from_bytes(random_bytes(64));
  for (auto _ : state) benchmark::DoNotOptimize(Cid::parse(cid.to_string()));
}
BENCHMARK(BM_CidTextRoundTrip);

void BM_BuildFileDag(benchmark::State& state) {
  auto data = random_bytes(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto leaves = dag::chunk(data);
    benchmark::DoNotOptimize(dag::build_file_dag(leaves));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_BuildFileDag)->Arg(1 << 20)->Arg(16 << 20)->Unit(benchmark::kMillisecond);

void BM_Reassemble(benchmark::State& state) {
  auto data = random_bytes(static_cast<std::size_t>(state.range(0)));
  auto file = dag::build_file_dag(dag::chunk(data, 4096), 16);
  std::map<Cid, Bytes> blocks;
  for (const auto& b : file.nodes) blocks[b.cid] = b.data;
  dag::BlockFetcher fetch = [&](const Cid& c) -> std::optional<Bytes> { return blocks.at(c); };
  for (auto _ : state) benchmark::DoNotOptimize(dag::reassemble(file.root, fetch));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Reassemble)->Arg(4 << 20)->Unit(benchmark::kMillisecond);

void BM_WireBlockRoundTrip(benchmark::State& state) {
  auto block = dag::Block::from_node(dag::DagNode::leaf(random_bytes(256 << 10)));
  wire::Message m{1, {dht::Key256{}, {dht::Multiaddress::sim(0)}, {}}, wire::BlockData{block.cid, block.data}};
  for (auto _ : state) benchmark::DoNotOptimize(wire::decode(wire::encode(m)));
}
BENCHMARK(BM_WireBlockRoundTrip);

}  // namespace
