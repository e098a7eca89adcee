// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <map>

#include "oracles.hpp"
#include "pstore/dag.hpp"
#include "pstore/error.hpp"

using namespace pstore;
using namespace pstore::dag;

namespace {

struct MemStore {
  std::map<Cid, Bytes> blocks;
  void put(const Block& b) { blocks[b.cid] = b.data; }
  void put_all(const std::vector<Block>& bs) {
    for (const auto& b : bs) put(b);
  }
  BlockFetcher fetcher() const {
    return [this](const Cid& c) -> std::optional<Bytes> {
      auto it = blocks.find(c);
      if (it == blocks.end()) return std::nullopt;
      return it->second;
    };
  }
};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::internal;
}

}  // namespace

TEST_SUITE("dag") {
  TEST_CASE("chunking matches fixed-size slicing") {
    std::mt19937_64 rng(10);
    for (std::size_t s : {16u, 4096u, 262144u}) {
      auto x = oracle::random_bytes(rng, s * 3 + 7);
      auto leaves = chunk(x, s);
      auto expect = oracle::slices(x, s);
      REQUIRE(leaves.size() == expect.size());
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        REQUIRE(leaves[i].node().kind == NodeKind::leaf);
        REQUIRE(leaves[i].node().data == expect[i]);
        REQUIRE(cid_verify(leaves[i].data, leaves[i].cid));
      }
    }
    CHECK(chunk(Bytes{}, 16).size() == 1);
  }

  TEST_CASE("round trip across chunk sizes and fanouts") {
    std::mt19937_64 rng(11);
    for (std::size_t s : {16u, 4096u, 262144u}) {
      for (std::size_t f : {2u, 16u, 174u}) {
        for (std::size_t len : {std::size_t{0}, std::size_t{1}, s, s + 1, 37 * s + 5}) {
          if (len > 2'000'000) continue;
          auto x = oracle::random_bytes(rng, len);
          auto dag = build_file_dag(chunk(x, s), f);
          MemStore store;
          store.put_all(dag.nodes);
          REQUIRE(dag.nodes.back().cid == dag.root);
          REQUIRE(dag.size == len);
          REQUIRE(dag.nodes.back().node().total_size() == len);
          REQUIRE(reassemble(dag.root, store.fetcher()) == x);
        }
      }
    }
  }

  TEST_CASE("leftover node is promoted") {
    std::mt19937_64 rng(12);
    auto x = oracle::random_bytes(rng, 48);
    auto dag = build_file_dag(chunk(x, 16), 2);
    CHECK(dag.nodes.size() == 5);
    auto one = build_file_dag(chunk(Bytes(10, 1), 16), 2);
    CHECK(one.nodes.size() == 1);
    CHECK(one.root == one.nodes.front().cid);
  }

  TEST_CASE("aligned shared prefix shares exactly the first k leaves") {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 50; ++t) {
      const std::size_t s = 64, k = 1 + rng() % 6;
      auto prefix = oracle::random_bytes(rng, k * s);
      auto x = prefix, y = prefix;
      auto tx = oracle::random_bytes(rng, 1 + rng() % 300), ty = oracle::random_bytes(rng, 1 + rng() % 300);
      tx[0] = 0;
      ty[0] = 1;
      x.insert(x.end(), tx.begin(), tx.end());
      y.insert(y.end(), ty.begin(), ty.end());
      auto lx = chunk(x, s), ly = chunk(y, s);
      std::size_t same = 0;
      while (same < std::min(lx.size(), ly.size()) && lx[same].cid == ly[same].cid) ++same;
      REQUIRE(same == k);
    }
  }

  TEST_CASE("canonical encoding is deterministic and strict") {
    std::mt19937_64 rng(14);
    auto a = Block::from_node(DagNode::leaf(to_bytes("alpha")));
    auto b = Block::from_node(DagNode::leaf(to_bytes("beta")));
    auto d1 = build_directory_dag({{"b", b.cid, 4}, {"a", a.cid, 5}});
    auto d2 = build_directory_dag({{"a", a.cid, 5}, {"b", b.cid, 4}});
    CHECK(d1.root == d2.root);
    CHECK(d1.node.data == d2.node.data);
    CHECK(d1.size == 9);
    CHECK(node_deserialize(node_serialize(d1.node.node())) == d1.node.node());

    // Exact bytes for a leaf: kind, zero links, varint length, payload.
    CHECK(node_serialize(DagNode::leaf(to_bytes("hi"))) == Bytes{0, 0, 2, 'h', 'i'});

    auto trailing = a.data;
    trailing.push_back(0);
    CHECK(code_of([&] { node_deserialize(trailing); }) == ErrorCode::malformed_node);
    CHECK(code_of([] { node_deserialize(Bytes{7, 0, 0}); }) == ErrorCode::malformed_node);
    CHECK(code_of([&] { build_directory_dag({{"a", a.cid, 5}, {"a", b.cid, 4}}); }) == ErrorCode::duplicate_name);
    CHECK(code_of([&] { build_directory_dag({{"a/b", a.cid, 5}}); }) == ErrorCode::invalid_name);
    CHECK(build_directory_dag({}).node.node().links.empty());
  }

  TEST_CASE("any single-bit corruption is detected during reassembly") {
    std::mt19937_64 rng(15);
    auto x = oracle::random_bytes(rng, 2000);
    auto dag = build_file_dag(chunk(x, 128), 4);
    for (int t = 0; t < 200; ++t) {
      MemStore store;
      store.put_all(dag.nodes);
      auto& victim = std::next(store.blocks.begin(), static_cast<long>(rng() % store.blocks.size()))->second;
      victim[rng() % victim.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
      REQUIRE(code_of([&] { reassemble(dag.root, store.fetcher()); }) == ErrorCode::integrity_violation);
    }
  }

  TEST_CASE("missing blocks are reported") {
    auto dag = build_file_dag(chunk(Bytes(100, 9), 16), 2);
    MemStore store;
    store.put_all(dag.nodes);
    store.blocks.erase(dag.nodes.front().cid);
    CHECK(code_of([&] { reassemble(dag.root, store.fetcher()); }) == ErrorCode::missing_block);
  }

  TEST_CASE("path parsing and resolution") {
    auto file = build_file_dag(chunk(to_bytes("content"), 16), 2);
    auto inner = build_directory_dag({{"f.txt", file.root, file.size}});
    auto outer = build_directory_dag({{"sub", inner.root, inner.size}});
    MemStore store;
    store.put_all(file.nodes);
    store.put(inner.node);
    store.put(outer.node);

    auto p = IpfsPath::parse("/ipfs/" + outer.root.to_string() + "/sub/f.txt");
    CHECK(p.segments == std::vector<std::string>{"sub", "f.txt"});
    CHECK(IpfsPath::parse(p.to_string()) == p);
    CHECK(resolve_path(p, store.fetcher()) == file.root);
    CHECK(resolve_path(IpfsPath::parse("/ipfs/" + outer.root.to_string() + "/sub/"), store.fetcher()) == inner.root);
    CHECK(code_of([&] { resolve_path(IpfsPath::parse("/ipfs/" + outer.root.to_string() + "/nope"), store.fetcher()); }) ==
          ErrorCode::segment_not_found);
    CHECK(code_of([&] { resolve_path(IpfsPath::parse("/ipfs/" + file.root.to_string() + "/x"), store.fetcher()); }) ==
          ErrorCode::not_a_directory);
    CHECK(code_of([&] { reassemble(outer.root, store.fetcher()); }) == ErrorCode::is_a_directory);
    CHECK(code_of([] { IpfsPath::parse("/http/x"); }) == ErrorCode::invalid_path);
    CHECK(code_of([&] { IpfsPath::parse("/ipfs/" + outer.root.to_string() + "//a"); }) == ErrorCode::invalid_path);
  }
}
