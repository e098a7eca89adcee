// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pstore/dht.hpp"
#include "pstore/simnet.hpp"

using namespace pstore;
using namespace pstore::dht;
using namespace std::chrono_literals;

namespace {

Key256 random_key(std::mt19937_64& rng) {
  Key256::Storage s;
  for (auto& b : s) b = static_cast<std::uint8_t>(rng());
  return Key256(s);
}

// A key sharing `prefix` leading bits with base.
Key256 near_key(std::mt19937_64& rng, const Key256& base, std::size_t prefix) {
  auto s = random_key(rng).bytes();
  const auto& b = base.bytes();
  for (std::size_t bit = 0; bit <= prefix && bit < kKeyBits; ++bit) {
    const auto byte = bit / 8;
    const std::uint8_t mask = static_cast<std::uint8_t>(0x80u >> (bit % 8));
    const bool want = (b[byte] & mask) != 0;
    const bool flip = bit == prefix;
    if (want != flip)
      s[byte] |= mask;
    else
      s[byte] &= static_cast<std::uint8_t>(~mask);
  }
  return Key256(s);
}

PeerInfo peer(const Key256& id, std::uint32_t index = 0) { return PeerInfo{id, {Multiaddress::sim(index)}, {}}; }

}  // namespace

TEST_SUITE("dht") {
  TEST_CASE("xor metric laws") {
    std::mt19937_64 rng(20);
    for (int i = 0; i < 500; ++i) {
      auto x = random_key(rng), y = random_key(rng), z = random_key(rng);
      REQUIRE(xor_distance(x, x).is_zero());
      REQUIRE(xor_distance(x, y) == xor_distance(y, x));
      auto dxz = oracle::as_integer(xor_distance(x, z).bytes());
      auto dxy = oracle::as_integer(xor_distance(x, y).bytes());
      auto dyz = oracle::as_integer(xor_distance(y, z).bytes());
      REQUIRE(dxz <= dxy + dyz);
      REQUIRE(dxy == oracle::xor_distance(x.bytes(), y.bytes()));
    }
  }

  TEST_CASE("closest peers equal a brute-force oracle") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 1000; ++trial) {
      const auto owner = random_key(rng);
      const std::size_t k = 2 + rng() % 20;
      RoutingTable table(owner, k);
      std::vector<Key256::Storage> present;
      const auto n = rng() % 120;
      for (std::size_t i = 0; i < n; ++i) {
        // Mix uniform keys with keys near the owner to populate deep buckets.
        auto id = (i % 3 == 0) ? near_key(rng, owner, rng() % 24) : random_key(rng);
        if (id == owner) continue;
        table.update(peer(id, static_cast<std::uint32_t>(i)));
      }
      for (const auto& p : table.all()) present.push_back(p.peer.bytes());
      const auto target = random_key(rng);
      const std::size_t want = 1 + rng() % 25;
      auto got = table.closest(target, want);
      auto expect = oracle::k_closest(present, target.bytes(), want);
      REQUIRE(got.size() == expect.size());
      for (std::size_t i = 0; i < got.size(); ++i) REQUIRE(got[i].peer.bytes() == present[expect[i]]);
    }
  }

  TEST_CASE("bucket capacity and replacement policy") {
    std::mt19937_64 rng(22);
    const auto owner = random_key(rng);
    RoutingTable table(owner, 4);
    std::vector<Key256> same_bucket;
    for (int i = 0; i < 10; ++i) same_bucket.push_back(near_key(rng, owner, 3));
    std::vector<RoutingTable::Update> updates;
    for (const auto& id : same_bucket) updates.push_back(table.update(peer(id)));
    CHECK(table.bucket(3).size() == 4);
    CHECK(updates[3] == RoutingTable::Update::inserted);
    CHECK(updates[4] == RoutingTable::Update::dropped);
    CHECK(table.update(peer(same_bucket[0])) == RoutingTable::Update::refreshed);
    CHECK(table.bucket(3).back().peer == same_bucket[0]);
    CHECK(table.update(peer(owner)) == RoutingTable::Update::ignored);
    CHECK(table.remove(same_bucket[1]));
    CHECK(table.update(peer(same_bucket[9])) == RoutingTable::Update::inserted);
    for (std::size_t b = 0; b < kKeyBits; ++b) CHECK(table.bucket(b).size() <= 4);
  }

  TEST_CASE("provider store expiry, uniqueness and cap") {
    std::mt19937_64 rng(23);
    ProviderStore store(3);
    const auto key = random_key(rng);
    const SimTime t0{};
    auto p1 = random_key(rng), p2 = random_key(rng), p3 = random_key(rng), p4 = random_key(rng);
    store.put({key, p1, {}, t0 + 10s}, t0);
    store.put({key, p1, {}, t0 + 20s}, t0);
    CHECK(store.get(key, t0).size() == 1);
    store.put({key, p2, {}, t0 + 5s}, t0);
    store.put({key, p3, {}, t0 + 30s}, t0);
    store.put({key, p4, {}, t0 + 40s}, t0);
    CHECK(store.get(key, t0).size() == 3);
    CHECK_FALSE(store.has(key, p2, t0));  // soonest to expire was evicted
    CHECK(store.has(key, p1, t0 + 15s));
    CHECK_FALSE(store.has(key, p1, t0 + 20s));
    CHECK(store.get(key, t0 + 35s).size() == 1);
    CHECK(store.purge(t0 + 35s) == 2);
    CHECK(store.size() == 1);
  }

  TEST_CASE("dht key of a cid is its digest") {
    auto cid = Cid::from_bytes(to_bytes("k"));
    CHECK(std::equal(cid.digest().begin(), cid.digest().end(), dht_key_for(cid).bytes().begin()));
    CHECK(Key256::from_hex(dht_key_for(cid).to_hex()) == dht_key_for(cid));
  }

  TEST_CASE("iterative lookup in a stable network") {
    std::mt19937_64 rng(24);
    sim::Simulator sim(sim::SimConfig{24});
    NodeConfig config;
    config.k = 8;
    const std::size_t n = 40;
    for (std::size_t i = 0; i < n; ++i) {
      sim.spawn_node(config);
      sim.run_for(1s);
    }
    sim.run_for(1min);
    double hops = 0;
    for (int t = 0; t < 20; ++t) {
      const auto target = random_key(rng);
      const auto from = static_cast<sim::NodeIndex>(rng() % n);
      std::vector<Key256::Storage> ids;
      std::vector<PeerId> who;
      for (sim::NodeIndex i = 0; i < n; ++i)
        if (i != from) {
          ids.push_back(sim.node(i).id().bytes());
          who.push_back(sim.node(i).id());
        }
      auto r = sim.find_node(from, target).value();
      auto expect = oracle::k_closest(ids, target.bytes(), 8);
      REQUIRE(r.peers.size() == 8);
      for (std::size_t i = 0; i < 8; ++i) REQUIRE(r.peers[i].peer == who[expect[i]]);
      hops += static_cast<double>(r.hops);
    }
    CHECK(hops / 20 <= std::ceil(std::log2(double(n))) + 2);
  }

  TEST_CASE("single node degrades gracefully") {
    sim::Simulator sim(sim::SimConfig{25});
    auto a = sim.spawn_node();
    auto r = sim.find_node(a, Key256{});
    REQUIRE(r.ok());
    CHECK(r.value().peers.empty());
    auto cid = sim.add(a, to_bytes("solo")).value();
    auto p = sim.provide(a, cid).value();
    CHECK(p.local);
    CHECK(p.remote == 0);
  }
}
