// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "oracles.hpp"
#include "pstore/exchange.hpp"
#include "pstore/simnet.hpp"
#include "pstore/wire.hpp"

using namespace pstore;
using namespace std::chrono_literals;

namespace {

dht::PeerInfo some_peer(std::uint32_t i) {
  dht::Key256::Storage s{};
  s[0] = static_cast<std::uint8_t>(i);
  s[31] = 0x42;
  return {dht::Key256(s), {dht::Multiaddress::sim(i)}, {}};
}

std::unique_ptr<sim::Simulator> network(std::uint64_t seed, std::size_t n) {
  auto sim = std::make_unique<sim::Simulator>(sim::SimConfig{seed});
  NodeConfig c;
  c.k = 8;
  for (std::size_t i = 0; i < n; ++i) {
    sim->spawn_node(c);
    sim->run_for(1s);
  }
  sim->run_for(1min);
  return sim;
}

}  // namespace

TEST_SUITE("exchange") {
  TEST_CASE("every message variant round-trips through the wire encoding") {
    auto cid = Cid::from_bytes(to_bytes("w"));
    auto keys = crypto::KeyPair::from_seed(Bytes(32, 7));
    auto record = ipns::make_record(keys, "/ipfs/" + cid.to_string(), 3, SimTime(5s));
    dht::ProviderRecord prov{dht::dht_key_for(cid), some_peer(2).peer, {dht::Multiaddress::sim(2)}, SimTime(9s)};
    std::vector<wire::Payload> payloads{
        wire::Ping{},
        wire::Pong{},
        wire::FindNode{dht::dht_key_for(cid)},
        wire::FindNodeReply{{some_peer(1), some_peer(2)}},
        wire::GetProviders{dht::dht_key_for(cid)},
        wire::GetProvidersReply{{prov}, {some_peer(3)}},
        wire::PutProvider{prov},
        wire::Ack{true},
        wire::PutIpns{record},
        wire::GetIpns{dht::dht_key_for(cid)},
        wire::GetIpnsReply{record, {}},
        wire::GetIpnsReply{std::nullopt, {some_peer(4)}},
        wire::Want{cid, 5},
        wire::Have{cid},
        wire::BlockData{cid, to_bytes("payload")},
        wire::Cancel{cid},
        wire::DontHave{cid},
    };
    for (const auto& p : payloads) {
      wire::Message m{17, some_peer(9), p};
      auto bytes = wire::encode(m);
      REQUIRE(wire::peek_type(bytes) == wire::type_of(p));
      auto back = wire::decode(bytes);
      REQUIRE(back.request_id == 17);
      REQUIRE(back.payload.index() == p.index());
      REQUIRE(wire::encode(back) == bytes);
      for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
        bool threw = false;
        try {
          wire::decode(ByteView(bytes).first(cut));
        } catch (const Error& e) {
          threw = e.code() == ErrorCode::malformed_message;
        }
        REQUIRE(threw);
      }
    }
  }

  TEST_CASE("want list bookkeeping") {
    exchange::WantList w;
    auto a = Cid::from_bytes(to_bytes("a")), b = Cid::from_bytes(to_bytes("b"));
    CHECK(w.add(a, 1, 1));
    CHECK_FALSE(w.add(a, 1, 1));
    CHECK(w.add(a, 1, 2));
    CHECK(w.add(b, 1, 2));
    CHECK(w.remove_all(a).size() == 2);
    CHECK(w.wants(b, 2));
    CHECK(w.remove_session(2) == 1);
    CHECK(w.empty());
  }

  TEST_CASE("fetch leaves verified blocks and an empty want list") {
    std::mt19937_64 rng(30);
    auto sim = network(30, 10);
    auto data = oracle::random_bytes(rng, 900000);
    auto root = sim->add(0, data).value();
    auto got = sim->get(5, "/ipfs/" + root.to_string());
    REQUIRE(got.ok());
    CHECK(got.value().data == data);
    auto& node = sim->node(5);
    CHECK(node.want_list().empty());
    for (const auto& c : node.blockstore().cids()) CHECK(cid_verify(node.blockstore().peek(c)->data, c));

    // Reassembly from local blocks needs no network.
    const auto before = sim->counter("messages_sent");
    auto local = dag::reassemble(root, [&](const Cid& c) { return node.local_block(c); });
    CHECK(local == data);
    CHECK(sim->counter("messages_sent") == before);
  }

  TEST_CASE("missing content resolves to a typed error within the timeout") {
    auto sim = network(31, 6);
    auto absent = Cid::from_bytes(to_bytes("nobody has this"));
    const auto start = sim->now();
    auto r = sim->get(2, "/ipfs/" + absent.to_string());
    REQUIRE_FALSE(r.ok());
    CHECK((r.error().code() == ErrorCode::not_found || r.error().code() == ErrorCode::timeout));
    CHECK(sim->now() - start <= sim->node(2).config().request_timeout + 1s);
    CHECK(sim->node(2).want_list().empty());
  }

  TEST_CASE("unsolicited and duplicate blocks are dropped") {
    auto sim = network(32, 4);
    auto block = dag::Block::from_node(dag::DagNode::leaf(to_bytes("stray")));
    wire::Message m{0, sim->node(0).self_info(), wire::BlockData{block.cid, block.data}};
    sim->send(0, 1, wire::encode(m));
    sim->run_for(1s);
    CHECK(sim->counter("duplicate_blocks") == 1);
    CHECK_FALSE(sim->node(1).blockstore().has(block.cid));

    auto bad = m;
    std::get<wire::BlockData>(bad.payload).data.back() ^= 1;
    sim->send(0, 1, wire::encode(bad));
    sim->run_for(1s);
    CHECK(sim->counter("corrupt_blocks_detected") == 1);
  }
}
