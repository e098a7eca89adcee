// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "pstore/persist.hpp"
#include "pstore/scenario.hpp"
#include "pstore/simnet.hpp"

using namespace pstore;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("pstore-test-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("persist") {
  TEST_CASE("state survives a restart") {
    auto dir = scratch("repo");
    std::mt19937_64 rng(80);
    auto data = oracle::random_bytes(rng, 700000);
    Cid root, name;
    Bytes seed;
    {
      persist::Repo repo(dir);
      seed = repo.identity_seed();
      sim::Simulator sim;
      auto n = sim.spawn_node({}, seed);
      root = sim.add(n, data, true).value();
      name = sim.ipns_publish(n, "/ipfs/" + root.to_string()).value();
      sim.node(n).set_reprovide(root, false);
      repo.save(sim.node(n));
    }
    persist::Repo repo(dir);
    CHECK(repo.identity_seed() == seed);
    sim::Simulator sim;
    auto n = sim.spawn_node({}, repo.identity_seed());
    repo.load(sim.node(n));
    auto& node = sim.node(n);
    CHECK(node.ipns_name() == name);
    CHECK(node.pins().is_root(root));
    CHECK(node.ipns_sequence() == 1);
    CHECK_FALSE(node.reprovide_enabled(root));
    CHECK(dag::reassemble(root, [&](const Cid& c) { return node.local_block(c); }) == data);

    // A corrupted block file is skipped rather than trusted.
    auto victim = dir / "blocks" / root.to_string();
    REQUIRE(fs::exists(victim));
    { std::ofstream(victim, std::ios::binary | std::ios::trunc) << "garbage"; }
    sim::Simulator sim2;
    auto m = sim2.spawn_node({}, repo.identity_seed());
    repo.load(sim2.node(m));
    CHECK_FALSE(sim2.node(m).blockstore().has(root));
    fs::remove_all(dir);
  }
}

TEST_SUITE("scenario") {
  TEST_CASE("bundled scenarios pass and are reproducible") {
    for (const char* name : {"partition.scn", "churn.scn"}) {
      auto path = fs::path(PSTORE_SCENARIO_DIR) / name;
      auto a = sim::run_scenario_file(path);
      INFO(name << ": " << (a.failures.empty() ? std::string() : a.failures.front()));
      CHECK(a.passed);
      CHECK(a.report == sim::run_scenario_file(path).report);
    }
    auto partition = sim::run_scenario_file(fs::path(PSTORE_SCENARIO_DIR) / "partition.scn");
    CHECK(partition.report.find("\"cross_partition_deliveries\": 0") != std::string::npos);
  }

  TEST_CASE("failed expectations are listed") {
    auto r = sim::run_scenario(R"({
      "seed": 3, "network": {"nodes": 3, "settle_s": 10},
      "files": {"f": {"size": 1000, "seed": 1}},
      "actions": [
        {"op": "add", "node": 0, "file": "f"},
        {"op": "get", "nodes": [1, 2], "file": "f", "expect": "fail"},
        {"op": "expect", "counter": "messages_sent", "max": 1}
      ]})");
    CHECK_FALSE(r.passed);
    CHECK(r.failures.size() == 2);
  }

  TEST_CASE("schema errors are rejected") {
    for (const char* bad : {"not json", "[]", R"({"actions": [{"op": "explode"}]})",
                            R"({"actions": [{"op": "add", "node": 0, "file": "ghost"}]})",
                            R"({"network": {"nodes": 2, "latency_ms": [50, 10]}})"}) {
      bool rejected = false;
      try {
        sim::run_scenario(bad);
      } catch (const Error& e) {
        rejected = e.code() == ErrorCode::invalid_argument;
      }
      CHECK_MESSAGE(rejected, bad);
    }
    CHECK_THROWS_AS(sim::run_scenario_file("/nonexistent/x.scn"), Error);
  }
}
