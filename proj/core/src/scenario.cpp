// SPDX-License-Identifier: Apache-2.0

#include "pstore/scenario.hpp"

#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "pstore/simnet.hpp"

namespace pstore::sim {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& what) { throw Error(ErrorCode::invalid_argument, what); }

SimDuration seconds(double s) { return SimDuration(static_cast<std::int64_t>(s * 1e6)); }

Bytes generate(std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Bytes out(size);
  for (std::size_t i = 0; i < size; i += 8) {
    auto v = rng();
    for (std::size_t j = 0; j < 8 && i + j < size; ++j) out[i + j] = static_cast<std::uint8_t>(v >> (8 * j));
  }
  return out;
}

NodeConfig parse_node_config(const json& j) {
  NodeConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) schema_error("node_config must be an object");
  c.chunk_size = j.value("chunk_size", c.chunk_size);
  c.fanout = j.value("fanout", c.fanout);
  if (j.contains("capacity_mb")) c.capacity_bytes = static_cast<std::uint64_t>(j.at("capacity_mb").get<double>() * (1 << 20));
  c.k = j.value("k", c.k);
  c.alpha = j.value("alpha", c.alpha);
  c.share_cache = j.value("share_cache", c.share_cache);
  c.reprovide = j.value("reprovide", c.reprovide);
  c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
  auto dur = [&](const char* key, SimDuration& field) {
    if (j.contains(key)) field = seconds(j.at(key).get<double>());
  };
  dur("provider_ttl_s", c.provider_ttl);
  dur("reprovide_interval_s", c.reprovide_interval);
  dur("gc_interval_s", c.gc_interval);
  dur("maintenance_interval_s", c.maintenance_interval);
  dur("rpc_timeout_s", c.rpc_timeout);
  dur("fetch_timeout_s", c.fetch_timeout);
  dur("request_timeout_s", c.request_timeout);
  c.validate();
  return c;
}

class Runner {
 public:
  explicit Runner(const json& script) : script_(script) {}

  ScenarioResult run() {
    if (!script_.is_object()) schema_error("scenario must be a JSON object");
    const auto seed = script_.value("seed", std::uint64_t{1});
    const auto& net = script_.contains("network") ? script_.at("network") : json::object();
    SimConfig sc;
    sc.seed = seed;
    if (net.contains("latency_ms")) {
      const auto& l = net.at("latency_ms");
      if (!l.is_array() || l.size() != 2) schema_error("latency_ms must be [min, max]");
      sc.latency_min = seconds(l.at(0).get<double>() / 1000.0);
      sc.latency_max = seconds(l.at(1).get<double>() / 1000.0);
    }
    sc.drop_rate = net.value("drop_rate", 0.0);
    sc.bootstrap_count = net.value("bootstrap_count", sc.bootstrap_count);
    const auto count = net.value("nodes", std::size_t{8});
    if (count == 0) schema_error("network.nodes must be positive");
    auto config = parse_node_config(script_.value("node_config", json()));

    sim_ = std::make_unique<Simulator>(sc);
    rng_.seed(seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::size_t i = 0; i < count; ++i) {
      sim_->spawn_node(config);
      sim_->run_for(seconds(net.value("join_gap_s", 1.0)));
    }
    sim_->run_for(seconds(net.value("settle_s", 30.0)));

    if (script_.contains("files")) {
      for (const auto& [name, desc] : script_.at("files").items())
        files_[name] = generate(desc.at("size").get<std::size_t>(), desc.value("seed", std::uint64_t{0}));
    }

    json steps = json::array();
    const auto& actions = script_.contains("actions") ? script_.at("actions") : json::array();
    if (!actions.is_array()) schema_error("actions must be an array");
    for (std::size_t i = 0; i < actions.size(); ++i) {
      current_ = i;
      steps.push_back(apply(actions.at(i)));
    }

    json report;
    report["name"] = script_.value("name", std::string("scenario"));
    report["seed"] = seed;
    report["passed"] = failures_.empty();
    report["failures"] = failures_;
    report["steps"] = steps;
    report["metrics"] = json::parse(sim_->metrics_report());
    return ScenarioResult{failures_.empty(), failures_, report.dump(2) + "\n"};
  }

 private:
  void fail(const std::string& what) { failures_.push_back("action " + std::to_string(current_) + ": " + what); }

  NodeIndex node_at(const json& j) const {
    auto n = j.get<std::int64_t>();
    if (n < 0 || static_cast<std::size_t>(n) >= sim_->size()) schema_error("unknown node " + std::to_string(n));
    return static_cast<NodeIndex>(n);
  }

  std::vector<NodeIndex> nodes_of(const json& action) const {
    if (action.contains("node")) return {node_at(action.at("node"))};
    if (!action.contains("nodes")) schema_error("action needs node or nodes");
    return node_set(action.at("nodes"));
  }

  std::vector<NodeIndex> node_set(const json& j) const {
    std::vector<NodeIndex> out;
    if (j.is_string() && j.get<std::string>() == "online") return sim_->online_nodes();
    if (j.is_object()) {
      auto from = j.at("from").get<std::int64_t>();
      auto to = j.at("to").get<std::int64_t>();
      for (auto n = from; n <= to; ++n) out.push_back(node_at(json(n)));
      return out;
    }
    if (!j.is_array()) schema_error("node set must be an array, {from,to} or \"online\"");
    for (const auto& n : j) out.push_back(node_at(n));
    return out;
  }

  const Bytes& file(const std::string& name) const {
    auto it = files_.find(name);
    if (it == files_.end()) schema_error("unknown file " + name);
    return it->second;
  }

  std::string path_of(const json& action) const {
    if (action.contains("path")) return action.at("path").get<std::string>();
    auto name = action.at("file").get<std::string>();
    auto it = cids_.find(name);
    if (it == cids_.end()) schema_error("file " + name + " was never added");
    std::string path = "/ipfs/" + it->second.to_string();
    if (action.contains("sub")) path += "/" + action.at("sub").get<std::string>();
    return path;
  }

  // Bytes a successful get of this action must return, if known.
  std::optional<Bytes> expected_bytes(const json& action) const {
    if (action.contains("sub")) return files_.count(action.at("sub").get<std::string>()) ? std::optional(file(action.at("sub").get<std::string>())) : std::nullopt;
    if (action.contains("file") && files_.count(action.at("file").get<std::string>())) return file(action.at("file").get<std::string>());
    return std::nullopt;
  }

  bool try_get(NodeIndex n, const std::string& path, const std::optional<Bytes>& want, std::string& error) {
    if (!sim_->online(n)) {
      error = "offline";
      return false;
    }
    auto r = sim_->get(n, path);
    if (!r.ok()) {
      error = std::string(error_name(r.error().code()));
      return false;
    }
    if (want && r.value().data != *want) {
      error = "bytes-differ";
      return false;
    }
    return true;
  }

  void check(const std::string& expect, std::size_t ok, std::size_t total, const std::string& what) {
    if (expect == "ok" && ok != total)
      fail(what + ": expected all to succeed, " + std::to_string(ok) + "/" + std::to_string(total) + " did");
    else if (expect == "fail" && ok != 0)
      fail(what + ": expected all to fail, " + std::to_string(ok) + "/" + std::to_string(total) + " succeeded");
    else if (expect != "ok" && expect != "fail" && expect != "any")
      schema_error("expect must be ok, fail or any");
  }

  json apply(const json& action) {
    if (!action.is_object() || !action.contains("op")) schema_error("action must be an object with op");
    const auto op = action.at("op").get<std::string>();
    json step{{"op", op}};
    if (action.contains("at_s")) {
      auto at = from_micros(static_cast<std::int64_t>(action.at("at_s").get<double>() * 1e6));
      if (at > sim_->now()) sim_->run_until(at);
    }

    if (op == "add") {
      auto n = node_at(action.at("node"));
      auto name = action.at("file").get<std::string>();
      auto r = sim_->add(n, file(name), action.value("pin", false));
      if (!r.ok()) {
        fail("add " + name + ": " + r.error().what());
      } else {
        cids_[action.value("as", name)] = r.value();
        step["cid"] = r.value().to_string();
      }
    } else if (op == "add_dir") {
      auto n = node_at(action.at("node"));
      std::vector<std::pair<std::string, Bytes>> entries;
      for (const auto& [entry, name] : action.at("entries").items()) entries.emplace_back(entry, file(name.get<std::string>()));
      auto r = sim_->add_directory(n, std::move(entries), action.value("pin", false));
      if (!r.ok()) {
        fail(std::string("add_dir: ") + r.error().what());
      } else {
        cids_[action.at("as").get<std::string>()] = r.value();
        step["cid"] = r.value().to_string();
      }
    } else if (op == "get") {
      auto path = path_of(action);
      auto want = expected_bytes(action);
      std::size_t ok = 0;
      json errors = json::array();
      auto nodes = nodes_of(action);
      for (auto n : nodes) {
        std::string error;
        if (try_get(n, path, want, error))
          ++ok;
        else
          errors.push_back({{"node", n}, {"error", error}});
      }
      step["ok"] = ok;
      step["total"] = nodes.size();
      step["errors"] = errors;
      check(action.value("expect", std::string("ok")), ok, nodes.size(), "get " + path);
    } else if (op == "pin") {
      auto path = path_of(action);
      for (auto n : nodes_of(action)) {
        auto cid = Cid::parse(path.substr(6));
        auto r = sim_->pin(n, cid, action.value("recursive", true));
        if (!r.ok()) fail("pin on " + std::to_string(n) + ": " + r.error().what());
      }
    } else if (op == "partition") {
      std::vector<std::vector<NodeIndex>> groups;
      for (const auto& g : action.at("groups")) groups.push_back(node_set(g));
      sim_->partition(std::move(groups));
    } else if (op == "heal") {
      sim_->heal();
    } else if (op == "leave") {
      for (auto n : nodes_of(action)) sim_->leave(n);
    } else if (op == "rejoin") {
      for (auto n : nodes_of(action)) sim_->rejoin(n);
    } else if (op == "advance") {
      sim_->run_for(seconds(action.at("s").get<double>()));
    } else if (op == "churn") {
      churn(action, step);
    } else if (op == "publish") {
      auto n = node_at(action.at("node"));
      auto r = sim_->ipns_publish(n, path_of(action));
      if (!r.ok()) {
        fail(std::string("publish: ") + r.error().what());
      } else {
        names_[action.at("as").get<std::string>()] = r.value();
        step["name"] = r.value().to_string();
      }
    } else if (op == "resolve") {
      auto name = names_.at(action.at("name").get<std::string>());
      std::optional<std::string> want;
      if (action.contains("file")) want = path_of(action);
      std::size_t ok = 0;
      auto nodes = nodes_of(action);
      for (auto n : nodes) {
        auto r = sim_->ipns_resolve(n, name);
        if (r.ok() && (!want || r.value().to_string() == *want)) ++ok;
      }
      step["ok"] = ok;
      step["total"] = nodes.size();
      check(action.value("expect", std::string("ok")), ok, nodes.size(), "resolve " + name.to_string());
    } else if (op == "expect") {
      auto counter = action.at("counter").get<std::string>();
      auto value = sim_->counter(counter);
      step["counter"] = counter;
      step["value"] = value;
      if (action.contains("equals") && value != action.at("equals").get<std::uint64_t>())
        fail(counter + " = " + std::to_string(value) + ", expected " + action.at("equals").dump());
      if (action.contains("min") && value < action.at("min").get<std::uint64_t>())
        fail(counter + " = " + std::to_string(value) + ", expected >= " + action.at("min").dump());
      if (action.contains("max") && value > action.at("max").get<std::uint64_t>())
        fail(counter + " = " + std::to_string(value) + ", expected <= " + action.at("max").dump());
    } else {
      schema_error("unknown op " + op);
    }
    step["t_us"] = to_micros(sim_->now());
    return step;
  }

  void churn(const json& action, json& step) {
    const auto rate = action.at("rate").get<double>();
    const auto epoch = seconds(action.at("epoch_s").get<double>());
    const auto epochs = action.at("epochs").get<std::size_t>();
    const bool rejoin = action.value("rejoin", true);
    std::set<NodeIndex> exempt;
    if (action.contains("exempt"))
      for (auto n : node_set(action.at("exempt"))) exempt.insert(n);
    const json probe = action.value("probe", json());
    std::size_t reachable = 0;
    json per_epoch = json::array();
    for (std::size_t e = 0; e < epochs; ++e) {
      sim_->run_for(epoch);
      auto left = sim_->churn_step(rate, exempt, rejoin);
      sim_->run_for(seconds(action.value("settle_s", 60.0)));
      json entry{{"epoch", e + 1}, {"left", left.size()}};
      if (!probe.is_null()) {
        std::vector<NodeIndex> pool;
        for (auto n : sim_->online_nodes())
          if (!exempt.contains(n)) pool.push_back(n);
        if (pool.empty()) schema_error("churn probe has no eligible node");
        auto n = pool[rng_() % pool.size()];
        std::string error;
        bool ok = try_get(n, path_of(probe), expected_bytes(probe), error);
        reachable += ok ? 1 : 0;
        entry["probe_node"] = n;
        entry["reachable"] = ok;
      }
      per_epoch.push_back(entry);
    }
    step["epochs"] = per_epoch;
    if (!probe.is_null()) {
      step["reachable"] = reachable;
      check(probe.value("expect", std::string("ok")), reachable, epochs, "churn probe");
    }
  }

  const json& script_;
  std::unique_ptr<Simulator> sim_;
  std::mt19937_64 rng_;
  std::map<std::string, Bytes> files_;
  std::map<std::string, Cid> cids_;
  std::map<std::string, Cid> names_;
  std::vector<std::string> failures_;
  std::size_t current_ = 0;
};

}  // namespace

ScenarioResult run_scenario(std::string_view script) {
  json parsed;
  try {
    parsed = json::parse(script);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("scenario is not valid JSON: ") + e.what());
  }
  try {
    return Runner(parsed).run();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("scenario schema: ") + e.what());
  }
}

ScenarioResult run_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return run_scenario(buf.str());
}

}  // namespace pstore::sim
