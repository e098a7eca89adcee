// SPDX-License-Identifier: Apache-2.0

// pstore: command-line front end for a local node and the simulator.

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "pstore/gateway.hpp"
#include "pstore/persist.hpp"
#include "pstore/scenario.hpp"
#include "pstore/simnet.hpp"

namespace {

using namespace pstore;
using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

std::atomic<bool> g_interrupted{false};

struct Options {
  std::string state;
  bool json_output = false;
};

// A single offline node backed by a state directory.
class LocalNode {
 public:
  explicit LocalNode(const Options& opts) : repo_(opts.state), sim_(sim::SimConfig{}) {
    index_ = sim_.spawn_node(NodeConfig{}, repo_.identity_seed());
    repo_.load(node());
    // Announce stored content again, as a restarted daemon would.
    for (const auto& cid : node().blockstore().cids())
      if (node().can_share(cid) && node().reprovide_enabled(cid)) node().provide(cid, [](Result<ProvideResult>) {});
    sim_.run_for(1s);
  }
  ~LocalNode() = default;

  Node& node() { return sim_.node(index_); }
  sim::Simulator& sim() { return sim_; }
  sim::NodeIndex index() const { return index_; }
  void save() { repo_.save(node()); }

  template <typename T>
  T run(const std::function<void(Callback<T>)>& start) {
    return sim_.await<T>(start).value();
  }

 private:
  persist::Repo repo_;
  sim::Simulator sim_;
  sim::NodeIndex index_ = 0;
};

Bytes read_input(const std::string& file) {
  std::istream* in = &std::cin;
  std::ifstream f;
  if (file != "-") {
    f.open(file, std::ios::binary);
    if (!f) throw Error(ErrorCode::io_error, "cannot read " + file);
    in = &f;
  }
  return Bytes(std::istreambuf_iterator<char>(*in), std::istreambuf_iterator<char>());
}

void emit(const Options& opts, const json& record, const std::string& text) {
  if (opts.json_output)
    std::cout << record.dump() << "\n";
  else
    std::cout << text << "\n";
}

std::string normalize_path(std::string path) {
  if (path.starts_with("/ipfs/") || path.starts_with("/ipns/")) return path;
  return "/ipfs/" + path;
}

std::vector<std::string> read_txt_table(const std::vector<std::string>& pairs, const std::string& file,
                                        const std::string& domain) {
  std::vector<std::string> out;
  for (const auto& p : pairs) {
    auto eq = p.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::invalid_argument, "--txt expects domain=record");
    if (p.substr(0, eq) == domain) out.push_back(p.substr(eq + 1));
  }
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::io_error, "cannot read " + file);
    auto table = json::parse(in);
    if (table.contains(domain))
      for (const auto& r : table.at(domain)) out.push_back(r.get<std::string>());
  }
  return out;
}

void on_signal(int) { g_interrupted = true; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pstore: content-addressed peer-to-peer storage"};
  app.require_subcommand(1);
  Options opts;
  if (const char* env = std::getenv("PSTORE_STATE")) opts.state = env;
  if (opts.state.empty()) opts.state = ".pstore";
  app.add_option("--state", opts.state, "State directory (env PSTORE_STATE, default ./.pstore)");
  app.add_flag("--json", opts.json_output, "Machine-readable output, one JSON record per result");

  std::function<int()> action;

  // add
  auto* add = app.add_subcommand("add", "Add a file or a flat directory and announce its blocks");
  std::string add_file;
  bool add_pin = false;
  add->add_option("file", add_file, "File to add, or - for stdin")->required();
  add->add_flag("--pin", add_pin, "Pin the root recursively");
  add->callback([&] {
    action = [&] {
      LocalNode local(opts);
      std::uint64_t size = 0;
      Cid cid;
      if (add_file != "-" && fs::is_directory(add_file)) {
        std::vector<std::pair<std::string, Bytes>> entries;
        for (const auto& e : fs::directory_iterator(add_file)) {
          if (!e.is_regular_file())
            throw Error(ErrorCode::invalid_argument, "only flat directories of regular files: " + e.path().string());
          entries.emplace_back(e.path().filename().string(), read_input(e.path().string()));
          size += entries.back().second.size();
        }
        cid = local.sim().add_directory(local.index(), std::move(entries), add_pin).value();
      } else {
        auto data = read_input(add_file);
        size = data.size();
        cid = local.sim().add(local.index(), std::move(data), add_pin).value();
      }
      local.save();
      emit(opts, {{"cid", cid.to_string()}, {"size", size}}, cid.to_string());
      return kOk;
    };
  });

  // cat
  auto* cat = app.add_subcommand("cat", "Write the bytes at a path to standard output");
  std::string cat_path;
  cat->add_option("path", cat_path, "/ipfs/<cid>[/...] or /ipns/<name>[/...]")->required();
  cat->callback([&] {
    action = [&] {
      LocalNode local(opts);
      auto content = local.sim().get(local.index(), normalize_path(cat_path)).value();
      local.save();
      std::cout.write(reinterpret_cast<const char*>(content.data.data()),
                      static_cast<std::streamsize>(content.data.size()));
      std::cout.flush();
      return kOk;
    };
  });

  // get
  auto* get = app.add_subcommand("get", "Retrieve the bytes at a path into a file");
  std::string get_path, get_out;
  get->add_option("path", get_path)->required();
  get->add_option("-o,--output", get_out, "Output file (default: the last path element)");
  get->callback([&] {
    action = [&] {
      LocalNode local(opts);
      auto path = normalize_path(get_path);
      auto content = local.sim().get(local.index(), path).value();
      local.save();
      auto out = get_out.empty() ? fs::path(path).filename().string() : get_out;
      std::ofstream f(out, std::ios::binary | std::ios::trunc);
      if (!f) throw Error(ErrorCode::io_error, "cannot write " + out);
      f.write(reinterpret_cast<const char*>(content.data.data()), static_cast<std::streamsize>(content.data.size()));
      emit(opts, {{"cid", content.cid.to_string()}, {"output", out}, {"size", content.data.size()}}, out);
      return kOk;
    };
  });

  // ls
  auto* ls = app.add_subcommand("ls", "List the links of a node");
  std::string ls_path;
  ls->add_option("path", ls_path)->required();
  ls->callback([&] {
    action = [&] {
      LocalNode local(opts);
      auto path = normalize_path(ls_path);
      auto links = local.run<std::vector<dag::Link>>(
          [&](Callback<std::vector<dag::Link>> cb) { local.node().ls(path, std::move(cb)); });
      for (const auto& l : links)
        emit(opts, {{"name", l.name}, {"cid", l.target.to_string()}, {"size", l.subtree_size}},
             l.target.to_string() + " " + std::to_string(l.subtree_size) + " " + l.name);
      return kOk;
    };
  });

  // pin add | rm | ls
  auto* pin = app.add_subcommand("pin", "Manage pins");
  pin->require_subcommand(1);
  auto* pin_add = pin->add_subcommand("add", "Pin a root (recursive unless --direct)");
  std::string pin_cid;
  bool pin_direct = false;
  pin_add->add_option("cid", pin_cid)->required();
  pin_add->add_flag("--direct", pin_direct, "Protect only the root block");
  pin_add->callback([&] {
    action = [&] {
      LocalNode local(opts);
      auto cid = Cid::parse(pin_cid);
      local.sim().pin(local.index(), cid, !pin_direct).value();
      local.save();
      emit(opts, {{"pinned", cid.to_string()}, {"recursive", !pin_direct}}, "pinned " + cid.to_string());
      return kOk;
    };
  });
  auto* pin_rm = pin->add_subcommand("rm", "Remove a pin");
  std::string unpin_cid;
  pin_rm->add_option("cid", unpin_cid)->required();
  pin_rm->callback([&] {
    action = [&] {
      LocalNode local(opts);
      auto cid = Cid::parse(unpin_cid);
      if (!local.node().unpin(cid)) throw Error(ErrorCode::not_found, "not pinned: " + cid.to_string());
      local.save();
      emit(opts, {{"unpinned", cid.to_string()}}, "unpinned " + cid.to_string());
      return kOk;
    };
  });
  auto* pin_ls = pin->add_subcommand("ls", "List pinned roots");
  pin_ls->callback([&] {
    action = [&] {
      LocalNode local(opts);
      for (const auto& [cid, recursive] : local.node().pins().roots())
        emit(opts, {{"cid", cid.to_string()}, {"recursive", recursive}},
             cid.to_string() + (recursive ? " recursive" : " direct"));
      return kOk;
    };
  });

  // providers
  auto* providers = app.add_subcommand("providers", "Find provider records for a cid");
  std::string prov_cid;
  std::size_t prov_limit = 20;
  providers->add_option("cid", prov_cid)->required();
  providers->add_option("--limit", prov_limit, "Maximum records")->check(CLI::PositiveNumber);
  providers->callback([&] {
    action = [&] {
      LocalNode local(opts);
      auto records = local.sim().find_providers(local.index(), Cid::parse(prov_cid), prov_limit).value();
      if (records.empty()) throw Error(ErrorCode::not_found, prov_cid);
      for (const auto& r : records) {
        std::string addrs;
        json addr_list = json::array();
        for (const auto& a : r.addresses) {
          addrs += " " + a.text();
          addr_list.push_back(a.text());
        }
        emit(opts, {{"provider", r.provider.to_hex()}, {"addresses", addr_list}}, r.provider.to_hex() + addrs);
      }
      return kOk;
    };
  });

  // name publish | resolve
  auto* name = app.add_subcommand("name", "Mutable names");
  name->require_subcommand(1);
  auto* publish = name->add_subcommand("publish", "Point this node's name at a path");
  std::string publish_path;
  publish->add_option("path", publish_path)->required();
  publish->callback([&] {
    action = [&] {
      LocalNode local(opts);
      auto n = local.sim().ipns_publish(local.index(), normalize_path(publish_path)).value();
      local.save();
      emit(opts, {{"name", n.to_string()}, {"value", normalize_path(publish_path)}, {"sequence", local.node().ipns_sequence()}},
           n.to_string());
      return kOk;
    };
  });
  auto* resolve = name->add_subcommand("resolve", "Resolve a name (default: this node's)");
  std::string resolve_name;
  resolve->add_option("name", resolve_name);
  resolve->callback([&] {
    action = [&] {
      LocalNode local(opts);
      auto n = resolve_name.empty() ? local.node().ipns_name() : Cid::parse(resolve_name);
      auto path = local.sim().ipns_resolve(local.index(), n).value();
      emit(opts, {{"name", n.to_string()}, {"path", path.to_string()}}, path.to_string());
      return kOk;
    };
  });

  // dnslink
  auto* dnslink = app.add_subcommand("dnslink", "Resolve a domain's dnslink record");
  std::string domain, txt_file;
  std::vector<std::string> txt_pairs;
  dnslink->add_option("domain", domain)->required();
  dnslink->add_option("--txt", txt_pairs, "TXT record as domain=record (repeatable)");
  dnslink->add_option("--txt-file", txt_file, "JSON object: domain -> [TXT records]");
  dnslink->callback([&] {
    action = [&] {
      LocalNode local(opts);
      TxtLookup txt = [&](std::string_view d) { return read_txt_table(txt_pairs, txt_file, std::string(d)); };
      auto path = local.run<dag::IpfsPath>(
          [&](Callback<dag::IpfsPath> cb) { local.node().dnslink_resolve(domain, txt, std::move(cb)); });
      emit(opts, {{"domain", domain}, {"path", path.to_string()}}, path.to_string());
      return kOk;
    };
  });

  // gateway serve
  auto* gateway_cmd = app.add_subcommand("gateway", "HTTP gateway");
  gateway_cmd->require_subcommand(1);
  auto* serve = gateway_cmd->add_subcommand("serve", "Serve /ipfs and /ipns paths until interrupted");
  gateway::GatewayConfig gw_config;
  double gw_timeout_s = 60;
  serve->add_option("--listen", gw_config.listen_address, "host:port")->capture_default_str();
  serve->add_option("--timeout", gw_timeout_s, "Request timeout in seconds")->check(CLI::PositiveNumber);
  serve->callback([&] {
    action = [&] {
      LocalNode local(opts);
      gw_config.request_timeout = SimDuration(static_cast<std::int64_t>(gw_timeout_s * 1e6));
      gateway::SimBackend backend(local.sim(), local.index());
      gateway::Gateway gw(backend, gw_config);
      gateway::Server server(gw);
      server.start();
      emit(opts, {{"listening", server.host() + ":" + std::to_string(server.port())}},
           "listening on http://" + server.host() + ":" + std::to_string(server.port()));
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      local.save();
      return kOk;
    };
  });

  // sim run
  auto* sim_cmd = app.add_subcommand("sim", "Simulator");
  sim_cmd->require_subcommand(1);
  auto* run = sim_cmd->add_subcommand("run", "Run a scenario script and print its report");
  std::string scenario_file, report_out;
  run->add_option("script", scenario_file)->required();
  run->add_option("--out", report_out, "Also write the report to this file");
  run->callback([&] {
    action = [&] {
      sim::ScenarioResult result;
      try {
        result = sim::run_scenario_file(scenario_file);
      } catch (const Error& e) {
        std::cerr << "pstore: " << e.what() << "\n";
        return e.code() == ErrorCode::io_error ? kFailure : kUsage;
      }
      std::cout << result.report;
      if (!report_out.empty()) {
        std::ofstream f(report_out, std::ios::binary | std::ios::trunc);
        f << result.report;
      }
      for (const auto& f : result.failures) std::cerr << "expectation failed: " << f << "\n";
      return result.passed ? kOk : kFailure;
    };
  });

  // stats
  auto* stats = app.add_subcommand("stats", "Local node statistics");
  stats->callback([&] {
    action = [&] {
      LocalNode local(opts);
      auto& n = local.node();
      json s{{"peer_id", n.id().to_hex()},
             {"ipns_name", n.ipns_name().to_string()},
             {"blocks", n.blockstore().count()},
             {"used_bytes", n.blockstore().used_bytes()},
             {"capacity_bytes", n.blockstore().capacity()},
             {"pins", n.pins().roots().size()},
             {"ipns_sequence", n.ipns_sequence()}};
      if (opts.json_output) {
        std::cout << s.dump() << "\n";
      } else {
        for (const auto& [k, v] : s.items()) std::cout << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
      }
      return kOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "pstore: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    return action ? action() : kUsage;
  } catch (const Error& e) {
    std::cerr << "pstore: " << e.what() << "\n";
    return e.code() == ErrorCode::invalid_argument ? kUsage : kFailure;
  } catch (const std::exception& e) {
    std::cerr << "pstore: internal: " << e.what() << "\n";
    return kFailure;
  }
}
