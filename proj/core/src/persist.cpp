// SPDX-License-Identifier: Apache-2.0

#include "pstore/persist.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

namespace pstore::persist {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Bytes read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + p.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& p, ByteView data) {
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(ErrorCode::io_error, "short write to " + tmp.string());
  }
  fs::rename(tmp, p);
}

json read_manifest(const fs::path& p) {
  if (!fs::exists(p)) return json::object();
  auto bytes = read_file(p);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::io_error, "corrupt manifest " + p.string() + ": " + e.what());
  }
}

json record_to_json(const ipns::IpnsRecord& r) {
  return {{"name", r.name.to_string()},
          {"value", r.value},
          {"sequence", r.sequence},
          {"expires_at_us", to_micros(r.expires_at)},
          {"public_key", to_hex(r.public_key)},
          {"signature", to_hex(r.signature)}};
}

ipns::IpnsRecord record_from_json(const json& j) {
  ipns::IpnsRecord r;
  r.name = Cid::parse(j.at("name").get<std::string>());
  r.value = j.at("value").get<std::string>();
  r.sequence = j.at("sequence").get<std::uint64_t>();
  r.expires_at = from_micros(j.at("expires_at_us").get<std::int64_t>());
  r.public_key = from_hex(j.at("public_key").get<std::string>());
  r.signature = from_hex(j.at("signature").get<std::string>());
  return r;
}

}  // namespace

Repo::Repo(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_ / "blocks", ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + (dir_ / "blocks").string() + ": " + ec.message());
}

Bytes Repo::identity_seed() {
  auto manifest = read_manifest(dir_ / "manifest.json");
  if (manifest.contains("identity_seed")) return from_hex(manifest.at("identity_seed").get<std::string>());
  std::random_device rd;
  Bytes seed(crypto::KeyPair::kSeedSize);
  for (auto& b : seed) b = static_cast<std::uint8_t>(rd());
  manifest["version"] = 1;
  manifest["identity_seed"] = to_hex(seed);
  auto text = manifest.dump(2);
  write_file(dir_ / "manifest.json", ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  return seed;
}

void Repo::load(Node& node) {
  auto manifest = read_manifest(dir_ / "manifest.json");
  std::set<std::string> cached;
  if (manifest.contains("cached"))
    for (const auto& c : manifest.at("cached")) cached.insert(c.get<std::string>());

  auto& store = node.blockstore();
  for (const auto& entry : fs::directory_iterator(dir_ / "blocks")) {
    if (!entry.is_regular_file()) continue;
    auto name = entry.path().filename().string();
    Cid cid;
    try {
      cid = Cid::parse(name);
    } catch (const Error&) {
      continue;
    }
    auto data = read_file(entry.path());
    if (!cid_verify(data, cid)) continue;
    store.put(cid, std::move(data), cached.contains(name) ? Origin::cached : Origin::local, node.now());
  }
  if (manifest.contains("pins"))
    for (const auto& p : manifest.at("pins"))
      node.pins().pin(Cid::parse(p.at("cid").get<std::string>()), p.value("recursive", true));
  if (manifest.contains("reprovide_disabled"))
    for (const auto& c : manifest.at("reprovide_disabled")) node.set_reprovide(Cid::parse(c.get<std::string>()), false);
  if (manifest.contains("share_cache")) node.set_share_cache(manifest.at("share_cache").get<bool>());
  if (manifest.contains("ipns")) {
    const auto& i = manifest.at("ipns");
    std::optional<ipns::IpnsRecord> record;
    if (i.contains("record")) record = record_from_json(i.at("record"));
    node.restore_ipns(i.value("sequence", std::uint64_t{0}), std::move(record));
  }
}

void Repo::save(const Node& node) {
  auto manifest = read_manifest(dir_ / "manifest.json");
  const auto& store = node.blockstore();
  std::set<std::string> present;
  json cached = json::array();
  for (const auto& cid : store.cids()) {
    auto name = cid.to_string();
    present.insert(name);
    const auto* block = store.peek(cid);
    if (block->origin == Origin::cached) cached.push_back(name);
    auto path = dir_ / "blocks" / name;
    if (!fs::exists(path)) write_file(path, block->data);
  }
  for (const auto& entry : fs::directory_iterator(dir_ / "blocks")) {
    if (!present.contains(entry.path().filename().string())) fs::remove(entry.path());
  }
  json pins = json::array();
  for (const auto& [cid, recursive] : node.pins().roots()) pins.push_back({{"cid", cid.to_string()}, {"recursive", recursive}});
  json disabled = json::array();
  for (const auto& cid : node.reprovide_disabled()) disabled.push_back(cid.to_string());

  manifest["version"] = 1;
  manifest["pins"] = pins;
  manifest["cached"] = cached;
  manifest["reprovide_disabled"] = disabled;
  manifest["share_cache"] = node.share_cache();
  json naming{{"sequence", node.ipns_sequence()}};
  if (node.own_ipns_record()) naming["record"] = record_to_json(*node.own_ipns_record());
  manifest["ipns"] = naming;
  auto text = manifest.dump(2);
  write_file(dir_ / "manifest.json", ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace pstore::persist
