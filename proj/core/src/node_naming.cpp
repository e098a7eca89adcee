// SPDX-License-Identifier: Apache-2.0

#include "node_internal.hpp"

namespace pstore {

namespace {

constexpr int kMaxIndirections = 8;
constexpr std::string_view kIpfs = "/ipfs/";
constexpr std::string_view kIpns = "/ipns/";
constexpr std::string_view kDnslink = "dnslink=";

void append_segments(dag::IpfsPath& path, const std::vector<std::string>& extra) {
  path.segments.insert(path.segments.end(), extra.begin(), extra.end());
}

}  // namespace

void Node::ipns_publish(std::string path, Callback<Cid> done) {
  try {
    if (path.starts_with(kIpfs)) {
      dag::IpfsPath::parse(path);
    } else if (!path.starts_with(kIpns) || path.size() == kIpns.size()) {
      throw Error(ErrorCode::invalid_path, path);
    }
  } catch (const Error& e) {
    done(e);
    return;
  }
  const auto now = env_.now();
  own_record_ = ipns::make_record(keys_, std::move(path), ++ipns_sequence_, now + config_.provider_ttl);
  own_record_published_ = now;
  ipns_store_.put(*own_record_, now);
  put_ipns_record(*own_record_, [name = ipns_name(), done = std::move(done)](Result<Unit>) { done(name); });
}

void Node::ipns_resolve(const Cid& name, Callback<dag::IpfsPath> done) {
  resolve_name_path(std::string(kIpns) + name.to_string(), txt_, 0, std::move(done));
}

void Node::dnslink_resolve(std::string domain, Callback<dag::IpfsPath> done) {
  dnslink_resolve(std::move(domain), txt_, 0, std::move(done));
}

void Node::dnslink_resolve(std::string domain, TxtLookup txt, Callback<dag::IpfsPath> done) {
  dnslink_resolve(std::move(domain), std::move(txt), 0, std::move(done));
}

void Node::resolve_name_path(std::string path, Callback<dag::IpfsPath> done) {
  resolve_name_path(std::move(path), txt_, 0, std::move(done));
}

void Node::resolve_name_path(std::string path, TxtLookup txt, int depth, Callback<dag::IpfsPath> done) {
  if (path.starts_with(kIpfs)) {
    try {
      done(dag::IpfsPath::parse(path));
    } catch (const Error& e) {
      done(e);
    }
    return;
  }
  if (!path.starts_with(kIpns)) {
    done(Error(ErrorCode::invalid_path, path));
    return;
  }
  auto rest = std::string_view(path).substr(kIpns.size());
  auto end = rest.find('/');
  std::string name(rest.substr(0, end));
  std::vector<std::string> extra;
  try {
    if (name.empty()) throw Error(ErrorCode::invalid_path, "missing name");
    extra = dag::split_segments(end == std::string_view::npos ? std::string_view{} : rest.substr(end));
  } catch (const Error& e) {
    done(e);
    return;
  }
  if (depth >= kMaxIndirections) {
    done(Error(ErrorCode::recursion_limit, path));
    return;
  }

  auto with_extra = [extra, done](Result<dag::IpfsPath> r) {
    if (!r.ok()) {
      done(r.error());
      return;
    }
    auto p = std::move(r.value());
    append_segments(p, extra);
    done(std::move(p));
  };

  if (name.find('.') != std::string::npos) {
    dnslink_resolve(std::move(name), std::move(txt), depth, std::move(with_extra));
    return;
  }
  Cid cid;
  try {
    cid = Cid::parse(name);
  } catch (const Error& e) {
    done(e);
    return;
  }
  ipns_lookup(cid, [this, txt = std::move(txt), depth, with_extra](Result<ipns::IpnsRecord> record) {
    if (!record.ok()) {
      with_extra(record.error());
      return;
    }
    resolve_name_path(record.value().value, txt, depth + 1, with_extra);
  });
}

void Node::dnslink_resolve(std::string domain, TxtLookup txt, int depth, Callback<dag::IpfsPath> done) {
  if (depth >= kMaxIndirections) {
    done(Error(ErrorCode::recursion_limit, domain));
    return;
  }
  std::vector<std::string> records;
  if (txt) records = txt(domain);
  std::optional<std::string> target;
  bool malformed = false;
  for (const auto& r : records) {
    if (!r.starts_with(kDnslink)) continue;
    auto value = r.substr(kDnslink.size());
    bool ok = false;
    try {
      if (value.starts_with(kIpfs)) {
        dag::IpfsPath::parse(value);
        ok = true;
      } else if (value.starts_with(kIpns)) {
        ok = value.size() > kIpns.size() && value[kIpns.size()] != '/';
      }
    } catch (const Error&) {
    }
    if (ok) {
      target = value;
      break;
    }
    malformed = true;
  }
  if (!target) {
    done(Error(malformed ? ErrorCode::malformed_dnslink : ErrorCode::no_record, domain));
    return;
  }
  resolve_name_path(std::move(*target), std::move(txt), depth + 1, std::move(done));
}

}  // namespace pstore
