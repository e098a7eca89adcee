// SPDX-License-Identifier: Apache-2.0

#include "pstore/gateway.hpp"

#include <httplib.h>

namespace pstore::gateway {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_path:
    case ErrorCode::invalid_character:
    case ErrorCode::truncated_multihash:
    case ErrorCode::unknown_code:
    case ErrorCode::unsupported_code:
    case ErrorCode::length_mismatch:
    case ErrorCode::unsupported_digest:
    case ErrorCode::is_a_directory:
    case ErrorCode::invalid_name:
    case ErrorCode::malformed_dnslink:
      return 400;
    case ErrorCode::segment_not_found:
    case ErrorCode::not_a_directory:
    case ErrorCode::no_record:
      return 404;
    case ErrorCode::not_found:
    case ErrorCode::timeout:
    case ErrorCode::no_known_peers:
    case ErrorCode::invalid_signature:
    case ErrorCode::fetch_failure:
    case ErrorCode::missing_block:
    case ErrorCode::recursion_limit:
      return 504;
    default:
      return 500;
  }
}

Result<Content> SimBackend::get(const std::string& path, SimDuration timeout) {
  std::lock_guard lock(mu_);
  auto& node = sim_.node(node_);
  return sim_.await<Content>([&](Callback<Content> cb) { node.get(path, std::move(cb)); }, timeout);
}

Response Gateway::retrieve(const std::string& path) {
  ++retrievals_;
  Response r;
  auto content = backend_.get(path, config_.request_timeout);
  if (!content.ok()) {
    r.status = status_for(content.error().code());
    r.body = std::string(content.error().what()) + "\n";
    return r;
  }
  r.status = 200;
  r.content_type = "application/octet-stream";
  r.cid = content.value().cid.to_string();
  r.body.assign(content.value().data.begin(), content.value().data.end());
  return r;
}

Response Gateway::handle_get(const std::string& path) {
  ++requests_;
  if (!path.starts_with("/ipfs/") && !path.starts_with("/ipns/")) {
    return Response{400, "text/plain", "invalid-path: expected /ipfs/ or /ipns/\n", {}};
  }
  std::shared_future<Response> shared;
  std::promise<Response> promise;
  bool owner = false;
  {
    std::lock_guard lock(mu_);
    auto it = in_flight_.find(path);
    if (it != in_flight_.end()) {
      shared = it->second;
      ++coalesced_;
    } else {
      shared = promise.get_future().share();
      in_flight_.emplace(path, shared);
      owner = true;
    }
  }
  if (owner) {
    Response r;
    try {
      r = retrieve(path);
    } catch (const Error& e) {
      r = Response{status_for(e.code()), "text/plain", std::string(e.what()) + "\n", {}};
    } catch (const std::exception& e) {
      r = Response{500, "text/plain", std::string("internal: ") + e.what() + "\n", {}};
    }
    promise.set_value(r);
    std::lock_guard lock(mu_);
    in_flight_.erase(path);
  }
  return shared.get();
}

struct Server::Impl {
  httplib::Server http;
};

Server::Server(Gateway& gateway) : gateway_(gateway), impl_(std::make_unique<Impl>()) {
  // No SO_REUSEPORT: a second server on a taken port must fail to bind.
  impl_->http.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  impl_->http.Get(R"(/(ipfs|ipns)/.*)", [this](const httplib::Request& req, httplib::Response& res) {
    auto r = gateway_.handle_get(req.path);
    res.status = r.status;
    if (!r.cid.empty()) res.set_header("X-Content-Cid", r.cid);
    res.set_content(std::move(r.body), r.content_type);
  });
}

Server::~Server() { stop(); }

void Server::start() {
  const auto& address = gateway_.config().listen_address;
  auto colon = address.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::invalid_argument, "listen address must be host:port");
  host_ = address.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(address.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::invalid_argument, "bad port in " + address);
  }
  if (port < 0 || port > 65535) throw Error(ErrorCode::invalid_argument, "bad port in " + address);
  if (port == 0) {
    port_ = impl_->http.bind_to_any_port(host_);
    if (port_ < 0) throw Error(ErrorCode::address_in_use, address);
  } else {
    if (!impl_->http.bind_to_port(host_, port)) throw Error(ErrorCode::address_in_use, address);
    port_ = port;
  }
  thread_ = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
}

void Server::wait() {
  if (thread_.joinable()) thread_.join();
}

void Server::stop() {
  if (impl_) impl_->http.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace pstore::gateway
