// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "pstore/node.hpp"
#include "pstore/simnet.hpp"

namespace pstore::gateway {

struct GatewayConfig {
  std::string listen_address = "127.0.0.1:8080";  // host:port; port 0 picks a free one
  SimDuration request_timeout = 60s;
};

struct Response {
  int status = 500;
  std::string content_type = "text/plain";
  std::string body;
  std::string cid;  // resolved root, set on success
};

// Total mapping from node-layer errors to HTTP status codes.
int status_for(ErrorCode code);

/// Where the gateway gets content from. Implementations serialize access
/// to the node they front.
class ContentBackend {
 public:
  virtual ~ContentBackend() = default;
  virtual Result<Content> get(const std::string& path, SimDuration timeout) = 0;
};

/// Fronts one simulator node. Each request drives the simulator until the
/// retrieval finishes or `timeout` of simulated time passes.
class SimBackend final : public ContentBackend {
 public:
  SimBackend(sim::Simulator& sim, sim::NodeIndex node) : sim_(sim), node_(node) {}
  Result<Content> get(const std::string& path, SimDuration timeout) override;

 private:
  std::mutex mu_;
  sim::Simulator& sim_;
  sim::NodeIndex node_;
};

class Gateway {
 public:
  Gateway(ContentBackend& backend, GatewayConfig config) : backend_(backend), config_(std::move(config)) {}

  // Concurrent GETs of the same path share one retrieval.
  Response handle_get(const std::string& path);

  const GatewayConfig& config() const { return config_; }
  std::uint64_t requests() const { return requests_; }
  std::uint64_t coalesced() const { return coalesced_; }
  std::uint64_t retrievals() const { return retrievals_; }

 private:
  Response retrieve(const std::string& path);

  ContentBackend& backend_;
  GatewayConfig config_;
  std::mutex mu_;
  std::map<std::string, std::shared_future<Response>> in_flight_;
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> coalesced_{0};
  std::atomic<std::uint64_t> retrievals_{0};
};

/// HTTP/1.1 front end. Routes GET /ipfs/... and /ipns/... to a Gateway.
class Server {
 public:
  explicit Server(Gateway& gateway);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts serving on a background thread. Throws address-in-use
  // or invalid-argument.
  void start();
  int port() const { return port_; }
  const std::string& host() const { return host_; }
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();
  // Stops accepting and drains in-flight requests.
  void stop();

 private:
  struct Impl;
  Gateway& gateway_;
  std::unique_ptr<Impl> impl_;
  std::string host_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace pstore::gateway
