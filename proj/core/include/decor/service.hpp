#pragma once

#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "decor/router.hpp"

namespace decor {

/// HTTP facade over a RoutingEngine: POST /route plus the introspection
/// endpoints. Requests are fully isolated; the engine snapshot is
/// immutable for the lifetime of the service.
class RouterService {
 public:
  explicit RouterService(std::shared_ptr<const RoutingEngine> engine);
  ~RouterService();

  RouterService(const RouterService&) = delete;
  RouterService& operator=(const RouterService&) = delete;

  /// Optional reachability check surfaced by /health; defaults to
  /// always-healthy, which fits deterministic in-process backends.
  void set_backend_probe(std::function<bool()> probe);

  /// Binds and serves on a background thread. With port 0 an ephemeral
  /// port is chosen; the bound port is returned.
  int start(const std::string& host, int port);
  void stop();

  int port() const { return port_; }

  struct Response {
    int status = 200;
    std::string body;  // JSON
  };

  // Handler cores, exposed so tests can exercise them without a socket.
  Response handle_route(const std::string& body) const;
  Response handle_health() const;
  Response handle_config() const;
  Response handle_models() const;

 private:
  std::shared_ptr<const RoutingEngine> engine_;
  std::function<bool()> probe_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread server_thread_;
  int port_ = 0;
};

}  // namespace decor
