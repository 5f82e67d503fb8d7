#pragma once

#include <memory>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "seg/session.hpp"

namespace seg {

struct HttpResult {
  int status = 200;
  nlohmann::json body;
};

/// Transport-independent routing:
///   POST /sessions            create a session
///   POST /sessions/{id}/moves submit the evader move
///   GET  /sessions/{id}       current view
/// Errors come back as {"error": message} with a 4xx status.
HttpResult route_request(SessionManager& sessions, std::string_view method,
                         std::string_view target, const std::string& body);

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  int threads = 1;
  // SIGINT/SIGTERM make wait() return.
  bool handle_signals = false;
};

/// HTTP + WebSocket front end for a SessionManager. WebSocket clients
/// connect to /sessions/{id}/stream; they get the current view on connect
/// and {state, overlays, status} after every turn.
class Server {
 public:
  Server(std::shared_ptr<SessionManager> sessions, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds, starts the worker threads, and returns the bound port.
  unsigned short start();
  // Blocks until stop() is called from another thread or, with
  // handle_signals, until SIGINT/SIGTERM arrives.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace seg
