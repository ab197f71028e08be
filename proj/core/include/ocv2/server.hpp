#pragma once

#include <memory>
#include <string>

#include "ocv2/session.hpp"

namespace ocv2 {

struct ServerOptions {
  std::string host = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::string replay_dir;      // finished episodes are saved here when set
  int poll_ms = 10;            // tick/timeout resolution
};

/// HTTP + WebSocket front end for SessionManager.
///   GET /layouts, GET /schema, POST /sessions, GET /sessions/{id},
///   GET /sessions/{id}/replay, WS /sessions/{id}/ws?seat=N
class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Port actually bound.
  unsigned short port() const;
  SessionManager& sessions();
  /// Serves on the calling thread until stop().
  void run();
  /// Serves on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ocv2
