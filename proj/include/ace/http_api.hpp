#pragma once

// HTTP+JSON surface of the coach service.
//
//   POST /sessions                      {"scenario_id","condition","seed"}
//   GET  /sessions/{id}
//   POST /sessions/{id}/preparation     {"walk_away","target","planned_opening"}
//   POST /sessions/{id}/messages        {"text"}
//   GET  /sessions/{id}/feedback
//   POST /sessions/{id}/reflection      {"answers":[...]}
//   POST /sessions/{id}/second-trial
//   GET  /scenarios
//   POST /assignments
//   GET  /healthz
//
// Errors are {"error":{"code","message"}} with the library error code.

#include "ace/service.hpp"

#include <memory>
#include <string>

namespace ace {

struct HttpResult {
  int status = 200;
  std::string body;
};

/// Transport-independent routing; the server below is a thin adapter.
HttpResult dispatch(CoachService &service, const std::string &method, const std::string &path,
                    const std::string &body);

int http_status_for(const std::string &error_code);

class HttpServer {
public:
  explicit HttpServer(CoachService &service);
  ~HttpServer();

  /// Binds and returns the port (pass 0 for an ephemeral port); -1 on failure.
  int bind(const std::string &host, int port);
  /// Blocks until stop().
  bool serve();
  void stop();
  void wait_until_ready() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace ace
