#pragma once

#include <functional>
#include <memory>
#include <string>

#include "smartpark/service.hpp"

namespace httplib {
class Server;
}

namespace smartpark::service {

/// HTTP front end:
///   GET  /status[?now=<unix>]
///   GET  /series?from=<t>&to=<t>&source=top-floor-measured|whole-inferred
///   POST /ingest        body: one or more wire frames (application/octet-stream)
///   POST /admin/reload
/// Errors are JSON {"error": <kind>, "message": ...}.
class HttpServer {
public:
  using Clock = std::function<UnixSeconds()>;

  explicit HttpServer(InfoService& service, Clock clock = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Blocks until stop().
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it; serve with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

private:
  InfoService& service_;
  Clock clock_;
  std::unique_ptr<httplib::Server> server_;
};

/// JSON bodies, exposed for tests and the Python binding.
std::string status_json(const StatusSnapshot& s);
std::string series_json(const ingest::OccupancySeries& s);
std::string ack_json(const Ack& a);

}  // namespace smartpark::service
