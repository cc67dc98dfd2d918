#include "smartpark/http_server.hpp"

#include <httplib.h>

#include <chrono>
#include <json.hpp>

#include "smartpark/errors.hpp"

namespace smartpark::service {
namespace {

using nlohmann::ordered_json;

int http_status(const Error& e) {
  if (dynamic_cast<const UnavailableError*>(&e) != nullptr) return 503;
  if (dynamic_cast<const RangeError*>(&e) != nullptr) return 416;
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return 500;
  return 400;
}

void send_error(httplib::Response& res, int status, const std::string& kind,
                const std::string& message, ordered_json extra = {}) {
  ordered_json j{{"error", kind}, {"message", message}};
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

}  // namespace

std::string status_json(const StatusSnapshot& s) {
  ordered_json j;
  j["as_of"] = s.as_of;
  j["measured_at"] = s.measured_at;
  j["r_t"] = s.r_t;
  j["color"] = thresholds::to_string(s.color);
  j["r_w_range"] = {s.r_w_range.low, s.r_w_range.high};
  j["expected_cruise_minutes"] = s.expected_cruise_minutes;
  j["cruise_label"] = s.cruise_label;
  j["data_age"] = s.data_age;
  j["stale"] = s.stale;
  j["bundle_version"] = s.bundle_version;
  return j.dump();
}

std::string series_json(const ingest::OccupancySeries& s) {
  ordered_json arr = ordered_json::array();
  for (std::size_t i = 0; i < s.windows.size(); ++i) {
    arr.push_back(ordered_json{{"window_start", s.windows[i]}, {"r", s.values[i]}});
  }
  return ordered_json{{"source", ingest::to_string(s.source)}, {"series", arr}}.dump();
}

std::string ack_json(const Ack& a) {
  return ordered_json{{"frames", a.frames},
                      {"accepted", a.accepted},
                      {"duplicate", a.duplicate()},
                      {"duplicates", a.duplicates},
                      {"late_dropped", a.late_dropped},
                      {"events", a.events}}
      .dump();
}

HttpServer::HttpServer(InfoService& service, Clock clock)
    : service_(service), clock_(std::move(clock)), server_(std::make_unique<httplib::Server>()) {
  if (!clock_) {
    clock_ = [] {
      return std::chrono::duration_cast<std::chrono::seconds>(
                 std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
  }
  auto guarded = [](auto handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const Error& e) {
        send_error(res, http_status(e), e.kind(), e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  };

  // Statuses raised by httplib itself (404, 413, ...) still get a JSON body.
  server_->set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    send_error(res, res.status, "http", std::string(httplib::status_message(res.status)) + ": " +
                                            req.method + " " + req.path);
  });

  server_->Get("/status", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const UnixSeconds now = req.has_param("now") ? parse_time(req.get_param_value("now")) : clock_();
    res.set_content(status_json(service_.status(now)), "application/json");
  }));

  server_->Get("/series", guarded([this](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("from") || !req.has_param("to")) {
      throw DomainError("series needs 'from' and 'to' query parameters");
    }
    const TimeRange range{parse_time(req.get_param_value("from")),
                          parse_time(req.get_param_value("to"))};
    const auto source = req.has_param("source")
                            ? ingest::parse_series_source(req.get_param_value("source"))
                            : ingest::SeriesSource::TopFloorMeasured;
    try {
      res.set_content(series_json(service_.series(range, source)), "application/json");
    } catch (const RangeError& e) {
      ordered_json extra;
      if (const auto cov = service_.covered()) extra["covered"] = {cov->first, cov->second};
      send_error(res, 416, e.kind(), e.what(), extra);
    }
  }));

  server_->Post("/ingest", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::span<const std::uint8_t> body(
        reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size());
    res.set_content(ack_json(service_.ingest(body)), "application/json");
  }));

  server_->Post("/admin/reload", guarded([this](const httplib::Request&, httplib::Response& res) {
    service_.reload();
    const auto b = service_.bundle();
    res.set_content(ordered_json{{"bundle_version", b->version},
                                 {"delta1", b->scheme.delta1},
                                 {"delta2", b->scheme.delta2},
                                 {"alpha", b->model.alpha},
                                 {"beta", b->model.beta}}
                        .dump(),
                    "application/json");
  }));
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) { return server_->listen(host, port); }

int HttpServer::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool HttpServer::listen_after_bind() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace smartpark::service
