#include <doctest.h>
#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <thread>

#include "smartpark/artifacts.hpp"
#include "smartpark/errors.hpp"
#include "smartpark/http_server.hpp"
#include "smartpark/service.hpp"
#include "synthetic.hpp"

using namespace smartpark;
using namespace smartpark::service;
using smartpark::testing::Phase;
using smartpark::testing::phase_stream;

namespace fs = std::filesystem;

namespace {

constexpr std::uint32_t kT0 = 1380610800;  // 2013-10-01 07:00 UTC

Bundle reference_bundle() {
  Bundle b;
  b.scheme = {0.12, 0.64};
  b.model = {17.2678, 0.9946};
  return b;
}

ServiceConfig small_config() {
  ServiceConfig c;
  c.spot_count = 100;
  return c;
}

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("smartpark_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const char* name) -> const char* {
    auto it = vars.find(name);
    return it == vars.end() ? nullptr : it->second.c_str();
  };
}

void feed(InfoService& s, const std::vector<codec::UplinkBatch>& batches) {
  const auto bytes = smartpark::testing::encode_all(batches);
  (void)s.ingest(bytes);
}

}  // namespace

TEST_CASE("config precedence: defaults, file, environment") {
  const auto none = env_of({});
  const auto d = load_config(std::nullopt, none);
  CHECK(d.port == 8080);
  CHECK(d.spot_count == 103);
  CHECK_FALSE(d.store_dir.has_value());

  const auto dir = temp_dir("config");
  const auto path = (dir / "serve.yaml").string();
  std::ofstream(path) << "listen: 0.0.0.0:9000\nstaleness_s: 120\nspots: 50\nfresh: true\n";
  const auto f = load_config(path, none);
  CHECK(f.host == "0.0.0.0");
  CHECK(f.port == 9000);
  CHECK(f.staleness_s == 120);
  CHECK(f.spot_count == 50);
  CHECK(f.fresh);

  const auto e = load_config(path, env_of({{"SMARTPARK_PORT", "9100"}, {"SMARTPARK_FRESH", "no"}}));
  CHECK(e.port == 9100);
  CHECK_FALSE(e.fresh);
  CHECK(e.staleness_s == 120);

  std::ofstream(path) << "colour: red\n";
  CHECK_THROWS_AS((void)load_config(path, none), ConfigError);
  CHECK_THROWS_AS((void)load_config(std::nullopt, env_of({{"SMARTPARK_PORT", "http"}})), ConfigError);
  CHECK_THROWS_AS((void)load_config(std::nullopt, env_of({{"SMARTPARK_SPOTS", "0"}})), ConfigError);
  CHECK_THROWS_AS((void)load_config((dir / "missing.yaml").string(), none), ConfigError);
}

TEST_CASE("status is unavailable before data") {
  InfoService s(small_config(), reference_bundle());
  CHECK_THROWS_AS((void)s.status(kT0), UnavailableError);
  // Starting off a boundary, four ticks settle nothing up to the next one.
  feed(s, phase_stream(100, kT0 + 30, {{10, 4}}));
  CHECK_THROWS_AS((void)s.status(kT0 + 150), UnavailableError);
}

TEST_CASE("status colors follow the threshold crossings") {
  InfoService s(small_config(), reference_bundle());
  const std::vector<std::pair<int, thresholds::Color>> steps{
      {0, thresholds::Color::Green},   {12, thresholds::Color::Green},
      {13, thresholds::Color::Orange}, {64, thresholds::Color::Orange},
      {65, thresholds::Color::Red},    {100, thresholds::Color::Red}};
  std::uint32_t epoch = kT0;
  for (const auto& [occupied, color] : steps) {
    auto batches = phase_stream(100, epoch, {{occupied, 20}});
    feed(s, batches);
    epoch += 600;
    const auto snap = s.status(epoch);
    CHECK(snap.r_t == occupied / 100.0);
    CHECK(snap.color == color);
    CHECK(snap.measured_at % 300 == 0);
    CHECK(snap.measured_at >= epoch - 600);
    CHECK(snap.data_age == 30);
    CHECK_FALSE(snap.stale);
  }
  const auto red = s.status(epoch);
  CHECK(red.expected_cruise_minutes == 5);
  CHECK(red.cruise_label == "5 min");
  CHECK(red.r_w_range.low == 0.95);
  CHECK(s.status(epoch + 400).stale);
}

TEST_CASE("a phase stream keeps watchdog history across phases") {
  const auto b = phase_stream(3, kT0, {{1, 2}, {2, 2}});
  REQUIRE(b.size() == 4);
  CHECK_FALSE(b[0].records[0].watchdog);
  CHECK(b[1].records[0].watchdog);
  CHECK(b[2].records[0].watchdog);
  CHECK_FALSE(b[2].records[1].watchdog);
  CHECK(b[3].records[1].watchdog);
}

TEST_CASE("fresh mode reports the latest settled tick") {
  auto c = small_config();
  c.fresh = true;
  InfoService s(c, reference_bundle());
  feed(s, phase_stream(100, kT0, {{50, 6}}));
  const auto snap = s.status(kT0 + 180);
  // The newest tick is still open; the one before it trails by the debounce lag.
  CHECK(snap.measured_at == kT0 + 150 - 30 - 60);
  CHECK(snap.r_t == 0.5);
}

TEST_CASE("duplicate and late frames") {
  InfoService s(small_config(), reference_bundle());
  const auto batches = phase_stream(100, kT0, {{20, 10}});
  const auto bytes = smartpark::testing::encode_all(batches);
  const auto first = s.ingest(bytes);
  CHECK(first.frames == 10);
  CHECK(first.accepted == 1000);
  CHECK_FALSE(first.duplicate());
  const auto again = s.ingest(bytes);
  CHECK(again.accepted == 0);
  CHECK(again.duplicates == 10);
  CHECK(again.duplicate());

  auto late = phase_stream(100, kT0 - 300, {{20, 1}});
  late[0].ap_id = 7;
  const auto ack = s.ingest(codec::encode(late[0]));
  CHECK(ack.late_dropped == 100);
  CHECK(ack.accepted == 0);

  auto bad = codec::encode(batches[0]);
  bad[14] ^= 0x10;
  CHECK_THROWS_AS((void)s.ingest(bad), IntegrityError);
  CHECK_THROWS_AS((void)s.ingest({}), TruncationError);
}

TEST_CASE("series: measured, inferred and errors") {
  auto bundle = reference_bundle();
  InfoService plain(small_config(), bundle);
  feed(plain, phase_stream(100, kT0, {{40, 40}}));
  const auto m = plain.series({kT0, kT0 + 900}, ingest::SeriesSource::TopFloorMeasured);
  REQUIRE(m.values.size() == 3);
  CHECK(m.values[0] == 0.4);
  CHECK_THROWS_AS((void)plain.series({kT0, kT0 + 900}, ingest::SeriesSource::WholeInferred),
                  UnavailableError);
  CHECK_THROWS_AS((void)plain.series({kT0, kT0 + 900}, ingest::SeriesSource::WholeGroundTruth),
                  DomainError);
  CHECK_THROWS_AS((void)plain.series({kT0, kT0 + 7200}, ingest::SeriesSource::TopFloorMeasured),
                  RangeError);

  bundle.quantile_line = analytics::QuantileLine{2.0, 0.5, 0.95};
  InfoService with_line(small_config(), bundle);
  feed(with_line, phase_stream(100, kT0, {{40, 40}}));
  const auto w = with_line.series({kT0, kT0 + 900}, ingest::SeriesSource::WholeInferred);
  CHECK(w.source == ingest::SeriesSource::WholeInferred);
  CHECK(w.values[0] == 1.0);  // 0.5 + 2 * 0.4 clamps to 1
}

TEST_CASE("reload swaps scheme and model together") {
  const auto dir = temp_dir("reload");
  auto c = small_config();
  c.scheme_path = (dir / "scheme.json").string();
  c.model_path = (dir / "model.json").string();

  artifacts::OptimizeRecord rec;
  rec.optimum.scheme = {0.12, 0.64};
  artifacts::write_scheme(rec, c.scheme_path);
  artifacts::ModelRecord mrec;
  mrec.model = {17.2678, 0.9946};
  mrec.display = cruise::display_times(mrec.model);
  artifacts::write_model(mrec, c.model_path);

  InfoService s(c);
  CHECK(s.bundle()->version == 1);
  CHECK(s.bundle()->display.minutes_high == 5);

  rec.optimum.scheme = {0.2, 0.5};
  artifacts::write_scheme(rec, c.scheme_path);
  CHECK(s.reload() == 2);
  CHECK(s.bundle()->scheme.delta1 == 0.2);

  artifacts::write_text("{ not json", c.scheme_path);
  CHECK_THROWS((void)s.reload());
  CHECK(s.bundle()->version == 2);
  CHECK(s.bundle()->scheme.delta2 == 0.5);
}

TEST_CASE("store directory receives the event log") {
  const auto dir = temp_dir("store");
  auto c = small_config();
  c.store_dir = dir.string();
  {
    InfoService s(c, reference_bundle());
    feed(s, phase_stream(100, kT0, {{3, 10}}));
  }
  CHECK(fs::exists(dir / "events.log"));
  CHECK(fs::file_size(dir / "events.log") > 0);
  CHECK(fs::exists(dir / "events-2013-10-01.csv"));
}

TEST_CASE("http endpoints") {
  InfoService s(small_config(), reference_bundle());
  HttpServer server(s, [] { return UnixSeconds{kT0 + 1200}; });
  const int port = server.bind_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  auto r = cli.Get("/status");
  REQUIRE(r);
  CHECK(r->status == 503);
  CHECK(nlohmann::json::parse(r->body)["error"] == "service-unavailable");

  const auto bytes = smartpark::testing::encode_all(phase_stream(100, kT0, {{12, 20}, {13, 20}}));
  const std::string body(bytes.begin(), bytes.end());
  r = cli.Post("/ingest", body, "application/octet-stream");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(nlohmann::json::parse(r->body)["accepted"] == 4000);
  r = cli.Post("/ingest", body, "application/octet-stream");
  CHECK(nlohmann::json::parse(r->body)["accepted"] == 0);
  CHECK(nlohmann::json::parse(r->body)["duplicate"] == true);

  r = cli.Post("/ingest", std::string("\x53\x50\x01", 3), "application/octet-stream");
  CHECK(r->status == 400);
  CHECK(nlohmann::json::parse(r->body)["error"] == "truncation");

  r = cli.Get("/status");
  REQUIRE(r->status == 200);
  auto j = nlohmann::json::parse(r->body);
  CHECK(j["color"] == "orange");
  CHECK(j["r_t"] == 0.13);
  CHECK(j["as_of"] == kT0 + 1200);
  CHECK(j["expected_cruise_minutes"] == 2);

  r = cli.Get("/status?now=" + std::to_string(kT0 + 5000));
  CHECK(nlohmann::json::parse(r->body)["stale"] == true);

  r = cli.Get("/series?from=" + std::to_string(kT0) + "&to=" + std::to_string(kT0 + 600));
  REQUIRE(r->status == 200);
  j = nlohmann::json::parse(r->body);
  CHECK(j["source"] == "top-floor-measured");
  CHECK(j["series"].size() == 2);
  CHECK(j["series"][0]["r"] == 0.12);

  r = cli.Get("/series?from=" + std::to_string(kT0) + "&to=" + std::to_string(kT0 + 86400));
  CHECK(r->status == 416);
  CHECK(nlohmann::json::parse(r->body).contains("covered"));
  r = cli.Get("/series?from=1");
  CHECK(r->status == 400);

  r = cli.Post("/admin/reload", "", "text/plain");
  CHECK(r->status == 500);  // default scheme.json does not exist here
  CHECK(s.bundle()->version == 1);

  server.stop();
  t.join();
}
