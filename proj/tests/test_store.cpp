#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "smartpark/errors.hpp"
#include "smartpark/store.hpp"

using namespace smartpark;
using namespace smartpark::ingest;

namespace {

constexpr UnixSeconds kT0 = 1380600000;  // on the 300 s grid

// Builds reports on consecutive ticks from a compact script:
// 'O'/'V' valid occupied/vacant, 'o'/'v' watchdog-0, '.' missing.
std::vector<Report> script(const std::string& s, UnixSeconds offset = 2) {
  std::vector<Report> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '.') continue;
    const UnixSeconds tick = kT0 + 30 * static_cast<UnixSeconds>(i);
    out.push_back({tick, tick + offset, c == 'O' || c == 'o', c == 'O' || c == 'V'});
  }
  return out;
}

std::string cells(const CleanedTimeline& t) {
  std::string s;
  for (auto c : t.cells) s += c == CellState::Occupied ? 'O' : c == CellState::Vacant ? 'V' : '?';
  return s;
}

codec::UplinkBatch batch(UnixSeconds epoch, std::vector<bool> states, bool watchdog = true) {
  codec::UplinkBatch b;
  b.batch_epoch = static_cast<std::uint32_t>(epoch);
  b.ap_id = 1;
  for (std::size_t i = 0; i < states.size(); ++i) {
    b.records.push_back({static_cast<std::uint16_t>(i), 1, states[i], watchdog});
  }
  return b;
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("smartpark_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("debounce registers a change and dates it back") {
  const auto t = filter_and_impute(script("VVVoOOOO"), 30);
  // 'o' at index 3 opens the occupied run; it registers at index 5.
  CHECK(cells(t) == "VVVOOOOO");
  REQUIRE(t.events.size() == 1);
  CHECK(t.events[0].previous_timestamp == kT0 + 2);
  CHECK(t.events[0].current_timestamp == kT0 + 90 + 2);
  CHECK_FALSE(t.events[0].original_status);
  CHECK(t.events[0].updated_status);
}

TEST_CASE("watchdog-0 flicker never registers") {
  const auto t = filter_and_impute(script("VVovovovovVV"), 30);
  CHECK(cells(t) == "VVVVVVVVVVVV");
  CHECK(t.events.empty());
}

TEST_CASE("a contradicting report restarts the run") {
  const auto t = filter_and_impute(script("VVOVOOO"), 30);
  CHECK(cells(t) == "VVVVOOO");
  REQUIRE(t.events.size() == 1);
  CHECK(t.events[0].current_timestamp == kT0 + 4 * 30 + 2);
}

TEST_CASE("gaps are carried forward up to the limit, then unknown") {
  const auto t = filter_and_impute(script("VOO...O....OO"), 30);
  CHECK(cells(t) == "VOOOOOOOOO?OO");
}

TEST_CASE("backdating never overwrites unknown cells") {
  const auto t = filter_and_impute(script("VV....oOO"), 30);
  CHECK(cells(t) == "VVVVV?OOO");
  REQUIRE(t.events.size() == 1);
  CHECK(t.events[0].previous_timestamp == kT0 + 2);
}

TEST_CASE("events are a faithful change log: replaying them rebuilds the timeline") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    // Sensor-like sequence: each state held >= 3 reports, first report of a
    // new state flagged watchdog 0, occasional single dropouts once a run has
    // registered.
    std::string s;
    char state = 'V';
    while (s.size() < 200) {
      const int hold = 3 + static_cast<int>(rng() % 10);
      for (int k = 0; k < hold; ++k) {
        if (k >= 3 && rng() % 15 == 0) {
          s += '.';
        } else {
          s += (k == 0 && !s.empty()) ? static_cast<char>(std::tolower(state)) : state;
        }
      }
      state = state == 'V' ? 'O' : 'V';
    }
    while (s.back() == '.') s.pop_back();
    const auto reports = script(s);
    const auto t = filter_and_impute(reports, 30);
    REQUIRE(t.cells.size() == s.size());

    // Oracle 1: with these guarantees the cleaned state is the true state.
    char truth = 'V';
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] != '.') truth = static_cast<char>(std::toupper(s[i]));
      CHECK(cells(t)[i] == truth);
    }
    // Oracle 2: replay of the event log.
    bool replay = false;
    std::size_t e = 0;
    for (std::size_t i = 0; i < t.cells.size(); ++i) {
      const UnixSeconds ts = kT0 + 30 * static_cast<UnixSeconds>(i) + 2;
      while (e < t.events.size() && t.events[e].current_timestamp <= ts) {
        CHECK(t.events[e].original_status == replay);
        if (e > 0) CHECK(t.events[e].previous_timestamp == t.events[e - 1].current_timestamp);
        replay = t.events[e].updated_status;
        ++e;
      }
      CHECK((t.cells[i] == CellState::Occupied) == replay);
    }
  }
}

TEST_CASE("store: duplicates, grid and lateness") {
  Store store({.report_period = 30, .lateness_bound = 60});
  CHECK(store.ingest(batch(kT0, {true, false})).accepted_records == 2);
  const auto again = store.ingest(batch(kT0, {true, false}));
  CHECK(again.duplicate);
  CHECK(again.accepted_records == 0);
  CHECK_THROWS_AS(store.ingest(batch(kT0 + 7, {true})), DomainError);
  store.ingest(batch(kT0 + 120, {true, false}));
  // Within the lateness bound: accepted out of order.
  CHECK(store.ingest(batch(kT0 + 60, {true, false})).accepted_records == 2);
  CHECK_THROWS_AS(store.ingest(batch(kT0 + 30, {true, false})), LateDataError);
  store.flush();
  CHECK_THROWS_AS(store.ingest(batch(kT0 + 150, {true, false})), LateDataError);
}

TEST_CASE("store: settled range and occupancy over known sensors") {
  Store store;
  // Sensor 0 occupied, 1 vacant, 2 silent after the first 5 minutes.
  for (int k = 0; k <= 30; ++k) {
    std::vector<bool> st{true, false, false};
    auto b = batch(kT0 + 30 * k, st);
    if (k >= 10) b.records.pop_back();
    store.ingest(b);
  }
  const auto cov = store.covered();
  REQUIRE(cov);
  CHECK(cov->first == kT0);
  CHECK(cov->second == kT0 + 600);
  CHECK(*store.settled_through() == kT0 + 29 * 30 - 60);

  const std::vector<std::uint16_t> spots{0, 1, 2};
  const auto s = store.occupancy_series(spots, {kT0, kT0 + 601});
  REQUIRE(s.values.size() == 3);
  CHECK(s.values[0] == doctest::Approx(1.0 / 3.0));
  CHECK(s.values[1] == doctest::Approx(1.0 / 3.0));  // sensor 2 still carried forward
  CHECK(s.values[2] == doctest::Approx(1.0 / 2.0));  // now unknown, not vacant

  CHECK_THROWS_AS((void)store.occupancy_series(spots, {kT0 + 600, kT0}), RangeError);
  CHECK_THROWS_AS((void)store.occupancy_series(spots, {kT0, kT0 + 1200}), RangeError);
  CHECK_THROWS_AS((void)store.occupancy_series(spots, {kT0 - 300, kT0 + 1}), RangeError);
  CHECK_THROWS_AS((void)store.occupancy_series({}, {kT0, kT0 + 1}), DomainError);
  const std::vector<std::uint16_t> silent{2};
  CHECK_THROWS_AS((void)store.occupancy_series(silent, {kT0 + 600, kT0 + 601}), RangeError);

  store.flush();
  CHECK(store.covered()->second == kT0 + 900);
}

TEST_CASE("store: events persisted as log and daily CSV") {
  const auto dir = fresh_dir("persist");
  {
    StoreOptions o;
    o.directory = dir.string();
    Store store(o);
    store.ingest(batch(kT0, {false}));
    store.ingest(batch(kT0 + 30, {false}));
    store.ingest(batch(kT0 + 60, {true}, false));
    store.ingest(batch(kT0 + 90, {true}));
    store.ingest(batch(kT0 + 120, {true}));
    store.flush();
    REQUIRE(store.events().size() == 1);
  }
  std::ifstream log(dir / "events.log");
  std::stringstream ss;
  ss << log.rdbuf();
  const std::string expect = "0," + std::to_string(kT0 + 1) + "," + std::to_string(kT0 + 61) + ",0,1\n";
  CHECK(ss.str() == expect);
  std::ifstream daily(dir / "events-2013-10-01.csv");
  std::stringstream ds;
  ds << daily.rdbuf();
  CHECK(ds.str() == expect);
  std::filesystem::remove_all(dir);
}

TEST_CASE("series source names") {
  CHECK(parse_series_source("whole-inferred") == SeriesSource::WholeInferred);
  CHECK(to_string(SeriesSource::TopFloorMeasured) == "top-floor-measured");
  CHECK_THROWS_AS(parse_series_source("nope"), ParseError);
}
