// Change-point ingestion store.
//
// Uplink batches are reduced to per-sensor cleaned state timelines sampled on
// the report tick grid, and each registered status transition is persisted as
// a ChangeEvent row. Cleaning rules, per sensor:
//
//  * reports with watchdog 0 never decide a state;
//  * a new state registers once it has been seen in `debounce_reports`
//    valid reports with no contradicting report in between, and is then
//    dated back to the first report of that run;
//  * up to `gap_limit_reports` missing reports are filled with the last
//    registered state; beyond that the sensor is unknown until it reports
//    again and is left out of occupancy denominators.
#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smartpark/codec.hpp"
#include "smartpark/time_util.hpp"

namespace smartpark::ingest {

enum class CellState : std::uint8_t { Vacant = 0, Occupied = 1, Unknown = 2 };

/// One persisted status transition. `previous_timestamp` is the time of the
/// sensor's previous registered change (or its first report when there was none).
struct ChangeEvent {
  std::uint16_t sensor_id{0};
  UnixSeconds previous_timestamp{0};
  UnixSeconds current_timestamp{0};
  bool original_status{false};
  bool updated_status{false};

  friend bool operator==(const ChangeEvent&, const ChangeEvent&) = default;
};

/// `sensor_id,prev_ts,cur_ts,orig,updated`
std::string format_event(const ChangeEvent& e);

struct CleanOptions {
  int debounce_reports{2};
  int gap_limit_reports{3};
};

/// A present report on the tick grid. `timestamp` is tick + record offset.
struct Report {
  UnixSeconds tick{0};
  UnixSeconds timestamp{0};
  bool state{false};
  bool watchdog{false};
};

/// Incremental cleaner for one sensor, fed one tick at a time.
class SensorCleaner {
public:
  explicit SensorCleaner(CleanOptions options = {}) : options_(options) {}

  /// Appends the cell for the next tick to `timeline` and possibly rewrites
  /// earlier cells when a change registers retroactively. Returns the
  /// transition registered at this tick, if any.
  std::optional<ChangeEvent> step(const std::optional<Report>& report,
                                  std::vector<CellState>& timeline);

  [[nodiscard]] bool registered() const noexcept { return registered_; }

private:
  CleanOptions options_;
  bool seen_any_{false};
  bool registered_{false};
  UnixSeconds registered_since_{0};
  int missing_{0};
  bool run_state_{false};
  bool run_open_{false};
  std::size_t run_start_index_{0};
  UnixSeconds run_start_ts_{0};
  int run_valid_{0};
};

struct CleanedTimeline {
  UnixSeconds first_tick{0};
  UnixSeconds period{30};
  std::vector<CellState> cells;     // one per tick from first_tick
  std::vector<ChangeEvent> events;  // sensor_id left 0
};

/// Batch form of the cleaner over one sensor's reports (sorted by tick).
/// The output covers every tick from the first report to the last one.
CleanedTimeline filter_and_impute(std::span<const Report> reports, UnixSeconds period,
                                  CleanOptions options = {});

enum class SeriesSource { TopFloorMeasured, WholeGroundTruth, WholeInferred };

std::string to_string(SeriesSource s);
SeriesSource parse_series_source(const std::string& text);

struct OccupancySeries {
  SeriesSource source{SeriesSource::TopFloorMeasured};
  std::vector<UnixSeconds> windows;  // 5-minute aligned, strictly increasing, gap-free
  std::vector<double> values;        // in [0, 1]
};

/// `window_start,r` rows.
void write_series_csv(const OccupancySeries& series, const std::string& path);

struct StoreOptions {
  UnixSeconds report_period{30};
  // Batches whose epoch trails the newest epoch by more than this are dropped.
  UnixSeconds lateness_bound{0};
  CleanOptions clean{};
  // When set, events are appended to <directory>/events.log and to one
  // <directory>/events-YYYY-MM-DD.csv per calendar date (UTC).
  std::optional<std::string> directory;
};

struct IngestResult {
  std::vector<ChangeEvent> events;
  std::size_t accepted_records{0};
  bool duplicate{false};
};

class Store {
public:
  explicit Store(StoreOptions options = {});
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;
  Store(Store&&) noexcept;
  Store& operator=(Store&&) noexcept;

  /// Idempotent per (ap_id, batch_epoch). Throws LateDataError for a batch
  /// older than the watermark minus the lateness bound, DomainError for an
  /// epoch off the report grid.
  IngestResult ingest(const codec::UplinkBatch& batch);

  /// Finalizes every pending tick; call at end of input.
  std::vector<ChangeEvent> flush();

  /// Occupancy at each 5-minute boundary in [range.start, range.end):
  /// occupied / known over `spot_set`. Throws DomainError for an empty spot
  /// set and RangeError for boundaries outside covered().
  [[nodiscard]] OccupancySeries occupancy_series(std::span<const std::uint16_t> spot_set,
                                                 TimeRange range) const;

  /// Settled 5-minute boundaries as [first, last] (inclusive), if any.
  [[nodiscard]] std::optional<std::pair<UnixSeconds, UnixSeconds>> covered() const;

  /// Latest tick whose cleaned cells can no longer change.
  [[nodiscard]] std::optional<UnixSeconds> settled_through() const;
  [[nodiscard]] std::optional<UnixSeconds> latest_epoch() const;
  [[nodiscard]] CellState state_at(std::uint16_t sensor_id, UnixSeconds tick) const;
  [[nodiscard]] const std::vector<ChangeEvent>& events() const noexcept { return events_; }
  [[nodiscard]] const StoreOptions& options() const noexcept { return options_; }
  [[nodiscard]] std::optional<UnixSeconds> origin() const noexcept { return origin_; }
  [[nodiscard]] std::size_t finalized_ticks() const noexcept { return finalized_; }

private:
  struct Track {
    SensorCleaner cleaner;
    std::vector<CellState> timeline;
  };

  std::vector<ChangeEvent> finalize_through(UnixSeconds tick);
  void finalize_tick(UnixSeconds tick, std::vector<ChangeEvent>& out);
  void persist(const ChangeEvent& e);
  void close_files();

  StoreOptions options_;
  std::set<std::pair<std::uint16_t, UnixSeconds>> seen_batches_;
  std::map<UnixSeconds, std::map<std::uint16_t, Report>> pending_;  // tick -> sensor -> report
  std::map<std::uint16_t, Track> tracks_;
  std::optional<UnixSeconds> origin_;
  std::optional<UnixSeconds> watermark_;
  std::size_t finalized_{0};
  bool flushed_{false};
  std::vector<ChangeEvent> events_;
  std::FILE* log_{nullptr};
  std::FILE* daily_{nullptr};
  std::string daily_date_;
};

}  // namespace smartpark::ingest
