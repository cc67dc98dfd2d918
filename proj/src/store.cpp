#include "smartpark/store.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>

#include "smartpark/errors.hpp"

namespace smartpark::ingest {

std::string format_event(const ChangeEvent& e) {
  return std::to_string(e.sensor_id) + "," + std::to_string(e.previous_timestamp) + "," +
         std::to_string(e.current_timestamp) + "," + (e.original_status ? "1" : "0") + "," +
         (e.updated_status ? "1" : "0");
}

std::optional<ChangeEvent> SensorCleaner::step(const std::optional<Report>& report,
                                               std::vector<CellState>& timeline) {
  const std::size_t index = timeline.size();
  auto registered_cell = [this] { return registered_ ? CellState::Occupied : CellState::Vacant; };

  if (!report) {
    ++missing_;
    const bool fill = seen_any_ && missing_ <= options_.gap_limit_reports;
    timeline.push_back(fill ? registered_cell() : CellState::Unknown);
    return std::nullopt;
  }

  if (!seen_any_) {
    seen_any_ = true;
    registered_since_ = report->timestamp;
  }
  missing_ = 0;

  if (!run_open_ || report->state != run_state_) {
    run_open_ = true;
    run_state_ = report->state;
    run_start_index_ = index;
    run_start_ts_ = report->timestamp;
    run_valid_ = 0;
  }
  if (report->watchdog) ++run_valid_;

  std::optional<ChangeEvent> change;
  if (run_state_ != registered_ && run_valid_ >= options_.debounce_reports) {
    change = ChangeEvent{0, registered_since_, run_start_ts_, registered_, run_state_};
    registered_ = run_state_;
    registered_since_ = run_start_ts_;
    const auto cell = registered_cell();
    for (std::size_t i = run_start_index_; i < index; ++i) {
      if (timeline[i] != CellState::Unknown) timeline[i] = cell;
    }
  }
  timeline.push_back(registered_cell());
  return change;
}

CleanedTimeline filter_and_impute(std::span<const Report> reports, UnixSeconds period,
                                  CleanOptions options) {
  if (period <= 0) throw DomainError("report period must be positive");
  CleanedTimeline out;
  out.period = period;
  if (reports.empty()) return out;
  out.first_tick = reports.front().tick;
  SensorCleaner cleaner(options);
  std::size_t i = 0;
  for (UnixSeconds tick = out.first_tick; tick <= reports.back().tick; tick += period) {
    std::optional<Report> here;
    while (i < reports.size() && reports[i].tick < tick + period) {
      if (reports[i].tick >= tick) here = reports[i];  // last report in the slot wins
      ++i;
    }
    if (auto e = cleaner.step(here, out.cells)) out.events.push_back(*e);
  }
  return out;
}

std::string to_string(SeriesSource s) {
  switch (s) {
    case SeriesSource::TopFloorMeasured:
      return "top-floor-measured";
    case SeriesSource::WholeGroundTruth:
      return "whole-ground-truth";
    case SeriesSource::WholeInferred:
      return "whole-inferred";
  }
  return "unknown";
}

SeriesSource parse_series_source(const std::string& text) {
  if (text == "top-floor-measured") return SeriesSource::TopFloorMeasured;
  if (text == "whole-ground-truth") return SeriesSource::WholeGroundTruth;
  if (text == "whole-inferred") return SeriesSource::WholeInferred;
  throw ParseError("unknown series source '" + text + "'");
}

void write_series_csv(const OccupancySeries& series, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw ConfigError("cannot write " + path);
  std::fprintf(f, "window_start,r\n");
  for (std::size_t i = 0; i < series.windows.size(); ++i) {
    std::fprintf(f, "%lld,%.17g\n", static_cast<long long>(series.windows[i]), series.values[i]);
  }
  std::fclose(f);
}

Store::Store(StoreOptions options) : options_(std::move(options)) {
  if (options_.report_period <= 0 || kWindowSeconds % options_.report_period != 0) {
    throw ConfigError("report period must divide the 300 s series window");
  }
  if (options_.lateness_bound < 0) throw ConfigError("lateness bound must be >= 0");
  if (options_.clean.debounce_reports < 1 || options_.clean.gap_limit_reports < 0) {
    throw ConfigError("bad cleaning options");
  }
  if (options_.directory) {
    std::filesystem::create_directories(*options_.directory);
    const auto path = *options_.directory + "/events.log";
    log_ = std::fopen(path.c_str(), "a");
    if (log_ == nullptr) throw ConfigError("cannot open " + path + ": " + std::strerror(errno));
  }
}

Store::~Store() { close_files(); }

Store::Store(Store&& o) noexcept { *this = std::move(o); }

Store& Store::operator=(Store&& o) noexcept {
  if (this != &o) {
    close_files();
    options_ = std::move(o.options_);
    seen_batches_ = std::move(o.seen_batches_);
    pending_ = std::move(o.pending_);
    tracks_ = std::move(o.tracks_);
    origin_ = o.origin_;
    watermark_ = o.watermark_;
    finalized_ = o.finalized_;
    flushed_ = o.flushed_;
    events_ = std::move(o.events_);
    log_ = std::exchange(o.log_, nullptr);
    daily_ = std::exchange(o.daily_, nullptr);
    daily_date_ = std::move(o.daily_date_);
  }
  return *this;
}

void Store::close_files() {
  if (log_ != nullptr) std::fclose(std::exchange(log_, nullptr));
  if (daily_ != nullptr) std::fclose(std::exchange(daily_, nullptr));
}

IngestResult Store::ingest(const codec::UplinkBatch& batch) {
  IngestResult result;
  const UnixSeconds epoch = batch.batch_epoch;
  const auto key = std::make_pair(batch.ap_id, epoch);
  if (seen_batches_.count(key) != 0) {
    result.duplicate = true;
    return result;
  }
  if (epoch % options_.report_period != 0) {
    throw DomainError("batch epoch " + std::to_string(epoch) + " is not on the " +
                      std::to_string(options_.report_period) + " s report grid");
  }
  if (watermark_ && epoch + options_.lateness_bound < *watermark_) {
    throw LateDataError("batch " + std::to_string(epoch) + " from AP " +
                        std::to_string(batch.ap_id) + " trails watermark " +
                        std::to_string(*watermark_) + " by more than " +
                        std::to_string(options_.lateness_bound) + " s");
  }
  if (flushed_) {
    throw LateDataError("store was flushed; no further batches accepted");
  }

  seen_batches_.insert(key);
  auto& slot = pending_[epoch];
  for (const auto& r : batch.records) {
    slot[r.sensor_id] = Report{epoch, epoch + r.offset_s, r.state, r.watchdog};
  }
  result.accepted_records = batch.records.size();
  watermark_ = std::max(watermark_.value_or(epoch), epoch);

  // Ticks strictly older than watermark - lateness can no longer receive data.
  result.events = finalize_through(*watermark_ - options_.lateness_bound - options_.report_period);
  return result;
}

std::vector<ChangeEvent> Store::flush() {
  std::vector<ChangeEvent> out;
  if (!pending_.empty()) out = finalize_through(pending_.rbegin()->first);
  flushed_ = true;
  return out;
}

std::vector<ChangeEvent> Store::finalize_through(UnixSeconds tick) {
  std::vector<ChangeEvent> out;
  if (!origin_) {
    if (pending_.empty() || pending_.begin()->first > tick) return out;
    origin_ = pending_.begin()->first;
  }
  const UnixSeconds period = options_.report_period;
  for (UnixSeconds t = *origin_ + static_cast<UnixSeconds>(finalized_) * period; t <= tick;
       t += period) {
    finalize_tick(t, out);
  }
  return out;
}

void Store::finalize_tick(UnixSeconds tick, std::vector<ChangeEvent>& out) {
  std::map<std::uint16_t, Report> reports;
  if (auto it = pending_.find(tick); it != pending_.end()) {
    reports = std::move(it->second);
    pending_.erase(it);
  }
  for (const auto& [id, r] : reports) {
    if (tracks_.count(id) == 0) {
      Track t{SensorCleaner(options_.clean), {}};
      t.timeline.assign(finalized_, CellState::Unknown);
      tracks_.emplace(id, std::move(t));
    }
  }
  for (auto& [id, track] : tracks_) {
    std::optional<Report> here;
    if (auto it = reports.find(id); it != reports.end()) here = it->second;
    if (auto e = track.cleaner.step(here, track.timeline)) {
      e->sensor_id = id;
      events_.push_back(*e);
      out.push_back(*e);
      persist(*e);
    }
  }
  ++finalized_;
}

void Store::persist(const ChangeEvent& e) {
  if (log_ == nullptr) return;
  const auto line = format_event(e) + "\n";
  std::fputs(line.c_str(), log_);
  std::fflush(log_);
  const auto date = format_date(e.current_timestamp);
  if (date != daily_date_) {
    if (daily_ != nullptr) std::fclose(daily_);
    const auto path = *options_.directory + "/events-" + date + ".csv";
    daily_ = std::fopen(path.c_str(), "a");
    if (daily_ == nullptr) throw ConfigError("cannot open " + path);
    daily_date_ = date;
  }
  std::fputs(line.c_str(), daily_);
  std::fflush(daily_);
}

std::optional<UnixSeconds> Store::latest_epoch() const { return watermark_; }

std::optional<UnixSeconds> Store::settled_through() const {
  if (!origin_ || finalized_ == 0) return std::nullopt;
  const UnixSeconds period = options_.report_period;
  const UnixSeconds last = *origin_ + static_cast<UnixSeconds>(finalized_ - 1) * period;
  if (flushed_) return last;
  const UnixSeconds settled = last - options_.clean.debounce_reports * period;
  if (settled < *origin_) return std::nullopt;
  return settled;
}

std::optional<std::pair<UnixSeconds, UnixSeconds>> Store::covered() const {
  const auto settled = settled_through();
  if (!settled) return std::nullopt;
  const UnixSeconds first = ceil_to(*origin_, kWindowSeconds);
  const UnixSeconds last = floor_to(*settled, kWindowSeconds);
  if (last < first) return std::nullopt;
  return std::make_pair(first, last);
}

CellState Store::state_at(std::uint16_t sensor_id, UnixSeconds tick) const {
  auto it = tracks_.find(sensor_id);
  if (!origin_ || it == tracks_.end() || tick < *origin_) return CellState::Unknown;
  const auto idx = static_cast<std::size_t>((tick - *origin_) / options_.report_period);
  if ((tick - *origin_) % options_.report_period != 0 || idx >= it->second.timeline.size()) {
    return CellState::Unknown;
  }
  return it->second.timeline[idx];
}

OccupancySeries Store::occupancy_series(std::span<const std::uint16_t> spot_set,
                                        TimeRange range) const {
  if (spot_set.empty()) throw DomainError("occupancy over an empty spot set");
  const auto cov = covered();
  auto describe = [&] {
    return cov ? "[" + std::to_string(cov->first) + ", " + std::to_string(cov->second) + "]"
               : std::string("nothing");
  };
  if (range.empty()) {
    throw RangeError("empty or reversed range [" + std::to_string(range.start) + ", " +
                     std::to_string(range.end) + "); covered boundaries: " + describe());
  }
  const UnixSeconds first = ceil_to(range.start, kWindowSeconds);
  const UnixSeconds last = floor_to(range.end - 1, kWindowSeconds);
  if (!cov || first > last || first < cov->first || last > cov->second) {
    throw RangeError("requested [" + std::to_string(range.start) + ", " +
                     std::to_string(range.end) + ") but covered boundaries are " + describe());
  }

  OccupancySeries s;
  s.source = SeriesSource::TopFloorMeasured;
  for (UnixSeconds w = first; w < range.end; w += kWindowSeconds) {
    int occupied = 0;
    int known = 0;
    for (auto id : spot_set) {
      const auto c = state_at(id, w);
      if (c == CellState::Unknown) continue;
      ++known;
      occupied += c == CellState::Occupied ? 1 : 0;
    }
    if (known == 0) {
      throw RangeError("no sensor in the spot set has data at " + std::to_string(w));
    }
    s.windows.push_back(w);
    s.values.push_back(static_cast<double>(occupied) / known);
  }
  return s;
}

}  // namespace smartpark::ingest
