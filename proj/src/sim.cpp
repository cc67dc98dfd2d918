#include "smartpark/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <queue>
#include <random>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "smartpark/errors.hpp"

namespace smartpark::sim {

void StructureConfig::validate() const {
  if (total_spots <= 0) throw ConfigError("total_spots must be positive");
  if (floors <= 0) throw ConfigError("floors must be positive");
  if (report_period_s <= 0) throw ConfigError("report_period_s must be positive");
  if (top_floor_spots <= 0 || top_floor_spots > total_spots) {
    throw ConfigError("top_floor_spots must be in [1, total_spots]");
  }
  if (floors == 1 && top_floor_spots != total_spots) {
    throw ConfigError("a single-floor structure must have top_floor_spots == total_spots");
  }
  if (floors > 1 && total_spots - top_floor_spots < floors - 1) {
    throw ConfigError("not enough spots for the lower floors");
  }
  if (sensor_count < top_floor_spots) throw ConfigError("sensor_count < top_floor_spots");
  if (top_floor_spots > codec::kMaxSensorId + 1) {
    throw ConfigError("top floor has more sensors than the 10-bit id space");
  }
  if (kWindowSeconds % report_period_s != 0) {
    throw ConfigError("report_period_s must divide the 300 s series window");
  }
  if (repeaters <= 0 || hop_latency_s < 0) throw ConfigError("bad repeater settings");
  const int max_offset = hop_latency_s * repeaters;
  if (max_offset >= report_period_s || max_offset > codec::kMaxOffset) {
    throw ConfigError("hop_latency_s * repeaters must stay below report_period_s");
  }
  if (floor_traverse_s < 0 || spot_scan_s < 0) throw ConfigError("negative traversal time");
  if (hold_reports < 1) throw ConfigError("hold_reports must be >= 1");
}

std::vector<int> StructureConfig::floor_capacities() const {
  std::vector<int> caps(static_cast<std::size_t>(floors), 0);
  caps.back() = top_floor_spots;
  const int lower = floors - 1;
  if (lower > 0) {
    const int rest = total_spots - top_floor_spots;
    for (int f = 0; f < lower; ++f) caps[f] = rest / lower + (f < rest % lower ? 1 : 0);
  }
  return caps;
}

RateProfile::RateProfile(std::vector<std::pair<int, double>> steps) : steps_(std::move(steps)) {
  std::sort(steps_.begin(), steps_.end());
  for (const auto& [at, rate] : steps_) {
    if (at < 0 || at >= kSecondsPerDay) throw ConfigError("rate step outside the day");
    if (!(rate >= 0.0)) throw ConfigError("rates must be >= 0");
  }
}

double RateProfile::per_minute_at(int second_of_day) const noexcept {
  // Before the first step the last step of the previous day still applies.
  if (steps_.empty()) return 0.0;
  auto it = std::upper_bound(steps_.begin(), steps_.end(), second_of_day,
                             [](int s, const auto& step) { return s < step.first; });
  if (it == steps_.begin()) return steps_.back().second;
  return std::prev(it)->second;
}

int RateProfile::next_change_after(int second_of_day) const noexcept {
  for (const auto& [at, rate] : steps_) {
    if (at > second_of_day) return at;
  }
  return static_cast<int>(kSecondsPerDay);
}

bool RateProfile::all_zero() const noexcept {
  return std::all_of(steps_.begin(), steps_.end(), [](const auto& s) { return s.second == 0.0; });
}

void DemandScenario::validate() const {
  if (!(dwell_mean_min > 0.0)) throw ConfigError("dwell mean must be positive");
  if (!(dwell_sigma >= 0.0)) throw ConfigError("dwell sigma must be >= 0");
  if (!(overflow_probability >= 0.0 && overflow_probability <= 1.0)) {
    throw ConfigError("overflow_probability must be in [0, 1]");
  }
  if (!(daily_demand_sigma >= 0.0)) throw ConfigError("daily_demand_sigma must be >= 0");
}

namespace {

RateProfile parse_profile(const YAML::Node& node, const char* name) {
  std::vector<std::pair<int, double>> steps;
  if (!node) return RateProfile{};
  if (!node.IsMap()) throw ConfigError(std::string(name) + " must map HH:MM to vehicles/minute");
  for (const auto& kv : node) {
    steps.emplace_back(parse_time_of_day(kv.first.as<std::string>()), kv.second.as<double>());
  }
  return RateProfile(std::move(steps));
}

template <typename T>
void read_into(const YAML::Node& node, const char* key, T& out) {
  if (const auto v = node[key]) out = v.as<T>();
}

}  // namespace

Scenario parse_scenario(const std::string& yaml_text) {
  Scenario sc;
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario YAML: ") + e.what());
  }
  try {
    if (const auto s = root["structure"]) {
      auto& c = sc.structure;
      read_into(s, "total_spots", c.total_spots);
      read_into(s, "floors", c.floors);
      read_into(s, "top_floor_spots", c.top_floor_spots);
      read_into(s, "sensor_count", c.sensor_count);
      read_into(s, "report_period_s", c.report_period_s);
      read_into(s, "detect_range_in", c.detect_range_in);
      read_into(s, "noise_threshold_db", c.noise_threshold_db);
      read_into(s, "ap_id", c.ap_id);
      read_into(s, "repeaters", c.repeaters);
      read_into(s, "hop_latency_s", c.hop_latency_s);
      read_into(s, "floor_traverse_s", c.floor_traverse_s);
      read_into(s, "spot_scan_s", c.spot_scan_s);
      read_into(s, "hold_reports", c.hold_reports);
    }
    if (const auto d = root["demand"]) {
      auto& s = sc.demand;
      s.arrival_rate = parse_profile(d["arrival_rate"], "arrival_rate");
      s.departure_rate = parse_profile(d["departure_rate"], "departure_rate");
      if (const auto dw = d["dwell"]) {
        read_into(dw, "mean_minutes", s.dwell_mean_min);
        read_into(dw, "sigma", s.dwell_sigma);
      }
      if (const auto p = d["fill_policy"]) {
        const auto v = p.as<std::string>();
        if (v == "bottom-up") {
          s.fill_policy = FillPolicy::BottomUp;
        } else if (v == "uniform") {
          s.fill_policy = FillPolicy::Uniform;
        } else {
          throw ConfigError("fill_policy must be bottom-up or uniform, got '" + v + "'");
        }
      }
      read_into(d, "overflow_probability", s.overflow_probability);
      read_into(d, "daily_demand_sigma", s.daily_demand_sigma);
      read_into(d, "seed", s.seed);
    }
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario YAML: ") + e.what());
  }
  sc.structure.validate();
  sc.demand.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

namespace {

enum class EventKind : int { Park = 0, Leave = 1, Abandon = 2, Arrival = 3, EarlyDeparture = 4 };

struct Event {
  double time;
  EventKind kind;
  std::uint64_t seq;
  std::uint64_t vehicle;

  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    if (kind != o.kind) return static_cast<int>(kind) > static_cast<int>(o.kind);
    return seq > o.seq;
  }
};

struct Spot {
  int floor{0};
  int index{0};
  bool occupied{false};
  bool reserved{false};
  double available_from{-1e300};
  std::uint64_t vehicle{0};
};

class Simulator {
public:
  Simulator(const StructureConfig& cfg, const DemandScenario& sc, TimeRange horizon)
      : cfg_(cfg), sc_(sc), horizon_(horizon), rng_(sc.seed), caps_(cfg.floor_capacities()) {
    int id = 0;
    for (int f = 0; f < cfg_.floors; ++f) {
      floor_first_.push_back(id);
      for (int i = 0; i < caps_[f]; ++i, ++id) spots_.push_back(Spot{f, i});
    }
    floor_occupied_.assign(caps_.size(), 0);
    top_first_ = floor_first_.back();
    hold_s_ = static_cast<double>(cfg_.hold_reports) * cfg_.report_period_s;
    sensor_last_.assign(static_cast<std::size_t>(cfg_.top_floor_spots), -1);
    sensor_run_.assign(static_cast<std::size_t>(cfg_.top_floor_spots), 0);
  }

  GroundTruth run(const BatchSink& sink) {
    const UnixSeconds period = cfg_.report_period_s;
    const UnixSeconds first_tick = ceil_to(horizon_.start, period);
    first_window_ = ceil_to(horizon_.start, kWindowSeconds);
    for (UnixSeconds w = first_window_; w < horizon_.end; w += kWindowSeconds) {
      WindowTruth wt;
      wt.time = w;
      truth_.windows.push_back(wt);
    }

    schedule_next(EventKind::Arrival, static_cast<double>(horizon_.start), sc_.arrival_rate);
    schedule_next(EventKind::EarlyDeparture, static_cast<double>(horizon_.start),
                  sc_.departure_rate);

    for (UnixSeconds tick = first_tick; tick < horizon_.end; tick += period) {
      drain_until(static_cast<double>(tick));
      if (tick % kWindowSeconds == 0) sample_window(tick);
      poll(tick, sink);
    }
    drain_until(std::nextafter(static_cast<double>(horizon_.end), -1e300));
    return std::move(truth_);
  }

private:
  double uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

  double day_factor(UnixSeconds day) {
    if (sc_.daily_demand_sigma == 0.0) return 1.0;
    auto it = day_factors_.find(day);
    if (it != day_factors_.end()) return it->second;
    const double s = sc_.daily_demand_sigma;
    std::lognormal_distribution<double> dist(-0.5 * s * s, s);
    return day_factors_.emplace(day, dist(demand_rng())).first->second;
  }

  // Day factors come from their own stream so that they don't depend on how
  // many arrivals preceded the first draw of the day.
  std::mt19937_64& demand_rng() {
    if (!day_rng_) day_rng_.emplace(sc_.seed ^ 0x9E3779B97F4A7C15ULL);
    return *day_rng_;
  }

  // Next event time of a time-inhomogeneous Poisson process after `from`.
  std::optional<double> next_poisson(double from, const RateProfile& profile) {
    if (profile.all_zero()) return std::nullopt;
    double budget = std::exponential_distribution<double>(1.0)(rng_);
    double t = from;
    const double end = static_cast<double>(horizon_.end);
    while (t < end) {
      const auto whole = static_cast<UnixSeconds>(std::floor(t));
      const UnixSeconds day = floor_to(whole, kSecondsPerDay);
      const int sod = seconds_of_day(whole);
      const double seg_end =
          std::min(end, static_cast<double>(day + profile.next_change_after(sod)));
      const double lambda = profile.per_minute_at(sod) * day_factor(day) / 60.0;
      const double span = seg_end - t;
      if (lambda > 0.0 && lambda * span >= budget) return t + budget / lambda;
      budget -= lambda * span;
      t = seg_end;
    }
    return std::nullopt;
  }

  void schedule_next(EventKind kind, double from, const RateProfile& profile) {
    if (auto t = next_poisson(from, profile)) push(*t, kind, 0);
  }

  void push(double t, EventKind kind, std::uint64_t vehicle) {
    queue_.push(Event{t, kind, seq_++, vehicle});
  }

  WindowTruth* window_at(double t) {
    if (t < static_cast<double>(first_window_)) return nullptr;
    const auto idx = static_cast<std::size_t>((t - static_cast<double>(first_window_)) /
                                              static_cast<double>(kWindowSeconds));
    return idx < truth_.windows.size() ? &truth_.windows[idx] : nullptr;
  }

  void drain_until(double limit) {
    while (!queue_.empty() && queue_.top().time <= limit) {
      const Event ev = queue_.top();
      queue_.pop();
      switch (ev.kind) {
        case EventKind::Arrival:
          arrive(ev.time);
          schedule_next(EventKind::Arrival, ev.time, sc_.arrival_rate);
          break;
        case EventKind::EarlyDeparture:
          early_departure(ev.time);
          schedule_next(EventKind::EarlyDeparture, ev.time, sc_.departure_rate);
          break;
        case EventKind::Park:
          park(ev.vehicle, ev.time);
          break;
        case EventKind::Leave:
          leave(ev.vehicle, ev.time);
          break;
        case EventKind::Abandon:
          truth_.vehicles[ev.vehicle].left_ts = ev.time;
          if (auto* w = window_at(ev.time)) ++w->out_count;
          break;
      }
    }
  }

  bool available(const Spot& s, double t) const {
    return !s.occupied && !s.reserved && s.available_from <= t;
  }

  // Chooses a spot for a vehicle entering at `t`. Returns the spot index (or
  // -1) and the cruise duration.
  std::pair<int, double> choose_spot(double t) {
    const double traverse = cfg_.floor_traverse_s;
    const double scan = cfg_.spot_scan_s;
    if (sc_.fill_policy == FillPolicy::Uniform) {
      std::vector<int> free;
      for (int i = 0; i < static_cast<int>(spots_.size()); ++i) {
        if (available(spots_[i], t)) free.push_back(i);
      }
      if (free.empty()) return {-1, sweep_duration()};
      const auto pick =
          free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng_)];
      const auto& s = spots_[pick];
      const int below = floor_first_[s.floor];
      return {pick, (s.floor + 1) * traverse + (below + s.index) * scan};
    }

    std::vector<int> first_free(caps_.size(), -1);
    for (std::size_t f = 0; f < caps_.size(); ++f) {
      for (int i = 0; i < caps_[f]; ++i) {
        if (available(spots_[floor_first_[f] + i], t)) {
          first_free[f] = i;
          break;
        }
      }
    }
    double cruise = 0.0;
    for (std::size_t f = 0; f < caps_.size(); ++f) {
      cruise += traverse;
      if (first_free[f] >= 0) {
        const bool room_above = std::any_of(first_free.begin() + static_cast<long>(f) + 1,
                                            first_free.end(), [](int i) { return i >= 0; });
        if (room_above && sc_.overflow_probability > 0.0 &&
            uniform01() < sc_.overflow_probability) {
          cruise += caps_[f] * scan;
          continue;
        }
        return {floor_first_[f] + first_free[f], cruise + first_free[f] * scan};
      }
      cruise += caps_[f] * scan;
    }
    return {-1, cruise};
  }

  double sweep_duration() const {
    return cfg_.floors * cfg_.floor_traverse_s + cfg_.total_spots * cfg_.spot_scan_s;
  }

  void arrive(double t) {
    VehicleRecord v;
    v.id = truth_.vehicles.size();
    v.entry_ts = t;
    v.occupancy_at_entry = static_cast<double>(occupied_) / cfg_.total_spots;
    const auto [spot, cruise] = choose_spot(t);
    v.cruise_s = cruise;
    if (auto* w = window_at(t)) ++w->in_count;
    if (spot >= 0) {
      spots_[spot].reserved = true;
      spots_[spot].vehicle = v.id;
      v.spot = spot;
      v.floor = spots_[spot].floor;
      push(t + cruise, EventKind::Park, v.id);
    } else {
      push(t + cruise, EventKind::Abandon, v.id);
    }
    truth_.vehicles.push_back(v);
  }

  void park(std::uint64_t id, double t) {
    auto& v = truth_.vehicles[id];
    auto& s = spots_[v.spot];
    s.reserved = false;
    s.occupied = true;
    v.parked_ts = t;
    ++occupied_;
    ++floor_occupied_[s.floor];
    parked_pos_[id] = parked_list_.size();
    parked_list_.push_back(id);

    const double s2 = sc_.dwell_sigma;
    std::lognormal_distribution<double> dwell(std::log(sc_.dwell_mean_min) - 0.5 * s2 * s2, s2);
    const double stay = std::max(dwell(rng_) * 60.0, hold_s_);
    push(t + stay, EventKind::Leave, id);
  }

  void leave(std::uint64_t id, double t) {
    auto& v = truth_.vehicles[id];
    if (v.left_ts) return;  // already left early
    auto& s = spots_[v.spot];
    s.occupied = false;
    s.available_from = t + hold_s_;
    v.left_ts = t;
    --occupied_;
    --floor_occupied_[s.floor];
    const auto pos = parked_pos_.at(id);
    const auto last = parked_list_.back();
    parked_list_[pos] = last;
    parked_pos_[last] = pos;
    parked_list_.pop_back();
    parked_pos_.erase(id);
    if (auto* w = window_at(t)) ++w->out_count;
  }

  void early_departure(double t) {
    if (parked_list_.empty()) return;
    const auto idx =
        std::uniform_int_distribution<std::size_t>(0, parked_list_.size() - 1)(rng_);
    const auto id = parked_list_[idx];
    if (*truth_.vehicles[id].parked_ts + hold_s_ > t) return;
    leave(id, t);
  }

  void sample_window(UnixSeconds tick) {
    auto* w = window_at(static_cast<double>(tick));
    if (w == nullptr) return;
    w->occupied = occupied_;
    w->top_occupied = floor_occupied_.back();
    w->floor_occupied = floor_occupied_;
    w->r_w = static_cast<double>(occupied_) / cfg_.total_spots;
    w->r_t = static_cast<double>(floor_occupied_.back()) / cfg_.top_floor_spots;
  }

  void poll(UnixSeconds tick, const BatchSink& sink) {
    codec::UplinkBatch batch;
    batch.batch_epoch = static_cast<std::uint32_t>(tick);
    batch.ap_id = cfg_.ap_id;
    batch.records.reserve(static_cast<std::size_t>(cfg_.top_floor_spots));
    for (int i = 0; i < cfg_.top_floor_spots; ++i) {
      const int state = spots_[top_first_ + i].occupied ? 1 : 0;
      auto& last = sensor_last_[i];
      auto& run = sensor_run_[i];
      run = (state == last) ? run + 1 : 1;
      last = state;
      codec::SensorRecord r;
      r.sensor_id = static_cast<std::uint16_t>(i);
      r.offset_s = cfg_.record_offset(i);
      r.state = state != 0;
      r.watchdog = run >= 2;
      batch.records.push_back(r);
    }
    if (sink) sink(batch);
  }

  const StructureConfig& cfg_;
  const DemandScenario& sc_;
  TimeRange horizon_;
  std::mt19937_64 rng_;
  std::optional<std::mt19937_64> day_rng_;
  std::map<UnixSeconds, double> day_factors_;
  std::vector<int> caps_;
  std::vector<int> floor_first_;
  std::vector<Spot> spots_;
  std::vector<int> floor_occupied_;
  int top_first_{0};
  int occupied_{0};
  double hold_s_{0.0};
  std::vector<int> sensor_last_;
  std::vector<int> sensor_run_;
  std::vector<std::uint64_t> parked_list_;
  std::map<std::uint64_t, std::size_t> parked_pos_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t seq_{0};
  UnixSeconds first_window_{0};
  GroundTruth truth_;
};

}  // namespace

GroundTruth simulate(const StructureConfig& config, const DemandScenario& scenario,
                     TimeRange horizon, const BatchSink& sink) {
  config.validate();
  scenario.validate();
  if (horizon.empty()) throw RangeError("simulation horizon is empty");
  if (horizon.start < 0 || horizon.end > 0xFFFFFFFFLL) {
    throw RangeError("horizon must fit 32-bit unix epochs");
  }
  Simulator sim(config, scenario, horizon);
  return sim.run(sink);
}

SimulationResult simulate(const StructureConfig& config, const DemandScenario& scenario,
                          TimeRange horizon) {
  SimulationResult result;
  result.truth = simulate(config, scenario, horizon,
                          [&](const codec::UplinkBatch& b) { result.batches.push_back(b); });
  return result;
}

double cruise_time_of(std::uint64_t vehicle_id, const GroundTruth& truth) {
  if (vehicle_id >= truth.vehicles.size()) {
    throw LookupError("unknown vehicle " + std::to_string(vehicle_id));
  }
  const auto& v = truth.vehicles[vehicle_id];
  if (v.parked_ts) return *v.parked_ts - v.entry_ts;
  if (v.left_ts) return *v.left_ts - v.entry_ts;
  throw LookupError("vehicle " + std::to_string(vehicle_id) +
                    " was still cruising when the horizon ended");
}

Census census_at(const GroundTruth& truth, double t) {
  Census c;
  for (const auto& v : truth.vehicles) {
    if (v.entry_ts > t) continue;
    ++c.arrived;
    if (v.left_ts && *v.left_ts <= t) {
      ++c.departed;
    } else if (v.parked_ts && *v.parked_ts <= t) {
      ++c.parked;
    } else {
      ++c.cruising;
    }
  }
  return c;
}

FaultMode parse_fault_mode(const std::string& text) {
  if (text == "silence") return FaultMode::Silence;
  if (text == "flicker") return FaultMode::Flicker;
  if (text == "stuck") return FaultMode::Stuck;
  throw ParseError("fault mode must be silence, flicker or stuck; got '" + text + "'");
}

std::vector<codec::UplinkBatch> inject_fault(std::vector<codec::UplinkBatch> stream,
                                             const FaultSpec& fault) {
  if (stream.empty()) throw RangeError("cannot inject a fault into an empty stream");
  if (fault.window.empty()) throw RangeError("fault window is empty");
  UnixSeconds lo = stream.front().batch_epoch;
  UnixSeconds hi = lo;
  for (const auto& b : stream) {
    lo = std::min<UnixSeconds>(lo, b.batch_epoch);
    hi = std::max<UnixSeconds>(hi, b.batch_epoch);
  }
  if (fault.window.start < lo || fault.window.end > hi + 1) {
    throw RangeError("fault window [" + std::to_string(fault.window.start) + ", " +
                     std::to_string(fault.window.end) + ") outside stream span [" +
                     std::to_string(lo) + ", " + std::to_string(hi + 1) + ")");
  }

  struct Progress {
    int reports{0};
    bool first{false};
  };
  std::map<std::uint16_t, Progress> seen;
  for (auto id : fault.sensors) seen[id] = Progress{};

  for (auto& batch : stream) {
    if (!fault.window.contains(batch.batch_epoch)) continue;
    auto& recs = batch.records;
    if (fault.mode == FaultMode::Silence) {
      std::erase_if(recs, [&](const codec::SensorRecord& r) { return seen.count(r.sensor_id) != 0; });
      continue;
    }
    for (auto& r : recs) {
      auto it = seen.find(r.sensor_id);
      if (it == seen.end()) continue;
      auto& p = it->second;
      if (fault.mode == FaultMode::Flicker) {
        // Starts from the inverse of the first true reading, then toggles.
        if (p.reports == 0) p.first = !r.state;
        r.state = (p.reports % 2 == 0) ? p.first : !p.first;
        r.watchdog = false;
      } else {
        r.state = fault.stuck_value;
        r.watchdog = true;
      }
      ++p.reports;
    }
  }
  return stream;
}

namespace {

std::FILE* open_for_write(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw ConfigError("cannot write " + path);
  return f;
}

void print_opt(std::FILE* f, const std::optional<double>& v) {
  if (v) std::fprintf(f, "%.3f", *v);
}

}  // namespace

void write_windows_csv(const GroundTruth& truth, const std::string& path) {
  std::FILE* f = open_for_write(path);
  std::fprintf(f, "time,r_t,r_w,in_count,out_count\n");
  for (const auto& w : truth.windows) {
    std::fprintf(f, "%lld,%.17g,%.17g,%d,%d\n", static_cast<long long>(w.time), w.r_t, w.r_w,
                 w.in_count, w.out_count);
  }
  std::fclose(f);
}

void write_vehicles_csv(const GroundTruth& truth, const std::string& path) {
  std::FILE* f = open_for_write(path);
  std::fprintf(f, "vehicle_id,entry_ts,parked_ts,left_ts,occupancy_at_entry,cruise_s\n");
  for (const auto& v : truth.vehicles) {
    std::fprintf(f, "%llu,%.3f,", static_cast<unsigned long long>(v.id), v.entry_ts);
    print_opt(f, v.parked_ts);
    std::fputc(',', f);
    print_opt(f, v.left_ts);
    std::fprintf(f, ",%.17g,%.3f\n", v.occupancy_at_entry, v.cruise_s);
  }
  std::fclose(f);
}

void write_cruise_obs_csv(const GroundTruth& truth, const std::string& path) {
  std::FILE* f = open_for_write(path);
  std::fprintf(f, "r,T_seconds\n");
  for (const auto& v : truth.vehicles) {
    if (!v.parked_ts && !v.left_ts) continue;
    std::fprintf(f, "%.17g,%.3f\n", v.occupancy_at_entry, v.cruise_s);
  }
  std::fclose(f);
}

}  // namespace smartpark::sim
