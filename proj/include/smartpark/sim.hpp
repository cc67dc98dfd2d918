// Discrete-event simulation of a multi-floor parking structure whose top
// floor carries one wireless occupancy sensor per spot. The simulator
// produces the access-point uplink batches the sensors would emit and the
// ground truth (whole-structure occupancy, entrance/exit counts, per-vehicle
// cruising records) needed to evaluate everything downstream.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smartpark/codec.hpp"
#include "smartpark/time_util.hpp"

namespace smartpark::sim {

struct StructureConfig {
  int total_spots{1080};
  int floors{5};
  int top_floor_spots{103};
  int sensor_count{107};  // top-floor spot sensors plus 4 entrance/exit counters
  int report_period_s{30};
  // Radar detection constants. Carried for completeness; the simulator has
  // no signal model and does not use them.
  double detect_range_in{4.0};
  double noise_threshold_db{6.0};

  std::uint16_t ap_id{1};
  int repeaters{7};
  int hop_latency_s{1};  // record offset = hop_latency_s * (1 + sensor_id % repeaters)

  double floor_traverse_s{20.0};
  double spot_scan_s{0.25};
  // Minimum number of consecutive reports any occupied or vacant interval of
  // a spot spans. Dwell times and spot re-use are held off accordingly.
  int hold_reports{3};

  /// Throws ConfigError on an inconsistent configuration.
  void validate() const;

  /// Spot capacity per floor, bottom floor first. The top floor holds
  /// top_floor_spots; the rest are split evenly, remainder on the lowest floors.
  [[nodiscard]] std::vector<int> floor_capacities() const;

  [[nodiscard]] std::uint8_t record_offset(int sensor_id) const noexcept {
    return static_cast<std::uint8_t>(hop_latency_s * (1 + sensor_id % repeaters));
  }
};

/// Piecewise-constant vehicles/minute over the time of day, repeating daily.
/// Each step applies from its second-of-day until the next step.
class RateProfile {
public:
  RateProfile() = default;
  explicit RateProfile(std::vector<std::pair<int, double>> steps);

  [[nodiscard]] double per_minute_at(int second_of_day) const noexcept;
  /// First second-of-day strictly after `second_of_day` where the rate may change
  /// (kSecondsPerDay when none remain today).
  [[nodiscard]] int next_change_after(int second_of_day) const noexcept;
  [[nodiscard]] const std::vector<std::pair<int, double>>& steps() const noexcept { return steps_; }
  [[nodiscard]] bool all_zero() const noexcept;

private:
  std::vector<std::pair<int, double>> steps_;
};

enum class FillPolicy { BottomUp, Uniform };

struct DemandScenario {
  RateProfile arrival_rate;
  // Extra departures on top of dwell expiry: at this rate a uniformly chosen
  // parked vehicle leaves early.
  RateProfile departure_rate;
  double dwell_mean_min{480.0};
  double dwell_sigma{0.3};  // log-normal shape
  FillPolicy fill_policy{FillPolicy::BottomUp};
  // Bottom-up only: chance a driver passes a floor with free spots while a
  // higher floor still has room.
  double overflow_probability{0.0};
  // Per-day multiplicative demand factor, log-normal with mean 1.
  double daily_demand_sigma{0.0};
  std::uint64_t seed{42};

  void validate() const;
};

struct Scenario {
  StructureConfig structure;
  DemandScenario demand;
};

/// YAML scenario file; see scenarios/ps1_morning.yaml for the schema.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& yaml_text);

struct WindowTruth {
  UnixSeconds time{0};
  double r_t{0.0};
  double r_w{0.0};
  int in_count{0};   // entries in [time, time + 300)
  int out_count{0};  // exits in [time, time + 300), parked or not
  int top_occupied{0};
  int occupied{0};
  std::vector<int> floor_occupied;
};

struct VehicleRecord {
  std::uint64_t id{0};
  double entry_ts{0.0};
  std::optional<double> parked_ts;
  std::optional<double> left_ts;
  double occupancy_at_entry{0.0};
  double cruise_s{0.0};
  int floor{-1};  // -1 when the vehicle never parked
  int spot{-1};
};

struct GroundTruth {
  std::vector<WindowTruth> windows;
  std::vector<VehicleRecord> vehicles;  // ordered by id == entry order
};

using BatchSink = std::function<void(const codec::UplinkBatch&)>;

/// Runs the simulation over `horizon`, starting from an empty structure.
/// One batch per report period is handed to `sink` in epoch order.
GroundTruth simulate(const StructureConfig& config, const DemandScenario& scenario,
                     TimeRange horizon, const BatchSink& sink);

struct SimulationResult {
  std::vector<codec::UplinkBatch> batches;
  GroundTruth truth;
};

SimulationResult simulate(const StructureConfig& config, const DemandScenario& scenario,
                          TimeRange horizon);

/// Park time minus entry time, or leave time minus entry time for a vehicle
/// that never found a spot. Throws LookupError for an unknown id.
double cruise_time_of(std::uint64_t vehicle_id, const GroundTruth& truth);

struct Census {
  int arrived{0};
  int parked{0};
  int cruising{0};
  int departed{0};
};

/// Vehicle population at instant `t`, derived from the vehicle records.
Census census_at(const GroundTruth& truth, double t);

enum class FaultMode { Silence, Flicker, Stuck };

struct FaultSpec {
  std::vector<std::uint16_t> sensors;
  TimeRange window;  // applies to batches whose epoch lies in the window
  FaultMode mode{FaultMode::Silence};
  bool stuck_value{true};
};

/// Drops (silence), toggles with watchdog 0 (flicker) or freezes (stuck) the
/// named sensors' records inside the window. Throws RangeError when the
/// window is not inside the stream's time span.
std::vector<codec::UplinkBatch> inject_fault(std::vector<codec::UplinkBatch> stream,
                                             const FaultSpec& fault);

FaultMode parse_fault_mode(const std::string& text);

// CSV exports.
void write_windows_csv(const GroundTruth& truth, const std::string& path);
void write_vehicles_csv(const GroundTruth& truth, const std::string& path);
/// `r,T_seconds` rows, one per vehicle whose cruise completed.
void write_cruise_obs_csv(const GroundTruth& truth, const std::string& path);

}  // namespace smartpark::sim
