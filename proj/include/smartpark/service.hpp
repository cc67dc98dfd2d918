// Real-time parking information: the current color band, top-floor occupancy
// and expected cruising time, backed by the ingestion store and the offline
// scheme/model artifacts.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "smartpark/analytics.hpp"
#include "smartpark/cruise.hpp"
#include "smartpark/store.hpp"
#include "smartpark/thresholds.hpp"

namespace smartpark::service {

struct ServiceConfig {
  std::string host{"127.0.0.1"};
  int port{8080};
  UnixSeconds staleness_s{300};
  std::string scheme_path{"scheme.json"};
  std::string model_path{"model.json"};
  std::optional<std::string> store_dir;
  int spot_count{103};  // sensors 0..spot_count-1 watch top-floor spots
  UnixSeconds report_period{30};
  UnixSeconds lateness_s{0};
  // Report the latest settled tick instead of the latest settled 5-minute boundary.
  bool fresh{false};
};

using EnvLookup = std::function<const char*(const char*)>;

/// Defaults, then the YAML file (if any), then SMARTPARK_* environment
/// variables. Throws ConfigError on unknown keys or bad values.
ServiceConfig load_config(const std::optional<std::string>& path, const EnvLookup& env = {});

/// Scheme and cruise model that are always read and swapped together.
struct Bundle {
  thresholds::ColorScheme scheme;
  std::optional<analytics::QuantileLine> quantile_line;
  cruise::CruiseModel model;
  cruise::DisplayTimes display;
  std::uint64_t version{0};
};

struct StatusSnapshot {
  UnixSeconds as_of{0};
  UnixSeconds measured_at{0};  // boundary or tick the occupancy refers to
  double r_t{0.0};
  thresholds::Color color{thresholds::Color::Green};
  thresholds::Band r_w_range;
  int expected_cruise_minutes{1};
  std::string cruise_label;
  UnixSeconds data_age{0};
  bool stale{false};
  std::uint64_t bundle_version{0};
};

struct Ack {
  std::size_t frames{0};
  std::size_t accepted{0};
  std::size_t duplicates{0};
  std::size_t late_dropped{0};
  std::size_t events{0};

  /// Every frame in the request had been seen before.
  [[nodiscard]] bool duplicate() const noexcept { return frames > 0 && duplicates == frames; }
};

class InfoService {
public:
  /// Loads scheme and model from the configured paths.
  explicit InfoService(ServiceConfig config);
  InfoService(ServiceConfig config, Bundle bundle);

  /// Throws UnavailableError until some top-floor data has settled.
  [[nodiscard]] StatusSnapshot status(UnixSeconds now) const;

  /// source is TopFloorMeasured or WholeInferred (needs a quantile line).
  [[nodiscard]] ingest::OccupancySeries series(TimeRange range, ingest::SeriesSource source) const;

  /// Decodes one or more concatenated frames and feeds them to the store.
  /// Codec errors propagate and nothing from the request is ingested.
  Ack ingest(std::span<const std::uint8_t> bytes);

  /// Re-reads scheme and model; on failure the current bundle stays. Returns
  /// the new bundle version.
  std::uint64_t reload();
  std::uint64_t install(Bundle bundle);

  [[nodiscard]] std::shared_ptr<const Bundle> bundle() const;
  [[nodiscard]] const ServiceConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::optional<std::pair<UnixSeconds, UnixSeconds>> covered() const;

private:
  static Bundle load_bundle(const ServiceConfig& config);

  ServiceConfig config_;
  std::vector<std::uint16_t> spots_;

  mutable std::shared_mutex store_mu_;
  ingest::Store store_;

  mutable std::mutex bundle_mu_;
  std::shared_ptr<const Bundle> bundle_;
  std::uint64_t next_version_{1};
};

}  // namespace smartpark::service
