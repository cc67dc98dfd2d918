#include "smartpark/service.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdlib>
#include <numeric>

#include "smartpark/artifacts.hpp"
#include "smartpark/codec.hpp"
#include "smartpark/errors.hpp"

namespace smartpark::service {
namespace {

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected an integer, got '" + v + "'");
}

void set_listen(ServiceConfig& c, const std::string& key, const std::string& v) {
  const auto colon = v.rfind(':');
  if (colon == std::string::npos) throw ConfigError(key + ": expected host:port, got '" + v + "'");
  c.host = v.substr(0, colon);
  c.port = static_cast<int>(parse_int(key, v.substr(colon + 1)));
}

// One setter per key, shared by the file and the environment.
void apply(ServiceConfig& c, const std::string& key, const std::string& v) {
  if (key == "listen") {
    set_listen(c, key, v);
  } else if (key == "host") {
    c.host = v;
  } else if (key == "port") {
    c.port = static_cast<int>(parse_int(key, v));
  } else if (key == "staleness_s") {
    c.staleness_s = parse_int(key, v);
  } else if (key == "scheme") {
    c.scheme_path = v;
  } else if (key == "model") {
    c.model_path = v;
  } else if (key == "store") {
    if (v.empty()) {
      c.store_dir.reset();
    } else {
      c.store_dir = v;
    }
  } else if (key == "spots") {
    c.spot_count = static_cast<int>(parse_int(key, v));
  } else if (key == "report_period_s") {
    c.report_period = parse_int(key, v);
  } else if (key == "lateness_s") {
    c.lateness_s = parse_int(key, v);
  } else if (key == "fresh") {
    c.fresh = parse_bool(key, v);
  } else {
    throw ConfigError("unknown service setting '" + key + "'");
  }
}

constexpr const char* kKeys[] = {"listen", "host", "port",  "staleness_s",     "scheme", "model",
                                 "store",  "spots", "report_period_s", "lateness_s", "fresh"};

std::string env_name(const std::string& key) {
  std::string out = "SMARTPARK_";
  for (char ch : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

void validate(const ServiceConfig& c) {
  if (c.port < 0 || c.port > 65535) throw ConfigError("port out of range");
  if (c.staleness_s <= 0) throw ConfigError("staleness_s must be positive");
  if (c.spot_count < 1 || c.spot_count > 1024) throw ConfigError("spots must be in [1, 1024]");
  if (c.report_period <= 0) throw ConfigError("report_period_s must be positive");
  if (c.lateness_s < 0) throw ConfigError("lateness_s must be >= 0");
}

ingest::StoreOptions store_options(const ServiceConfig& c) {
  ingest::StoreOptions o;
  o.report_period = c.report_period;
  o.lateness_bound = c.lateness_s;
  o.directory = c.store_dir;
  return o;
}

}  // namespace

ServiceConfig load_config(const std::optional<std::string>& path, const EnvLookup& env) {
  ServiceConfig c;
  if (path) {
    YAML::Node root;
    try {
      root = YAML::LoadFile(*path);
    } catch (const YAML::Exception& e) {
      throw ConfigError(*path + ": " + e.what());
    }
    if (root && !root.IsNull()) {
      if (!root.IsMap()) throw ConfigError(*path + ": expected a mapping");
      for (const auto& kv : root) {
        apply(c, kv.first.as<std::string>(), kv.second.IsNull() ? "" : kv.second.as<std::string>());
      }
    }
  }
  const EnvLookup lookup = env ? env : [](const char* name) { return std::getenv(name); };
  for (const char* key : kKeys) {
    if (const char* v = lookup(env_name(key).c_str())) apply(c, key, v);
  }
  validate(c);
  return c;
}

Bundle InfoService::load_bundle(const ServiceConfig& config) {
  const auto scheme = artifacts::read_scheme(config.scheme_path);
  Bundle b;
  b.scheme = scheme.scheme;
  b.quantile_line = scheme.quantile_line;
  b.model = artifacts::read_model(config.model_path);
  return b;
}

InfoService::InfoService(ServiceConfig config) : InfoService(config, load_bundle(config)) {}

InfoService::InfoService(ServiceConfig config, Bundle bundle)
    : config_(std::move(config)), store_(store_options(config_)) {
  validate(config_);
  spots_.resize(static_cast<std::size_t>(config_.spot_count));
  std::iota(spots_.begin(), spots_.end(), std::uint16_t{0});
  install(std::move(bundle));
}

std::uint64_t InfoService::install(Bundle bundle) {
  bundle.scheme.validate();
  bundle.display = cruise::display_times(bundle.model);
  std::lock_guard lock(bundle_mu_);
  bundle.version = next_version_++;
  bundle_ = std::make_shared<const Bundle>(std::move(bundle));
  return bundle_->version;
}

std::uint64_t InfoService::reload() { return install(load_bundle(config_)); }

std::shared_ptr<const Bundle> InfoService::bundle() const {
  std::lock_guard lock(bundle_mu_);
  return bundle_;
}

std::optional<std::pair<UnixSeconds, UnixSeconds>> InfoService::covered() const {
  std::shared_lock lock(store_mu_);
  return store_.covered();
}

StatusSnapshot InfoService::status(UnixSeconds now) const {
  // One bundle for the whole snapshot, so a concurrent reload cannot tear it.
  const auto b = bundle();
  StatusSnapshot s;
  s.as_of = now;
  s.bundle_version = b->version;
  {
    std::shared_lock lock(store_mu_);
    const auto latest = store_.latest_epoch();
    if (!latest) throw UnavailableError("no batches ingested yet");
    if (config_.fresh) {
      const auto tick = store_.settled_through();
      if (!tick) throw UnavailableError("no settled reports yet");
      int known = 0;
      int occupied = 0;
      for (auto id : spots_) {
        const auto c = store_.state_at(id, *tick);
        if (c == ingest::CellState::Unknown) continue;
        ++known;
        occupied += c == ingest::CellState::Occupied ? 1 : 0;
      }
      if (known == 0) throw UnavailableError("no top-floor sensor has data at the latest tick");
      s.measured_at = *tick;
      s.r_t = static_cast<double>(occupied) / known;
    } else {
      const auto cov = store_.covered();
      if (!cov) throw UnavailableError("no settled 5-minute boundary yet");
      try {
        const auto series = store_.occupancy_series(spots_, {cov->second, cov->second + 1});
        s.measured_at = cov->second;
        s.r_t = series.values.front();
      } catch (const RangeError& e) {
        throw UnavailableError(e.what());
      }
    }
    s.data_age = std::max<UnixSeconds>(0, now - *latest);
  }
  s.stale = s.data_age > config_.staleness_s;
  s.color = thresholds::classify(s.r_t, b->scheme);
  s.r_w_range = thresholds::band_of(s.color);
  s.expected_cruise_minutes = b->display.minutes(s.color);
  s.cruise_label = b->display.label(s.color);
  return s;
}

ingest::OccupancySeries InfoService::series(TimeRange range, ingest::SeriesSource source) const {
  using ingest::SeriesSource;
  if (source == SeriesSource::WholeGroundTruth) {
    throw DomainError("ground truth is not available from a live service");
  }
  std::optional<analytics::QuantileLine> line;
  if (source == SeriesSource::WholeInferred) {
    line = bundle()->quantile_line;
    if (!line) throw UnavailableError("the loaded scheme carries no quantile line");
  }
  ingest::OccupancySeries s;
  {
    std::shared_lock lock(store_mu_);
    s = store_.occupancy_series(spots_, range);
  }
  if (line) {
    for (auto& v : s.values) v = line->infer(v);
    s.source = SeriesSource::WholeInferred;
  }
  return s;
}

Ack InfoService::ingest(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw TruncationError("empty request body");
  const auto batches = codec::decode_stream(bytes);
  Ack ack;
  ack.frames = batches.size();
  std::unique_lock lock(store_mu_);
  for (const auto& batch : batches) {
    try {
      const auto r = store_.ingest(batch);
      ack.accepted += r.accepted_records;
      ack.events += r.events.size();
      ack.duplicates += r.duplicate ? 1 : 0;
    } catch (const LateDataError&) {
      ack.late_dropped += batch.records.size();
    }
  }
  return ack;
}

}  // namespace smartpark::service
