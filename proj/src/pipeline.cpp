#include "smartpark/pipeline.hpp"

#include <numeric>

#include "smartpark/csv.hpp"
#include "smartpark/errors.hpp"

namespace smartpark::pipeline {

IngestSummary ingest_all(ingest::Store& store, std::span<const codec::UplinkBatch> batches) {
  IngestSummary s;
  for (const auto& b : batches) {
    ++s.frames;
    try {
      const auto r = store.ingest(b);
      s.accepted_records += r.accepted_records;
      s.duplicates += r.duplicate ? 1 : 0;
      s.events += r.events.size();
    } catch (const LateDataError&) {
      s.late_dropped += b.records.size();
    }
  }
  s.events += store.flush().size();
  return s;
}

std::vector<std::uint16_t> spot_ids(int count) {
  std::vector<std::uint16_t> ids(static_cast<std::size_t>(count));
  std::iota(ids.begin(), ids.end(), std::uint16_t{0});
  return ids;
}

ingest::OccupancySeries measured_series(const ingest::Store& store,
                                        std::span<const std::uint16_t> spots) {
  const auto cov = store.covered();
  if (!cov) throw EmptySeriesError("store has no settled 5-minute boundary");
  return store.occupancy_series(spots, {cov->first, cov->second + 1});
}

std::map<UnixSeconds, double> truth_by_window(std::span<const sim::WindowTruth> windows) {
  std::map<UnixSeconds, double> out;
  for (const auto& w : windows) out[w.time] = w.r_w;
  return out;
}

std::map<UnixSeconds, double> read_truth_csv(const std::string& path) {
  const auto t = csv::read(path);
  const auto ct = t.column("time");
  const auto cr = t.column("r_w");
  std::map<UnixSeconds, double> out;
  for (const auto& row : t.rows) out[csv::to_int(row[ct], path)] = csv::to_double(row[cr], path);
  return out;
}

std::vector<analytics::OccupancyPair> join_pairs(const ingest::OccupancySeries& measured,
                                                 const std::map<UnixSeconds, double>& r_w) {
  std::vector<analytics::OccupancyPair> out;
  for (std::size_t i = 0; i < measured.windows.size(); ++i) {
    const auto it = r_w.find(measured.windows[i]);
    if (it == r_w.end()) continue;
    out.push_back({measured.windows[i], measured.values[i], it->second});
  }
  return out;
}

std::vector<analytics::OccupancyPair> simulate_pairs(const sim::Scenario& scenario,
                                                     TimeRange horizon) {
  ingest::StoreOptions opts;
  opts.report_period = scenario.structure.report_period_s;
  ingest::Store store(opts);
  std::vector<std::uint8_t> frame;
  const auto truth = sim::simulate(scenario.structure, scenario.demand, horizon,
                                   [&](const codec::UplinkBatch& b) {
                                     frame = codec::encode(b);
                                     store.ingest(codec::decode(frame));
                                   });
  store.flush();
  const auto spots = spot_ids(scenario.structure.top_floor_spots);
  return join_pairs(measured_series(store, spots), truth_by_window(truth.windows));
}

}  // namespace smartpark::pipeline
