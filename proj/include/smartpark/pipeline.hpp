// Glue shared by the CLI, the Python module and the end-to-end tests.
#pragma once

#include <map>
#include <span>
#include <vector>

#include "smartpark/analytics.hpp"
#include "smartpark/sim.hpp"
#include "smartpark/store.hpp"

namespace smartpark::pipeline {

struct IngestSummary {
  std::size_t frames{0};
  std::size_t accepted_records{0};
  std::size_t duplicates{0};
  std::size_t late_dropped{0};
  std::size_t events{0};
};

/// Feeds every batch to the store (late batches are counted, not fatal) and flushes.
IngestSummary ingest_all(ingest::Store& store, std::span<const codec::UplinkBatch> batches);

/// Sensor ids 0..count-1.
std::vector<std::uint16_t> spot_ids(int count);

/// Measured top-floor occupancy at every covered 5-minute boundary.
ingest::OccupancySeries measured_series(const ingest::Store& store,
                                        std::span<const std::uint16_t> spots);

/// Whole-structure r_w keyed by window start, from simulator truth or its CSV.
std::map<UnixSeconds, double> truth_by_window(std::span<const sim::WindowTruth> windows);
std::map<UnixSeconds, double> read_truth_csv(const std::string& path);

/// Joins measured r_t with true r_w on window start; windows missing from
/// either side are skipped.
std::vector<analytics::OccupancyPair> join_pairs(const ingest::OccupancySeries& measured,
                                                 const std::map<UnixSeconds, double>& r_w);

/// simulate -> encode -> decode -> ingest -> join, in memory.
std::vector<analytics::OccupancyPair> simulate_pairs(const sim::Scenario& scenario, TimeRange horizon);

}  // namespace smartpark::pipeline
