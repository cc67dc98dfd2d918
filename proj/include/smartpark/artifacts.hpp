#pragma once

#include <optional>
#include <string>

#include "smartpark/analytics.hpp"
#include "smartpark/cruise.hpp"
#include "smartpark/thresholds.hpp"

namespace smartpark::artifacts {

/// Contents of scheme.json as the service needs them.
struct SchemeFile {
  thresholds::ColorScheme scheme;
  std::optional<analytics::QuantileLine> quantile_line;
};

struct OptimizeRecord {
  thresholds::Optimum optimum;
  thresholds::CostSpec cost;
  double grid_step{0.01};
  int training_pairs{0};
  std::optional<analytics::QuantileLine> quantile_line;
};

std::string scheme_json(const OptimizeRecord& record);
void write_scheme(const OptimizeRecord& record, const std::string& path);
/// Throws ConfigError on unreadable files, ParseError on malformed JSON and
/// DomainError on invalid thresholds.
SchemeFile read_scheme(const std::string& path);

struct ModelRecord {
  cruise::CruiseModel model;
  cruise::CrossValidation cv;
  cruise::DisplayTimes display;
  int observations{0};
};

std::string model_json(const ModelRecord& record);
void write_model(const ModelRecord& record, const std::string& path);
cruise::CruiseModel read_model(const std::string& path);

/// Writes text to path, replacing any previous file.
void write_text(const std::string& text, const std::string& path);

}  // namespace smartpark::artifacts
