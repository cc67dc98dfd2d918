#include "smartpark/artifacts.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "smartpark/errors.hpp"

namespace smartpark::artifacts {
namespace {

using nlohmann::ordered_json;

ordered_json rate_json(const thresholds::Rate& r) {
  return ordered_json{{"num", r.num}, {"den", r.den}, {"value", r.value()}};
}

nlohmann::json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

template <typename T>
T field(const nlohmann::json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw ParseError(path + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": field '" + key + "': " + e.what());
  }
}

}  // namespace

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

std::string scheme_json(const OptimizeRecord& rec) {
  const auto& o = rec.optimum;
  ordered_json j;
  j["delta1"] = o.scheme.delta1;
  j["delta2"] = o.scheme.delta2;
  j["r_w_cutoffs"] = {thresholds::kLowCutoff, thresholds::kHighCutoff};
  j["objective"] = o.objective;
  j["rates"] = ordered_json{{"p_md1", rate_json(o.rates.p_md1)},
                            {"p_md2", rate_json(o.rates.p_md2)},
                            {"p_fa1", rate_json(o.rates.p_fa1)},
                            {"p_fa2", rate_json(o.rates.p_fa2)}};
  j["cost"] = ordered_json{{"c_md1", rec.cost.c_md1},
                           {"c_fa1", rec.cost.c_fa1},
                           {"c_md2", rec.cost.c_md2},
                           {"c_fa2", rec.cost.c_fa2}};
  j["fa_tolerance"] = {rec.cost.fa_tol1, rec.cost.fa_tol2};
  j["grid_step"] = rec.grid_step;
  j["candidates"] = o.candidates;
  j["feasible"] = o.feasible;
  j["training_pairs"] = rec.training_pairs;
  if (rec.quantile_line) {
    j["quantile_line"] = ordered_json{{"tau", rec.quantile_line->tau},
                                      {"slope", rec.quantile_line->slope},
                                      {"intercept", rec.quantile_line->intercept}};
  }
  return j.dump(2) + "\n";
}

void write_scheme(const OptimizeRecord& record, const std::string& path) {
  write_text(scheme_json(record), path);
}

SchemeFile read_scheme(const std::string& path) {
  const auto j = load(path);
  SchemeFile s;
  s.scheme.delta1 = field<double>(j, "delta1", path);
  s.scheme.delta2 = field<double>(j, "delta2", path);
  s.scheme.validate();
  if (j.contains("quantile_line")) {
    const auto& q = j.at("quantile_line");
    s.quantile_line = analytics::QuantileLine{field<double>(q, "slope", path),
                                              field<double>(q, "intercept", path),
                                              field<double>(q, "tau", path)};
  }
  return s;
}

std::string model_json(const ModelRecord& rec) {
  ordered_json j;
  j["alpha"] = rec.model.alpha;
  j["beta"] = rec.model.beta;
  j["train_mape"] = rec.cv.train_mape;
  j["test_mape"] = rec.cv.test_mape;
  j["folds"] = rec.cv.folds;
  j["seed"] = rec.cv.seed;
  j["excluded_zero_T"] = rec.cv.excluded_zero;
  j["observations"] = rec.observations;
  j["display"] = ordered_json{{"seconds_at_0_85", rec.display.seconds_low},
                              {"seconds_at_0_95", rec.display.seconds_high},
                              {"minutes_at_0_85", rec.display.minutes_low},
                              {"minutes_at_0_95", rec.display.minutes_high}};
  return j.dump(2) + "\n";
}

void write_model(const ModelRecord& record, const std::string& path) {
  write_text(model_json(record), path);
}

cruise::CruiseModel read_model(const std::string& path) {
  const auto j = load(path);
  cruise::CruiseModel m;
  m.alpha = field<double>(j, "alpha", path);
  m.beta = field<double>(j, "beta", path);
  if (j.contains("train_mape")) m.train_mape = j.at("train_mape").get<double>();
  if (j.contains("test_mape")) m.test_mape = j.at("test_mape").get<double>();
  if (!(m.alpha >= 0.0 && m.beta >= 0.0)) {
    throw DomainError(path + ": cruise model needs alpha >= 0 and beta >= 0");
  }
  return m;
}

}  // namespace smartpark::artifacts
