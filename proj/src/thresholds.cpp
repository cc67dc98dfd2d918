#include "smartpark/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "smartpark/errors.hpp"

namespace smartpark::thresholds {
namespace {

enum Bin { kLow = 0, kMid = 1, kHigh = 2 };

Bin bin_of(double r_w) noexcept {
  if (r_w <= kLowCutoff) return kLow;
  if (r_w <= kHighCutoff) return kMid;
  return kHigh;
}

const char* bin_name(Bin b) {
  switch (b) {
    case kLow: return "r_w <= 0.85";
    case kMid: return "0.85 < r_w <= 0.95";
    case kHigh: return "r_w > 0.95";
  }
  return "?";
}

// r_t values per conditioning bin, sorted, for O(log n) "r_t <= delta" counts.
struct BinnedSample {
  std::array<std::vector<double>, 3> r_t;

  explicit BinnedSample(std::span<const OccupancyPair> pairs) {
    for (const auto& p : pairs) r_t[bin_of(p.r_w)].push_back(p.r_t);
    for (auto& v : r_t) std::sort(v.begin(), v.end());
    for (Bin b : {kLow, kMid, kHigh}) {
      if (r_t[b].empty()) {
        throw UndefinedRateError(std::string("no pairs with ") + bin_name(b) +
                                 "; the conditional rate is undefined");
      }
    }
  }

  [[nodiscard]] std::int64_t at_most(Bin b, double delta) const {
    const auto& v = r_t[b];
    return std::upper_bound(v.begin(), v.end(), delta) - v.begin();
  }
  [[nodiscard]] std::int64_t size(Bin b) const { return static_cast<std::int64_t>(r_t[b].size()); }

  [[nodiscard]] ErrorRates rates(double delta1, double delta2) const {
    ErrorRates r;
    r.p_md1 = {at_most(kMid, delta1), size(kMid)};
    r.p_md2 = {at_most(kHigh, delta2), size(kHigh)};
    r.p_fa1 = {size(kLow) - at_most(kLow, delta1), size(kLow)};
    r.p_fa2 = {size(kMid) - at_most(kMid, delta2), size(kMid)};
    return r;
  }
};

}  // namespace

std::string to_string(Color c) {
  switch (c) {
    case Color::Green: return "green";
    case Color::Orange: return "orange";
    case Color::Red: return "red";
  }
  return "?";
}

Band band_of(Color c) noexcept {
  switch (c) {
    case Color::Green: return {0.0, kLowCutoff};
    case Color::Orange: return {kLowCutoff, kHighCutoff};
    case Color::Red: return {kHighCutoff, 1.0};
  }
  return {};
}

Color true_color(double r_w) noexcept {
  switch (bin_of(r_w)) {
    case kLow: return Color::Green;
    case kMid: return Color::Orange;
    case kHigh: return Color::Red;
  }
  return Color::Red;
}

void ColorScheme::validate() const {
  if (!(delta1 >= 0.0 && delta1 < delta2 && delta2 <= 1.0)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "thresholds need 0 <= delta1 < delta2 <= 1, got (%g, %g)",
                  delta1, delta2);
    throw DomainError(buf);
  }
}

Color classify(double r_t, const ColorScheme& scheme) {
  if (!(r_t >= 0.0 && r_t <= 1.0)) {
    throw DomainError("top-floor occupancy " + std::to_string(r_t) + " outside [0, 1]");
  }
  if (r_t <= scheme.delta1) return Color::Green;
  if (r_t <= scheme.delta2) return Color::Orange;
  return Color::Red;
}

void CostSpec::validate() const {
  if (!(c_md2 >= c_md1 && c_md1 >= c_fa2 && c_fa2 >= c_fa1 && c_fa1 >= 0.0)) {
    throw ConfigError("cost matrix must satisfy C_MD2 >= C_MD1 >= C_FA2 >= C_FA1 >= 0");
  }
  for (double a : {fa_tol1, fa_tol2}) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("false-alarm tolerance must lie in [0, 1]");
  }
}

ErrorRates error_rates(std::span<const OccupancyPair> pairs, double delta1, double delta2) {
  return BinnedSample(pairs).rates(delta1, delta2);
}

double objective(const CostSpec& cost, const ErrorRates& r) noexcept {
  return cost.c_md1 * r.p_md1.value() + cost.c_fa1 * r.p_fa1.value() +
         cost.c_md2 * r.p_md2.value() + cost.c_fa2 * r.p_fa2.value();
}

Optimum optimize(std::span<const OccupancyPair> pairs, const CostSpec& cost, double step) {
  cost.validate();
  if (!(step > 0.0 && step <= 0.1)) throw DomainError("grid step must lie in (0, 0.1]");
  const BinnedSample sample(pairs);
  const int k_max = static_cast<int>(std::floor(1.0 / step + 1e-9));

  std::vector<double> grid(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) grid[k] = std::min(1.0, k * step);

  // Rates depend on one threshold each, so tabulate them once per grid value.
  std::vector<Rate> md1(grid.size()), fa1(grid.size()), md2(grid.size()), fa2(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto r = sample.rates(grid[k], grid[k]);
    md1[k] = r.p_md1;
    fa1[k] = r.p_fa1;
    md2[k] = r.p_md2;
    fa2[k] = r.p_fa2;
  }

  Optimum best;
  bool found = false;
  double min_fa1 = 1.0;
  double min_fa2 = 1.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    min_fa1 = std::min(min_fa1, fa1[i].value());
    const bool ok1 = fa1[i].value() <= cost.fa_tol1;
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      ++best.candidates;
      min_fa2 = std::min(min_fa2, fa2[j].value());
      if (!ok1 || fa2[j].value() > cost.fa_tol2) continue;
      ++best.feasible;
      const ErrorRates r{md1[i], md2[j], fa1[i], fa2[j]};
      const double obj = objective(cost, r);
      if (!found || obj < best.objective - 1e-12) {
        best.scheme = {grid[i], grid[j]};
        best.rates = r;
        best.objective = obj;
        found = true;
      }
    }
  }
  if (!found) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "no grid pair meets the false-alarm tolerances (%g, %g); "
                  "smallest achievable P_FA1 = %g, P_FA2 = %g",
                  cost.fa_tol1, cost.fa_tol2, min_fa1, min_fa2);
    throw InfeasibleError(buf);
  }
  return best;
}

Evaluation evaluate_scheme(const ColorScheme& scheme, std::span<const OccupancyPair> pairs,
                           DayWindow window) {
  scheme.validate();
  Evaluation e;
  for (const auto& p : pairs) {
    if (!window.contains(p.window_start)) continue;
    ++e.windows;
    if (classify(p.r_t, scheme) != true_color(p.r_w)) ++e.errors;
  }
  if (e.windows == 0) throw RangeError("no windows fall inside the evaluation window");
  e.error_rate = static_cast<double>(e.errors) / e.windows;
  return e;
}

}  // namespace smartpark::thresholds
