#include "smartpark/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "smartpark/csv.hpp"
#include "smartpark/errors.hpp"

namespace smartpark::analytics {
namespace {

double rho(double u, double tau) { return u >= 0.0 ? tau * u : (tau - 1.0) * u; }

// Pairwise-slope enumeration stays exact up to this many points; beyond it
// the slope is located by golden-section search on the (convex) profile loss.
constexpr std::size_t kExactLimit = 3000;

class ProfileLoss {
public:
  ProfileLoss(std::span<const OccupancyPair> pairs, double tau)
      : pairs_(pairs), tau_(tau), residuals_(pairs.size()) {
    const auto n = static_cast<double>(pairs.size());
    rank_ = static_cast<std::size_t>(std::ceil(tau * n - 1e-12));
    rank_ = std::clamp<std::size_t>(rank_, 1, pairs.size()) - 1;
  }

  // Best intercept for a fixed slope: the rank-th order statistic of the residuals.
  double intercept(double slope) {
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      residuals_[i] = pairs_[i].r_w - slope * pairs_[i].r_t;
    }
    std::nth_element(residuals_.begin(), residuals_.begin() + static_cast<long>(rank_),
                     residuals_.end());
    return residuals_[rank_];
  }

  double operator()(double slope) {
    const double a = intercept(slope);
    double loss = 0.0;
    for (const auto& p : pairs_) loss += rho(p.r_w - a - slope * p.r_t, tau_);
    return loss;
  }

private:
  std::span<const OccupancyPair> pairs_;
  double tau_;
  std::vector<double> residuals_;
  std::size_t rank_{0};
};

}  // namespace

double QuantileLine::infer(double r_t) const noexcept {
  return std::clamp(predict(r_t), 0.0, 1.0);
}

double pinball_loss(std::span<const OccupancyPair> pairs, double slope, double intercept,
                    double tau) {
  double loss = 0.0;
  for (const auto& p : pairs) loss += rho(p.r_w - intercept - slope * p.r_t, tau);
  return loss;
}

QuantileLine fit_quantile_line(std::span<const OccupancyPair> pairs, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  if (pairs.size() < 10) {
    throw FitError("quantile line needs at least 10 pairs, got " + std::to_string(pairs.size()));
  }
  const auto [lo_it, hi_it] = std::minmax_element(
      pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.r_t < b.r_t; });
  if (lo_it->r_t == hi_it->r_t) throw FitError("r_t has zero variance; slope is undefined");

  ProfileLoss loss(pairs, tau);
  double best_slope = 0.0;

  if (pairs.size() <= kExactLimit) {
    std::vector<double> slopes;
    slopes.reserve(pairs.size() * (pairs.size() - 1) / 2);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      for (std::size_t j = i + 1; j < pairs.size(); ++j) {
        const double dx = pairs[j].r_t - pairs[i].r_t;
        if (dx != 0.0) slopes.push_back((pairs[j].r_w - pairs[i].r_w) / dx);
      }
    }
    std::sort(slopes.begin(), slopes.end());
    slopes.erase(std::unique(slopes.begin(), slopes.end()), slopes.end());
    // The loss restricted to sorted breakpoints is a convex sequence: find
    // the first index whose forward difference is non-negative.
    std::size_t lo = 0;
    std::size_t hi = slopes.size() - 1;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (loss(slopes[mid + 1]) >= loss(slopes[mid])) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    best_slope = slopes[lo];
  } else {
    // r_w lives in [0, 1], so useful slopes are bounded by 1 / range(r_t).
    const double span_t = hi_it->r_t - lo_it->r_t;
    double a = -4.0 / span_t;
    double b = 4.0 / span_t;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = loss(c);
    double fd = loss(d);
    for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = loss(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = loss(d);
      }
    }
    best_slope = fc <= fd ? c : d;
  }

  return QuantileLine{best_slope, loss.intercept(best_slope), tau};
}

std::vector<TimedValue> ratio_curve(std::span<const OccupancyPair> pairs) {
  std::vector<TimedValue> out;
  for (const auto& p : pairs) {
    if (p.r_w > 0.0) out.push_back({p.window_start, p.r_t / p.r_w});
  }
  if (out.empty()) throw EmptySeriesError("every window has r_w == 0; ratio undefined");
  return out;
}

std::vector<TimedValue> backward_increment(std::span<const TimedValue> series, int span) {
  if (span < 2) throw DomainError("increment span must be >= 2");
  const auto s = static_cast<std::size_t>(span);
  if (series.size() < s) {
    throw RangeError("series of length " + std::to_string(series.size()) +
                     " is shorter than span " + std::to_string(span));
  }
  std::vector<TimedValue> out;
  for (std::size_t t = s - 1; t < series.size(); ++t) {
    const double base = series[t - (s - 1)].value;
    if (base == 0.0) continue;
    out.push_back({series[t].t, (series[t].value - base) / base});
  }
  return out;
}

std::vector<std::vector<OccupancyPair>> contiguous_runs(std::span<const OccupancyPair> pairs) {
  std::vector<std::vector<OccupancyPair>> runs;
  for (const auto& p : pairs) {
    if (runs.empty() || p.window_start != runs.back().back().window_start + kWindowSeconds) {
      runs.emplace_back();
    }
    runs.back().push_back(p);
  }
  return runs;
}

InitialThresholds initial_thresholds(std::span<const OccupancyPair> pairs) {
  const bool full = std::any_of(pairs.begin(), pairs.end(),
                                [](const auto& p) { return p.r_w >= 0.95; });
  if (!full) throw DomainError("pairs never reach r_w >= 0.95; no full fill cycle");

  InitialThresholds out;
  bool have1 = false;
  bool have2 = false;
  double best_gradient = -std::numeric_limits<double>::infinity();

  for (const auto& run : contiguous_runs(pairs)) {
    // Ratio curve, itself split wherever r_w == 0 removed a window.
    std::vector<OccupancyPair> nonzero;
    for (const auto& p : run) {
      if (p.r_w > 0.0) nonzero.push_back(p);
    }
    for (const auto& piece : contiguous_runs(nonzero)) {
      if (piece.size() < 3) continue;
      const auto ratio = ratio_curve(piece);
      for (const auto& inc : backward_increment(ratio, 3)) {
        if (inc.value <= 0.5) continue;
        const auto it = std::find_if(piece.begin(), piece.end(),
                                     [&](const auto& p) { return p.window_start == inc.t; });
        if (!have1 || it->r_t < out.delta1) {
          out.delta1 = it->r_t;
          out.delta1_window = it->window_start;
          have1 = true;
        }
      }
    }

    if (run.size() < 3) continue;
    std::vector<TimedValue> top;
    for (const auto& p : run) top.push_back({p.window_start, p.r_t});
    const auto gradients = backward_increment(top, 2);
    for (const auto& g : gradients) {
      // Needs a following step inside this run.
      const auto next = g.t + kWindowSeconds;
      if (next > run.back().window_start) continue;
      if (g.value > best_gradient) {
        best_gradient = g.value;
        const auto& follower = run[static_cast<std::size_t>((next - run.front().window_start) /
                                                            kWindowSeconds)];
        out.delta2 = follower.r_t;
        out.delta2_window = follower.window_start;
        have2 = true;
      }
    }
  }
  if (!have1) throw NoThresholdError("ratio-curve increment never exceeds 50%");
  if (!have2) throw NoThresholdError("top-floor occupancy never increases");
  out.delta1 = std::clamp(out.delta1, 0.0, 1.0);
  out.delta2 = std::clamp(out.delta2, 0.0, 1.0);
  return out;
}

std::vector<OccupancyPair> restrict_to(std::span<const OccupancyPair> pairs, DayWindow window) {
  std::vector<OccupancyPair> out;
  for (const auto& p : pairs) {
    if (window.contains(p.window_start)) out.push_back(p);
  }
  return out;
}

std::vector<HistogramBin> kde_histogram(std::span<const double> values, int bins) {
  if (bins < 1) throw DomainError("need at least one bin");
  if (values.empty()) throw EmptySeriesError("no values to histogram");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn;
  const double hi = *mx > *mn ? *mx : *mn + 1.0;
  const double width = (hi - lo) / bins;

  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  const double h = sd > 0.0 ? 1.06 * sd * std::pow(n, -0.2) : width;

  std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    out[b].lo = lo + b * width;
    out[b].hi = lo + (b + 1) * width;
  }
  for (double v : values) {
    auto b = static_cast<int>((v - lo) / width);
    out[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))].count++;
  }
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
  for (auto& bin : out) {
    const double c = 0.5 * (bin.lo + bin.hi);
    double d = 0.0;
    for (double v : values) d += std::exp(-0.5 * ((c - v) / h) * ((c - v) / h));
    bin.density = d * norm;
  }
  return out;
}

std::vector<OccupancyPair> read_pairs_csv(const std::string& path) {
  const auto t = csv::read(path);
  const auto cw = t.column("window_start");
  const auto ct = t.column("r_t");
  const auto cr = t.column("r_w");
  std::vector<OccupancyPair> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    OccupancyPair p{csv::to_int(row[cw], path), csv::to_double(row[ct], path),
                    csv::to_double(row[cr], path)};
    if (!(p.r_t >= 0.0 && p.r_t <= 1.0 && p.r_w >= 0.0 && p.r_w <= 1.0)) {
      throw DomainError(path + ": occupancy outside [0, 1] at " + row[cw]);
    }
    out.push_back(p);
  }
  return out;
}

void write_pairs_csv(std::span<const OccupancyPair> pairs, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw ConfigError("cannot write " + path);
  std::fprintf(f, "window_start,r_t,r_w\n");
  for (const auto& p : pairs) {
    std::fprintf(f, "%lld,%.17g,%.17g\n", static_cast<long long>(p.window_start), p.r_t, p.r_w);
  }
  std::fclose(f);
}

}  // namespace smartpark::analytics
