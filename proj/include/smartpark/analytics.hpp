#pragma once

#include <span>
#include <string>
#include <vector>

#include "smartpark/time_util.hpp"

namespace smartpark::analytics {

/// Top-floor and whole-structure occupancy for one 5-minute window.
struct OccupancyPair {
  UnixSeconds window_start{0};
  double r_t{0.0};
  double r_w{0.0};
};

/// r_w = intercept + slope * r_t at quantile level tau.
struct QuantileLine {
  double slope{0.0};
  double intercept{0.0};
  double tau{0.95};

  [[nodiscard]] double predict(double r_t) const noexcept { return intercept + slope * r_t; }
  /// predict() clamped to [0, 1].
  [[nodiscard]] double infer(double r_t) const noexcept;
};

struct TimedValue {
  UnixSeconds t{0};
  double value{0.0};
};

[[nodiscard]] double pinball_loss(std::span<const OccupancyPair> pairs, double slope,
                                  double intercept, double tau);

/// Minimizes the pinball loss of r_w on r_t. The returned intercept is
/// always an order statistic of the residuals, so at most floor((1 - tau) n)
/// points lie strictly above the line. Throws FitError for fewer than 10
/// pairs or constant r_t, DomainError for tau outside (0, 1).
[[nodiscard]] QuantileLine fit_quantile_line(std::span<const OccupancyPair> pairs,
                                             double tau = 0.95);

/// r_t / r_w per window, skipping windows with r_w == 0. Throws
/// EmptySeriesError when nothing is left.
[[nodiscard]] std::vector<TimedValue> ratio_curve(std::span<const OccupancyPair> pairs);

/// Relative change over `span` consecutive samples:
/// (x[t] - x[t - span + 1]) / x[t - span + 1], skipping steps whose base is 0.
/// Throws DomainError for span < 2, RangeError when the series is shorter than span.
[[nodiscard]] std::vector<TimedValue> backward_increment(std::span<const TimedValue> series,
                                                         int span);

struct InitialThresholds {
  double delta1{0.0};
  double delta2{0.0};
  UnixSeconds delta1_window{0};
  UnixSeconds delta2_window{0};
};

/// delta1: smallest r_t where the span-3 increment of the ratio curve exceeds
/// 0.5. delta2: r_t one step after the largest one-step relative increment of
/// r_t. Increments never straddle a gap in the 5-minute grid. Restricting the
/// input to a daily window is the caller's job. Throws DomainError when r_w
/// never reaches 0.95 and NoThresholdError when either rule finds no step.
[[nodiscard]] InitialThresholds initial_thresholds(std::span<const OccupancyPair> pairs);

/// Pairs whose window start falls inside the daily window.
[[nodiscard]] std::vector<OccupancyPair> restrict_to(std::span<const OccupancyPair> pairs,
                                                     DayWindow window);

/// Splits into runs of windows exactly 300 s apart.
[[nodiscard]] std::vector<std::vector<OccupancyPair>> contiguous_runs(
    std::span<const OccupancyPair> pairs);

struct HistogramBin {
  double lo{0.0};
  double hi{0.0};
  int count{0};
  double density{0.0};  // Gaussian KDE at the bin center
};

/// Histogram plus Gaussian kernel density estimate (Silverman bandwidth).
/// Used only for display.
[[nodiscard]] std::vector<HistogramBin> kde_histogram(std::span<const double> values, int bins);

/// CSV `window_start,r_t,r_w`.
std::vector<OccupancyPair> read_pairs_csv(const std::string& path);
void write_pairs_csv(std::span<const OccupancyPair> pairs, const std::string& path);

}  // namespace smartpark::analytics
