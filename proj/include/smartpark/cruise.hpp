#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smartpark/thresholds.hpp"

namespace smartpark::cruise {

struct Observation {
  double r{0.0};
  double seconds{0.0};
};

/// T(r) = alpha / (1 - beta r).
struct CruiseModel {
  double alpha{0.0};
  double beta{0.0};
  double train_mape{0.0};
  double test_mape{0.0};

  /// Throws SingularityError when beta * r >= 1.
  [[nodiscard]] double predict(double r) const;
};

/// Sum of squared residuals of (alpha, beta) over the observations.
double sse(std::span<const Observation> obs, double alpha, double beta);

/// Least-squares alpha for a fixed beta: sum(T w) / sum(w^2), w = 1 / (1 - beta r),
/// floored at 0.
double best_alpha(std::span<const Observation> obs, double beta);

/// Upper bound used for beta: (1 - 1e-6) / max r (or 0 when every r is 0).
double beta_limit(std::span<const Observation> obs);

/// Constrained least squares over alpha >= 0, 0 <= beta <= beta_limit.
/// alpha is profiled out in closed form; beta is bracketed on two grids and
/// refined by golden-section search. Needs at least 5 observations with
/// distinct r; throws FitError otherwise. All-zero T gives (0, 0).
CruiseModel fit(std::span<const Observation> obs);

struct CrossValidation {
  double train_mape{0.0};
  double test_mape{0.0};
  int folds{0};
  std::uint64_t seed{0};
  int excluded_zero{0};  // observations with T = 0 left out of MAPE
};

/// Mean absolute percentage error, skipping T = 0. `excluded` receives the
/// number skipped. Throws EvaluationError when every T is 0.
double mape(const CruiseModel& model, std::span<const Observation> obs, int* excluded = nullptr);

/// Shuffles with mt19937_64(seed), splits into `folds` contiguous near-equal
/// folds and averages train/test MAPE. Throws DomainError for folds < 2 or
/// more folds than observations, EvaluationError for an all-zero test fold.
CrossValidation cross_validate(std::span<const Observation> obs, int folds, std::uint64_t seed);

struct DisplayTimes {
  double seconds_low{0.0};   // predict(0.85)
  double seconds_high{0.0};  // predict(0.95)
  int minutes_low{1};
  int minutes_high{1};

  /// Text shown next to each color: green "< X min", orange "X min", red "Y min".
  [[nodiscard]] std::string label(thresholds::Color c) const;
  [[nodiscard]] int minutes(thresholds::Color c) const noexcept;
};

/// Nearest whole minute, halves rounded up, never below 1.
int round_minutes(double seconds);

DisplayTimes display_times(const CruiseModel& model);

/// CSV `r,T_seconds`.
std::vector<Observation> read_observations_csv(const std::string& path);
void write_observations_csv(std::span<const Observation> obs, const std::string& path);

}  // namespace smartpark::cruise
