#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "smartpark/analytics.hpp"

namespace smartpark::thresholds {

using analytics::OccupancyPair;

enum class Color { Green, Orange, Red };

std::string to_string(Color c);

// Whole-structure cutoffs that define what each color promises.
inline constexpr double kLowCutoff = 0.85;
inline constexpr double kHighCutoff = 0.95;

/// r_w interval a color stands for: green [0, 0.85], orange (0.85, 0.95], red (0.95, 1].
struct Band {
  double low{0.0};
  double high{0.0};
};
Band band_of(Color c) noexcept;
Color true_color(double r_w) noexcept;

struct ColorScheme {
  double delta1{0.12};
  double delta2{0.64};

  /// Throws DomainError unless 0 <= delta1 < delta2 <= 1.
  void validate() const;
};

/// green iff r_t <= delta1, orange iff delta1 < r_t <= delta2, red otherwise.
/// Throws DomainError for r_t outside [0, 1].
Color classify(double r_t, const ColorScheme& scheme);

struct CostSpec {
  double c_md1{7.0};
  double c_fa1{4.0};
  double c_md2{10.0};
  double c_fa2{5.0};
  double fa_tol1{0.05};
  double fa_tol2{0.05};

  /// Requires c_md2 >= c_md1 >= c_fa2 >= c_fa1 >= 0 and tolerances in [0, 1].
  void validate() const;
};

/// Exact count ratio. den is never 0 for a rate that was returned.
struct Rate {
  std::int64_t num{0};
  std::int64_t den{1};

  [[nodiscard]] double value() const noexcept {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  friend bool operator==(const Rate&, const Rate&) = default;
};

struct ErrorRates {
  Rate p_md1;  // r_t <= delta1 given 0.85 < r_w <= 0.95
  Rate p_md2;  // r_t <= delta2 given r_w > 0.95
  Rate p_fa1;  // r_t >  delta1 given r_w <= 0.85
  Rate p_fa2;  // r_t >  delta2 given 0.85 < r_w <= 0.95
};

/// Throws UndefinedRateError naming the first empty conditioning bin.
ErrorRates error_rates(std::span<const OccupancyPair> pairs, double delta1, double delta2);

double objective(const CostSpec& cost, const ErrorRates& rates) noexcept;

struct Optimum {
  ColorScheme scheme;
  ErrorRates rates;
  double objective{0.0};
  int candidates{0};  // grid pairs examined
  int feasible{0};
};

/// Exhaustive search over grid values delta = k * step with delta1 < delta2.
/// Objective ties (within 1e-12) go to the smallest delta1, then delta2.
/// Throws UndefinedRateError for an empty bin, DomainError for a bad step and
/// InfeasibleError when no grid pair meets both false-alarm tolerances.
Optimum optimize(std::span<const OccupancyPair> pairs, const CostSpec& cost, double step = 0.01);

struct Evaluation {
  double error_rate{0.0};
  int windows{0};
  int errors{0};
};

/// Fraction of windows inside `window` whose displayed color promises an r_w
/// band that does not contain the true r_w. Reported as "mse" in artifacts.
/// Throws RangeError when no window falls inside.
Evaluation evaluate_scheme(const ColorScheme& scheme, std::span<const OccupancyPair> pairs,
                           DayWindow window);

}  // namespace smartpark::thresholds
