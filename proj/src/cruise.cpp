#include "smartpark/cruise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "smartpark/csv.hpp"
#include "smartpark/errors.hpp"

namespace smartpark::cruise {
namespace {

constexpr int kBracketPoints = 2000;

struct Profile {
  double alpha{0.0};
  double sse{0.0};
};

Profile profile(std::span<const Observation> obs, double beta) {
  double tw = 0.0;
  double ww = 0.0;
  double tt = 0.0;
  for (const auto& o : obs) {
    const double w = 1.0 / (1.0 - beta * o.r);
    tw += o.seconds * w;
    ww += w * w;
    tt += o.seconds * o.seconds;
  }
  if (tw <= 0.0) return {0.0, tt};
  return {tw / ww, std::max(0.0, tt - tw * tw / ww)};
}

void check(std::span<const Observation> obs) {
  for (const auto& o : obs) {
    if (!(o.r >= 0.0 && o.r <= 1.0) || !(o.seconds >= 0.0) || !std::isfinite(o.seconds)) {
      throw DomainError("cruise observation out of domain: r=" + std::to_string(o.r) +
                        " T=" + std::to_string(o.seconds));
    }
  }
}

}  // namespace

double CruiseModel::predict(double r) const {
  if (beta * r >= 1.0) {
    throw SingularityError("cruise time diverges at r=" + std::to_string(r) +
                           " (beta*r >= 1)");
  }
  return alpha / (1.0 - beta * r);
}

double sse(std::span<const Observation> obs, double alpha, double beta) {
  double s = 0.0;
  for (const auto& o : obs) {
    const double e = alpha / (1.0 - beta * o.r) - o.seconds;
    s += e * e;
  }
  return s;
}

double best_alpha(std::span<const Observation> obs, double beta) {
  return profile(obs, beta).alpha;
}

double beta_limit(std::span<const Observation> obs) {
  double r_max = 0.0;
  for (const auto& o : obs) r_max = std::max(r_max, o.r);
  return r_max > 0.0 ? (1.0 - 1e-6) / r_max : 0.0;
}

CruiseModel fit(std::span<const Observation> obs) {
  check(obs);
  if (obs.size() < 5) {
    throw FitError("cruise fit needs at least 5 observations, got " + std::to_string(obs.size()));
  }
  const auto [lo, hi] = std::minmax_element(
      obs.begin(), obs.end(), [](const auto& a, const auto& b) { return a.r < b.r; });
  if (lo->r == hi->r) throw FitError("all observations share one occupancy; beta is unidentifiable");
  if (std::all_of(obs.begin(), obs.end(), [](const auto& o) { return o.seconds == 0.0; })) {
    return CruiseModel{};
  }

  const double b_max = beta_limit(obs);
  const double r_max = hi->r;
  const double u_max = -std::log1p(-b_max * r_max);

  // Candidate betas: uniform in beta, and uniform in -log(1 - beta r_max) to
  // resolve the steep region near the pole.
  std::vector<double> grid;
  grid.reserve(2 * kBracketPoints + 2);
  for (int i = 0; i <= kBracketPoints; ++i) {
    grid.push_back(b_max * i / kBracketPoints);
    const double u = u_max * i / kBracketPoints;
    grid.push_back(std::min(b_max, -std::expm1(-u) / r_max));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::size_t best = 0;
  double best_sse = profile(obs, grid[0]).sse;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double s = profile(obs, grid[i]).sse;
    if (s < best_sse) {
      best_sse = s;
      best = i;
    }
  }

  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[std::min(best + 1, grid.size() - 1)];
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = profile(obs, c).sse;
  double fd = profile(obs, d).sse;
  for (int it = 0; it < 300 && b - a > 1e-15 * std::max(1.0, b); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = profile(obs, c).sse;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = profile(obs, d).sse;
    }
  }

  double beta = grid[best];
  double f = best_sse;
  if (fc < f) {
    beta = c;
    f = fc;
  }
  if (fd < f) beta = d;

  CruiseModel m;
  m.beta = beta;
  m.alpha = profile(obs, beta).alpha;
  if (m.alpha == 0.0) m.beta = 0.0;
  return m;
}

double mape(const CruiseModel& model, std::span<const Observation> obs, int* excluded) {
  double total = 0.0;
  int used = 0;
  int skipped = 0;
  for (const auto& o : obs) {
    if (o.seconds == 0.0) {
      ++skipped;
      continue;
    }
    total += std::abs(model.predict(o.r) - o.seconds) / o.seconds;
    ++used;
  }
  if (excluded != nullptr) *excluded = skipped;
  if (used == 0) throw EvaluationError("every observation has T = 0; MAPE is undefined");
  return 100.0 * total / used;
}

CrossValidation cross_validate(std::span<const Observation> obs, int folds, std::uint64_t seed) {
  if (folds < 2) throw DomainError("cross validation needs at least 2 folds");
  if (obs.size() < static_cast<std::size_t>(folds)) {
    throw DomainError("more folds (" + std::to_string(folds) + ") than observations (" +
                      std::to_string(obs.size()) + ")");
  }
  std::vector<Observation> shuffled(obs.begin(), obs.end());
  std::mt19937_64 rng(seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);

  CrossValidation cv;
  cv.folds = folds;
  cv.seed = seed;
  const std::size_t n = shuffled.size();
  for (int f = 0; f < folds; ++f) {
    const std::size_t begin = n * static_cast<std::size_t>(f) / folds;
    const std::size_t end = n * static_cast<std::size_t>(f + 1) / folds;
    std::vector<Observation> train;
    train.reserve(n - (end - begin));
    train.insert(train.end(), shuffled.begin(), shuffled.begin() + static_cast<long>(begin));
    train.insert(train.end(), shuffled.begin() + static_cast<long>(end), shuffled.end());
    const std::span<const Observation> test(shuffled.data() + begin, end - begin);
    if (std::all_of(test.begin(), test.end(), [](const auto& o) { return o.seconds == 0.0; })) {
      throw EvaluationError("fold " + std::to_string(f) + " has only T = 0 observations");
    }
    const auto model = fit(train);
    cv.train_mape += mape(model, train);
    cv.test_mape += mape(model, test);
  }
  cv.train_mape /= folds;
  cv.test_mape /= folds;
  cv.excluded_zero = static_cast<int>(
      std::count_if(obs.begin(), obs.end(), [](const auto& o) { return o.seconds == 0.0; }));
  return cv;
}

int round_minutes(double seconds) {
  return std::max(1, static_cast<int>(std::floor(seconds / 60.0 + 0.5)));
}

std::string DisplayTimes::label(thresholds::Color c) const {
  if (c == thresholds::Color::Green) return "< " + std::to_string(minutes_low) + " min";
  return std::to_string(minutes(c)) + " min";
}

int DisplayTimes::minutes(thresholds::Color c) const noexcept {
  return c == thresholds::Color::Red ? minutes_high : minutes_low;
}

DisplayTimes display_times(const CruiseModel& model) {
  DisplayTimes d;
  d.seconds_low = model.predict(thresholds::kLowCutoff);
  d.seconds_high = model.predict(thresholds::kHighCutoff);
  d.minutes_low = round_minutes(d.seconds_low);
  d.minutes_high = round_minutes(d.seconds_high);
  return d;
}

std::vector<Observation> read_observations_csv(const std::string& path) {
  const auto t = csv::read(path);
  const auto cr = t.column("r");
  const auto ct = t.column("T_seconds");
  std::vector<Observation> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    out.push_back({csv::to_double(row[cr], path), csv::to_double(row[ct], path)});
  }
  check(out);
  return out;
}

void write_observations_csv(std::span<const Observation> obs, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw ConfigError("cannot write " + path);
  std::fprintf(f, "r,T_seconds\n");
  for (const auto& o : obs) std::fprintf(f, "%.17g,%.17g\n", o.r, o.seconds);
  std::fclose(f);
}

}  // namespace smartpark::cruise
