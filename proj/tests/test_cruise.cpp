#include <doctest.h>

#include <cmath>
#include <random>

#include "smartpark/cruise.hpp"
#include "smartpark/errors.hpp"

using namespace smartpark;
using namespace smartpark::cruise;

namespace {

std::vector<Observation> generate(double alpha, double beta, int n, double noise,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ur(0.05, 0.95);
  std::normal_distribution<double> eps(0.0, noise);
  std::vector<Observation> out;
  for (int i = 0; i < n; ++i) {
    const double r = ur(rng);
    out.push_back({r, alpha / (1.0 - beta * r) * (1.0 + eps(rng))});
  }
  return out;
}

// Coarse-to-fine bounded grid search over (alpha, beta), written without the
// profile trick.
double grid_best_sse(const std::vector<Observation>& obs, int points) {
  double t_max = 0.0;
  for (const auto& o : obs) t_max = std::max(t_max, o.seconds);
  const double b_max = beta_limit(obs);
  double a_lo = 0.0, a_hi = 2.0 * t_max, b_lo = 0.0, b_hi = b_max;
  double best = std::numeric_limits<double>::infinity();
  double best_a = 0.0, best_b = 0.0;
  for (int round = 0; round < 4; ++round) {
    for (int i = 0; i <= points; ++i) {
      const double a = a_lo + (a_hi - a_lo) * i / points;
      for (int j = 0; j <= points; ++j) {
        const double b = b_lo + (b_hi - b_lo) * j / points;
        const double s = sse(obs, a, b);
        if (s < best) {
          best = s;
          best_a = a;
          best_b = b;
        }
      }
    }
    const double da = 2.0 * (a_hi - a_lo) / points;
    const double db = 2.0 * (b_hi - b_lo) / points;
    a_lo = std::max(0.0, best_a - da);
    a_hi = best_a + da;
    b_lo = std::max(0.0, best_b - db);
    b_hi = std::min(b_max, best_b + db);
  }
  return best;
}

}  // namespace

TEST_CASE("predict closed form") {
  const CruiseModel m{17.2678, 0.9946};
  CHECK(m.predict(0.0) == 17.2678);
  CHECK(std::abs(m.predict(0.85) - 111.70) < 0.01);
  CHECK(std::abs(m.predict(0.95) - 313.22) < 0.01);
  const CruiseModel pole{10, 2.0};
  CHECK_THROWS_AS((void)pole.predict(0.5), SingularityError);
  double prev = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = m.predict(i / 100.0);
    CHECK(t > prev);
    prev = t;
  }
}

TEST_CASE("display times") {
  const auto d = display_times(CruiseModel{17.2678, 0.9946});
  CHECK(d.minutes_low == 2);
  CHECK(d.minutes_high == 5);
  CHECK(d.label(thresholds::Color::Green) == "< 2 min");
  CHECK(d.label(thresholds::Color::Orange) == "2 min");
  CHECK(d.label(thresholds::Color::Red) == "5 min");
  const auto flat = display_times(CruiseModel{30, 0});
  CHECK(flat.minutes_low == 1);
  CHECK(flat.minutes_high == 1);
  CHECK(round_minutes(108.89) == 2);
  CHECK(round_minutes(290.08) == 5);
  CHECK(round_minutes(90.0) == 2);
  CHECK(round_minutes(0.0) == 1);
  const CruiseModel steep{10, 1.06};
  CHECK_THROWS_AS((void)display_times(steep), SingularityError);
}

TEST_CASE("fit recovers noiseless parameters") {
  std::vector<Observation> obs;
  for (int i = 1; i <= 9; ++i) obs.push_back({i / 10.0, 20.0 / (1.0 - 0.9 * i / 10.0)});
  const auto m = fit(obs);
  CHECK(std::abs(m.alpha - 20.0) < 1e-3);
  CHECK(std::abs(m.beta - 0.9) < 1e-3);
  const auto cv = cross_validate(obs, 3, 1);
  CHECK(cv.train_mape < 0.01);
  CHECK(cv.test_mape < 0.01);
}

TEST_CASE("fit: constant T gives beta = 0") {
  std::vector<Observation> obs;
  for (int i = 0; i < 10; ++i) obs.push_back({i / 10.0, 42.0});
  const auto m = fit(obs);
  CHECK(m.beta == doctest::Approx(0.0).epsilon(1e-9).scale(1));
  CHECK(m.alpha == doctest::Approx(42.0).epsilon(1e-9));
}

TEST_CASE("fit errors and degenerate inputs") {
  const std::vector<Observation> four{{0.1, 1}, {0.2, 2}, {0.3, 3}, {0.4, 4}};
  const std::vector<Observation> same(6, {0.5, 10.0});
  const std::vector<Observation> bad_r{{0.1, 1}, {0.2, 2}, {1.3, 3}, {0.4, 4}, {0.5, 5}};
  const std::vector<Observation> bad_t{{0.1, -1}, {0.2, 2}, {0.3, 3}, {0.4, 4}, {0.5, 5}};
  CHECK_THROWS_AS((void)fit(four), FitError);
  CHECK_THROWS_AS((void)fit(same), FitError);
  CHECK_THROWS_AS((void)fit(bad_r), DomainError);
  CHECK_THROWS_AS((void)fit(bad_t), DomainError);
  std::vector<Observation> zeros;
  for (int i = 0; i < 6; ++i) zeros.push_back({i / 10.0, 0.0});
  const auto m = fit(zeros);
  CHECK(m.alpha == 0.0);
  CHECK(m.beta == 0.0);
  CHECK_THROWS_AS((void)mape(m, zeros), EvaluationError);
}

TEST_CASE("fit: inner alpha is exact and the optimum is local") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto obs = generate(20.0, 0.9, 200, 0.05, seed);
    const auto m = fit(obs);
    double tw = 0.0, ww = 0.0;
    for (const auto& o : obs) {
      const double w = 1.0 / (1.0 - m.beta * o.r);
      tw += o.seconds * w;
      ww += w * w;
    }
    CHECK(std::abs(m.alpha - tw / ww) <= 1e-9 * std::max(1.0, m.alpha));
    const double f = sse(obs, m.alpha, m.beta);
    const double b_max = beta_limit(obs);
    for (double da : {-1e-4, 1e-4}) CHECK(sse(obs, m.alpha + da, m.beta) >= f);
    for (double db : {-1e-4, 1e-4}) {
      const double b = m.beta + db;
      if (b >= 0.0 && b <= b_max) CHECK(sse(obs, m.alpha, b) >= f);
    }
    CHECK(std::abs(m.alpha - 20.0) < 1.0);
    CHECK(std::abs(m.beta - 0.9) < 0.045);
  }
}

TEST_CASE("fit matches a bounded grid search") {
  for (std::uint64_t seed = 21; seed <= 23; ++seed) {
    const auto obs = generate(15.0, 0.7 + 0.1 * static_cast<double>(seed - 21), 40, 0.1, seed);
    const auto m = fit(obs);
    const double grid = grid_best_sse(obs, 200);
    CHECK(sse(obs, m.alpha, m.beta) <= grid * (1.0 + 1e-6));
  }
}

TEST_CASE("fit is scale equivariant") {
  const auto obs = generate(25.0, 0.8, 100, 0.05, 5);
  auto scaled = obs;
  for (auto& o : scaled) o.seconds *= 7.5;
  const auto a = fit(obs);
  const auto b = fit(scaled);
  CHECK(std::abs(b.beta - a.beta) < 1e-3);
  CHECK(std::abs(b.alpha / 7.5 - a.alpha) < 1e-3 * a.alpha);
}

TEST_CASE("cross validation") {
  const auto obs = generate(20.0, 0.9, 10, 0.05, 9);
  const auto loo = cross_validate(obs, 10, 3);
  CHECK(std::isfinite(loo.train_mape));
  CHECK(std::isfinite(loo.test_mape));
  CHECK(loo.folds == 10);
  CHECK_THROWS_AS((void)cross_validate(obs, 1, 3), DomainError);
  CHECK_THROWS_AS((void)cross_validate(obs, 11, 3), DomainError);

  const auto many = generate(20.0, 0.9, 100, 0.05, 10);
  const auto a = cross_validate(many, 5, 77);
  const auto b = cross_validate(many, 5, 77);
  CHECK(a.train_mape == b.train_mape);
  CHECK(a.test_mape == b.test_mape);

  auto with_zero = many;
  with_zero.push_back({0.0, 0.0});
  int excluded = 0;
  (void)mape(fit(with_zero), with_zero, &excluded);
  CHECK(excluded == 1);
  CHECK(cross_validate(with_zero, 5, 77).excluded_zero == 1);
}
