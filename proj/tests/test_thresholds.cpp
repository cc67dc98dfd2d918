#include <doctest.h>

#include <random>

#include "smartpark/errors.hpp"
#include "smartpark/thresholds.hpp"

using namespace smartpark;
using namespace smartpark::thresholds;

namespace {

std::vector<OccupancyPair> pairs_of(std::initializer_list<std::pair<double, double>> v) {
  std::vector<OccupancyPair> out;
  UnixSeconds t = 1380616200;  // 08:30
  for (const auto& [rt, rw] : v) {
    out.push_back({t, rt, rw});
    t += 300;
  }
  return out;
}

}  // namespace

TEST_CASE("classify follows closed upper band edges") {
  const ColorScheme s{0.12, 0.64};
  CHECK(classify(0.0, s) == Color::Green);
  CHECK(classify(0.12, s) == Color::Green);
  CHECK(classify(0.1200001, s) == Color::Orange);
  CHECK(classify(0.64, s) == Color::Orange);
  CHECK(classify(0.65, s) == Color::Red);
  CHECK(classify(1.0, s) == Color::Red);
  CHECK_THROWS_AS(classify(-0.01, s), DomainError);
  CHECK_THROWS_AS(classify(1.01, s), DomainError);
  CHECK(to_string(Color::Orange) == "orange");
}

TEST_CASE("scheme and cost validation") {
  CHECK_THROWS_AS((ColorScheme{0.5, 0.5}.validate()), DomainError);
  CHECK_THROWS_AS((ColorScheme{-0.1, 0.5}.validate()), DomainError);
  CHECK_NOTHROW((ColorScheme{0.0, 1.0}.validate()));
  CHECK_NOTHROW(CostSpec{}.validate());
  CHECK_THROWS_AS((CostSpec{4, 7, 10, 5, 0.05, 0.05}.validate()), ConfigError);
  CHECK_THROWS_AS((CostSpec{7, 4, 10, 5, 1.5, 0.05}.validate()), ConfigError);
}

TEST_CASE("band mapping") {
  CHECK(true_color(0.85) == Color::Green);
  CHECK(true_color(0.8500001) == Color::Orange);
  CHECK(true_color(0.95) == Color::Orange);
  CHECK(true_color(0.96) == Color::Red);
  CHECK(band_of(Color::Orange).low == 0.85);
  CHECK(band_of(Color::Orange).high == 0.95);
}

TEST_CASE("error rates: direct counts") {
  const auto p = pairs_of({{0.05, 0.90}, {0.30, 0.90}, {0.0, 0.5}, {0.9, 0.99}});
  const auto r = error_rates(p, 0.12, 0.64);
  CHECK(r.p_md1 == Rate{1, 2});
  CHECK(r.p_fa2 == Rate{0, 2});
  CHECK(r.p_md2 == Rate{0, 1});
  CHECK(r.p_fa1 == Rate{0, 1});
}

TEST_CASE("error rates: delta1 = 0 boundary") {
  const auto p = pairs_of({{0.0, 0.5}, {0.2, 0.6}, {0.3, 0.7}, {0.0, 0.9}, {0.5, 0.97}});
  const auto r = error_rates(p, 0.0, 0.5);
  CHECK(r.p_md1 == Rate{1, 1});  // the mid-band pair has r_t = 0 <= 0
  CHECK(r.p_fa1 == Rate{2, 3});
}

TEST_CASE("error rates: empty bin names the bin") {
  const auto p = pairs_of({{0.1, 0.5}, {0.9, 0.99}});
  try {
    (void)error_rates(p, 0.1, 0.5);
    FAIL("expected UndefinedRateError");
  } catch (const UndefinedRateError& e) {
    CHECK(std::string(e.what()).find("0.85 < r_w <= 0.95") != std::string::npos);
  }
}

TEST_CASE("error rates are monotone in the thresholds") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<OccupancyPair> p;
    for (int i = 0; i < 60; ++i) p.push_back({0, u(rng), 0.7 + 0.3 * u(rng)});
    p.push_back({0, 0.1, 0.5});
    p.push_back({0, 0.1, 0.9});
    p.push_back({0, 0.1, 0.99});
    ErrorRates prev = error_rates(p, 0.0, 0.0);
    for (int k = 1; k <= 100; ++k) {
      const auto r = error_rates(p, k / 100.0, k / 100.0);
      CHECK(r.p_md1.num >= prev.p_md1.num);
      CHECK(r.p_md2.num >= prev.p_md2.num);
      CHECK(r.p_fa1.num <= prev.p_fa1.num);
      CHECK(r.p_fa2.num <= prev.p_fa2.num);
      prev = r;
    }
  }
}

TEST_CASE("optimizer: separable data hits zero cost") {
  // r_t = 0.2 exactly where r_w reaches 0.85 and 0.7 where it exceeds 0.95.
  std::vector<OccupancyPair> p;
  for (int i = 0; i <= 100; ++i) {
    const double rw = 0.5 + 0.5 * i / 100.0;
    const double rt = rw <= 0.85 ? 0.1 * i / 70.0 : (rw <= 0.95 ? 0.25 + 0.01 * (i % 5) : 0.75);
    p.push_back({0, rt, rw});
  }
  const auto opt = optimize(p, CostSpec{});
  CHECK(opt.objective == 0.0);
  CHECK(opt.scheme.delta1 >= 0.10);
  CHECK(opt.scheme.delta1 < 0.25);
  CHECK(opt.scheme.delta2 >= 0.29);
  CHECK(opt.scheme.delta2 < 0.75);
  // Ties go to the smallest thresholds.
  CHECK(opt.scheme.delta1 == doctest::Approx(0.10));
  CHECK(opt.scheme.delta2 == doctest::Approx(0.29));
}

TEST_CASE("optimizer: infeasible tolerances") {
  const auto p = pairs_of({{1.0, 0.5}, {0.2, 0.9}, {0.9, 0.99}});
  const CostSpec c{7, 4, 10, 5, 0.0, 0.0};
  try {
    (void)optimize(p, c);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(std::string(e.what()).find("P_FA1 = 1") != std::string::npos);
  }
  CHECK_THROWS_AS((void)optimize(p, CostSpec{}, 0.2), DomainError);
  CHECK_THROWS_AS((void)optimize(p, CostSpec{}, 0.0), DomainError);
}

TEST_CASE("evaluate scheme") {
  const auto p = pairs_of({{0.05, 0.80}, {0.30, 0.90}, {0.80, 0.99}, {0.05, 0.99}});
  const auto e = evaluate_scheme({0.12, 0.64}, p, parse_day_window("08:30-10:30"));
  CHECK(e.windows == 4);
  CHECK(e.errors == 1);
  CHECK(e.error_rate == 0.25);
  CHECK_THROWS_AS((void)evaluate_scheme({0.12, 0.64}, p, parse_day_window("12:00-13:00")),
                  RangeError);
}
