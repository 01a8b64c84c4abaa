#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "repel/errors.hpp"
#include "repel/observe.hpp"

using namespace repel;
using std::numbers::pi;

TEST_CASE("spread_total") {
  CHECK(spread_total(std::vector<double>{0.0, 1.0, 2.0}) == 12.0);
  CHECK(spread_total(std::vector<double>{3.0, 3.0, 3.0, 3.0}) == 0.0);
  CHECK(spread_total(std::vector<double>{1.5, -0.5}) == doctest::Approx(2.0 * 4.0));
}

TEST_CASE("spread_window") {
  const std::vector<double> x{0.0, 1.0, 2.0, 10.0};
  CHECK(spread_window(x, {1, 3}) == 12.0);
  CHECK(spread_window(x, {1, 4}) == spread_total(x));
  CHECK(spread_window(std::vector<double>{-5.0, 1.0, 1.0, 1.0, 8.0}, {2, 3}) == 0.0);
  CHECK_THROWS_AS(spread_window(x, {2, 4}), WindowOutOfRange);
  CHECK_THROWS_AS(spread_window(x, {1, 2}), WindowOutOfRange);
  CHECK_THROWS_AS(spread_window(x, {0, 3}), WindowOutOfRange);

  CHECK(windows_of_size(5, 3, Geometry::Line).size() == 3);
  CHECK(windows_of_size(5, 3, Geometry::Circle).size() == 5);
  CHECK(windows_of_size(5, 6, Geometry::Line).empty());
}

TEST_CASE("circular windows wrap past N") {
  // Particles 4, 1, 2 are clustered across the 0 / 2pi seam.
  const std::vector<double> x{0.05, 0.1, 3.0, 2.0 * pi - 0.05};
  const double wrapped = spread_window_circular(x, {4, 3});
  const double d1 = 0.1, d2 = 0.15, d3 = 0.05;  // pairwise arc lengths
  CHECK(wrapped == doctest::Approx(2.0 * (d1 * d1 + d2 * d2 + d3 * d3)));
  CHECK(spread_window(x, {4, 3}, Geometry::Circle) == wrapped);
  CHECK_THROWS_AS(spread_window_circular(x, {5, 3}), WindowOutOfRange);
}

TEST_CASE("spread_circle") {
  CHECK(spread_circle(std::vector<double>{0.0, 2.0 * pi / 3, 4.0 * pi / 3}) == doctest::Approx(4.5));
  CHECK(spread_circle(std::vector<double>{1.0, 1.0, 1.0}) == 0.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0 * pi);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(5);
    for (double& v : x) v = u(rng);
    const double r = spread_circle(x);
    auto rotated = x;
    for (double& v : rotated) v += 0.7;
    auto shifted = x;
    shifted[2] += 2.0 * pi;
    CHECK(spread_circle(rotated) == doctest::Approx(r).epsilon(1e-12));
    CHECK(spread_circle(shifted) == doctest::Approx(r).epsilon(1e-12));
  }
}

TEST_CASE("spread_circle approaches spread_total / 4 quadratically") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> shape(4);
    for (double& s : shape) s = u(rng);
    auto rel = [&](double width) {
      std::vector<double> x;
      for (double s : shape) x.push_back(2.0 + width * s);
      const double quarter = spread_total(x) / 4.0;
      return std::abs(spread_circle(x) - quarter) / quarter;
    };
    CHECK(rel(0.3) <= 0.02);
    const double ratio = rel(0.2) / rel(0.1);
    CHECK(ratio > 3.8);
    CHECK(ratio < 4.2);
  }
}

TEST_CASE("spread properties") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 3 + trial % 7;
    std::vector<double> x(static_cast<std::size_t>(n));
    for (double& v : x) v = g(rng);
    std::sort(x.begin(), x.end());
    const double s = spread_total(x);
    for (int r = 3; r <= n; ++r)
      for (const auto& w : windows_of_size(n, r, Geometry::Line))
        CHECK(spread_window(x, w) <= s * (1.0 + 1e-12));
    auto moved = x;
    for (double& v : moved) v = 2.5 * v + 7.0;
    CHECK(spread_total(moved) == doctest::Approx(6.25 * s).epsilon(1e-10));
  }
}

TEST_CASE("a triple collision zeroes some r = 3 window") {
  const std::vector<double> x{-1.0, 0.4, 0.4, 0.4, 2.0};
  bool zero = false;
  for (const auto& w : windows_of_size(5, 3, Geometry::Line)) zero = zero || spread_window(x, w) == 0.0;
  CHECK(zero);
}

TEST_CASE("min_gap") {
  CHECK(min_gap(std::vector<double>{0.0, 1.0, 3.0}, Geometry::Line) == 1.0);
  CHECK(min_gap(std::vector<double>{0.0, pi / 2, pi}, Geometry::Circle) == doctest::Approx(pi / 2));
  CHECK(min_gap(std::vector<double>{0.0, 0.1, 6.2}, Geometry::Circle) ==
        doctest::Approx(2.0 * pi - 6.2));
  CHECK(min_gap(std::vector<double>{0.0, 2.0, 2.0}, Geometry::Line) == 0.0);
}

TEST_CASE("first_hit") {
  ObservableSeries s = make_series(3, Geometry::Line);
  s.times = {0.1, 0.2, 0.3, 0.4};
  s.min_gap = {0.5, 0.3, 0.0, 0.2};
  s.s_windows[{1, 3}] = {4.0, 3.0, 2.0, 1.0};
  CHECK(first_hit(s, Functional::min_gap(), 0.0) == 0.3);
  CHECK(first_hit(s, Functional::min_gap(), 0.35) == 0.2);
  CHECK_FALSE(first_hit(s, Functional::min_gap(), -1.0).has_value());
  CHECK(first_hit(s, Functional::window_spread({1, 3}), 2.5) == 0.3);
  CHECK_FALSE(first_hit(s, Functional::window_spread({1, 3}), 0.5).has_value());

  // Scan oracle over a monotone series.
  ObservableSeries m;
  for (int i = 0; i < 100; ++i) {
    m.times.push_back(0.01 * (i + 1));
    m.min_gap.push_back(1.0 - 0.01 * i);
  }
  for (double thr : {0.999, 0.5, 0.255, 0.01}) {
    std::optional<double> expect;
    for (std::size_t i = 0; i < m.times.size() && !expect; ++i)
      if (m.min_gap[i] <= thr) expect = m.times[i];
    CHECK(first_hit(m, Functional::min_gap(), thr) == expect);
  }
  ObservableSeries apart;
  apart.times = {1.0, 2.0};
  apart.min_gap = {0.1, 0.2};
  CHECK_FALSE(first_hit(apart, Functional::min_gap(), 1e-3).has_value());
}

TEST_CASE("append_observation fills every series") {
  ObservableSeries s = make_series(4, Geometry::Circle);
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  append_observation(s, 0.5, x, Geometry::Circle);
  CHECK(s.times.size() == 1);
  CHECK(s.s_windows.size() == 4);
  REQUIRE(s.r_circ.has_value());
  CHECK(s.r_circ->front() == doctest::Approx(spread_circle(x)));
  CHECK(s.min_gap.front() == doctest::Approx(1.0));
}
