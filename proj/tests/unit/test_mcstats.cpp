#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <vector>

#include "repel/besq.hpp"
#include "repel/errors.hpp"
#include "repel/mcstats.hpp"

using namespace repel;

namespace {

ExperimentPlan free_plan(int paths, std::uint64_t seed) {
  ExperimentPlan plan;
  plan.spec = {Geometry::Line, 3, 0.0, {-1.0, 0.0, 1.0}};
  plan.cfg.scheme = Scheme::ExactFree;
  plan.t_end = 1.0;
  plan.grid = {0.5, 1.0};
  plan.n_paths = paths;
  plan.master_seed = seed;
  plan.tests = {{TestSpec::Kind::BesselMoments, 0.0}, {TestSpec::Kind::BesselKS, 0.0}};
  return plan;
}

}  // namespace

TEST_CASE("kolmogorov_q") {
  CHECK(kolmogorov_q(0.0) == 1.0);
  CHECK(kolmogorov_q(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(kolmogorov_q(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(kolmogorov_q(0.5) == doctest::Approx(0.963945).epsilon(1e-5));
  // Both evaluation branches agree where they meet.
  CHECK(kolmogorov_q(1.18 - 1e-12) == doctest::Approx(kolmogorov_q(1.18)).epsilon(1e-10));
  double prev = 1.0;
  for (double z = 0.01; z < 4.0; z += 0.01) {
    const double q = kolmogorov_q(z);
    CHECK(q <= prev + 1e-15);
    CHECK(q >= 0.0);
    prev = q;
  }
}

TEST_CASE("ks_one_sample examples") {
  const auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  const std::vector<double> median{0.5};
  CHECK(ks_one_sample(median, uniform).statistic == doctest::Approx(0.5));
  const std::vector<double> below(50, -1.0);
  const auto far = ks_one_sample(below, uniform);
  CHECK(far.statistic == 1.0);
  CHECK(far.p_value < 1e-3);
  CHECK_THROWS_AS(ks_one_sample(std::vector<double>{}, uniform), EmptySample);
}

TEST_CASE("ks_one_sample rarely rejects correct nulls") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int rejected = 0;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> xs(1000);
    for (double& x : xs) x = u(rng);
    rejected += ks_one_sample(xs, [](double x) { return x; }).p_value < 1e-3;
  }
  CHECK(rejected <= 1);

  std::vector<double> shifted(1000);
  for (double& x : shifted) x = 0.9 * u(rng);
  CHECK(ks_one_sample(shifted, [](double x) { return x; }).p_value < 1e-3);
}

TEST_CASE("ks_two_sample") {
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
  const std::vector<double> b{10.0, 11.0, 12.0};
  CHECK(ks_two_sample(a, a).statistic == 0.0);
  CHECK(ks_two_sample(a, a).p_value == doctest::Approx(1.0));
  CHECK(ks_two_sample(a, b).statistic == 1.0);

  std::mt19937_64 rng(22);
  std::normal_distribution<double> g;
  int rejected = 0;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x(800), y(1200);
    for (double& v : x) v = g(rng);
    for (double& v : y) v = g(rng);
    rejected += ks_two_sample(x, y).p_value < 1e-3;
  }
  CHECK(rejected <= 1);
  std::vector<double> x(2000), y(2000);
  for (double& v : x) v = g(rng);
  for (double& v : y) v = g(rng) + 0.3;
  CHECK(ks_two_sample(x, y).p_value < 1e-3);
}

TEST_CASE("sample_moments") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const auto m = sample_moments(xs);
  CHECK(m.mean == 2.5);
  CHECK(m.variance == doctest::Approx(5.0 / 3.0));
  CHECK(m.mean_se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(sample_moments(std::vector<double>{}).mean_se == 0.0);
}

TEST_CASE("collision_frequency") {
  std::vector<ObservableSeries> records(4);
  const double gaps[4][3] = {{0.5, 0.4, 0.3}, {0.5, 1e-4, 0.3}, {0.2, 0.2, 0.0}, {1.0, 1.0, 1.0}};
  std::vector<PathSummary> summaries(4);
  for (int p = 0; p < 4; ++p) {
    for (int k = 0; k < 3; ++k) {
      records[p].times.push_back(0.1 * (k + 1));
      records[p].min_gap.push_back(gaps[p][k]);
    }
    summaries[p].min_gap_min = *std::min_element(gaps[p], gaps[p] + 3);
  }
  const auto f = collision_frequency(records, Functional::min_gap(), 1e-3);
  CHECK(f.hits == 2);
  CHECK(f.total == 4);
  CHECK(f.value == 0.5);
  CHECK(f.se == doctest::Approx(0.25));
  const auto g = collision_frequency(summaries, Functional::Kind::MinGap, 1e-3);
  CHECK(g.value == f.value);
  CHECK(g.se == f.se);

  summaries[1].failed = true;
  const auto h = collision_frequency(summaries, Functional::Kind::MinGap, 1e-3);
  CHECK(h.total == 3);
  CHECK(h.hits == 1);
}

TEST_CASE("parallel_for visits every index once") {
  setenv("REPEL_SIM_THREADS", "3", 1);
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK(worker_count() == 3);
  setenv("REPEL_SIM_THREADS", "zero", 1);
  CHECK(worker_count() >= 1);
  unsetenv("REPEL_SIM_THREADS");
}

TEST_CASE("ensemble results do not depend on the thread count") {
  ExperimentPlan plan;
  plan.spec = {Geometry::Line, 4, 0.5, {-1.5, -0.5, 0.5, 1.5}};
  plan.t_end = 0.05;
  plan.grid = {0.025, 0.05};
  plan.n_paths = 24;
  plan.master_seed = 31;
  plan.tests = {{TestSpec::Kind::BesselMoments, 0.0},
                {TestSpec::Kind::CollisionScan, 1e-3},
                {TestSpec::Kind::MultipleCollisionScan, 1e-5}};
  setenv("REPEL_SIM_THREADS", "1", 1);
  const auto one = run_ensemble(plan);
  setenv("REPEL_SIM_THREADS", "4", 1);
  const auto four = run_ensemble(plan);
  unsetenv("REPEL_SIM_THREADS");
  CHECK(one == four);
  CHECK(one.n_paths == 24);
  REQUIRE(one.plan_echo.dimension.has_value());
  CHECK(*one.plan_echo.dimension == 9.0);
  CHECK(*one.plan_echo.y0 == doctest::Approx(5.0));
}

TEST_CASE("free ensemble matches the two-dimensional squared Bessel law") {
  const auto report = run_ensemble(free_plan(4000, 41));
  CHECK(report.failures == 0);
  const auto* mean = report.find("bessel_mean");
  const auto* var = report.find("bessel_variance");
  const auto* ks = report.find("bessel_ks");
  REQUIRE(mean != nullptr);
  REQUIRE(var != nullptr);
  REQUIRE(ks != nullptr);
  CHECK(std::abs(mean->statistic) < 3.0);
  CHECK(*mean->mean == doctest::Approx(4.0).epsilon(0.03));
  CHECK(std::abs(var->statistic) < 0.1);
  CHECK(*ks->p_value > 1e-3);
}

TEST_CASE("standard error halves when paths quadruple") {
  const double se1 = *run_ensemble(free_plan(1000, 51)).find("bessel_mean")->se;
  const double se4 = *run_ensemble(free_plan(4000, 52)).find("bessel_mean")->se;
  CHECK(se1 / se4 > 1.6);
  CHECK(se1 / se4 < 2.4);
}

TEST_CASE("plan validation") {
  auto plan = free_plan(10, 1);
  plan.n_paths = 0;
  CHECK_THROWS_AS(plan.validate(), ConfigError);
  plan = free_plan(10, 1);
  plan.grid.clear();
  CHECK_THROWS_AS(plan.validate(), ConfigError);
  plan = free_plan(10, 1);
  plan.tests = {{TestSpec::Kind::CollisionScan, 0.0}};
  CHECK_THROWS_AS(plan.validate(), ConfigError);
  plan = free_plan(10, 1);
  plan.spec = {Geometry::Circle, 3, 0.5, {0.0, 2.0, 4.0}};
  plan.cfg.scheme = Scheme::TamedEuler;
  CHECK_THROWS_AS(plan.validate(), ConfigError);
}

TEST_CASE("report lookup") {
  McReport r;
  TestResult t;
  t.name = "collision_scan";
  r.tests.push_back(t);
  r.n_paths = 10;
  r.failures = 3;
  CHECK(r.find("collision_scan") != nullptr);
  CHECK(r.find("bessel_ks") == nullptr);
  CHECK(r.effective_paths() == 7);
}
