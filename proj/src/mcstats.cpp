#include "repel/mcstats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numbers>
#include <thread>

#include "repel/besq.hpp"
#include "repel/errors.hpp"

namespace repel {

const char* to_string(TestSpec::Kind kind) {
  switch (kind) {
    case TestSpec::Kind::BesselMoments: return "bessel_moments";
    case TestSpec::Kind::BesselKS: return "bessel_ks";
    case TestSpec::Kind::CollisionScan: return "collision_scan";
    case TestSpec::Kind::MultipleCollisionScan: return "multiple_collision_scan";
  }
  return "unknown";
}

void ExperimentPlan::validate() const {
  spec.validate(/*allow_free=*/true);
  cfg.validate();
  if (n_paths < 1) throw ConfigError("paths must be >= 1");
  if (grid.empty()) throw ConfigError("output grid must not be empty");
  for (const auto& t : tests) {
    const bool scan = t.kind == TestSpec::Kind::CollisionScan ||
                      t.kind == TestSpec::Kind::MultipleCollisionScan;
    if (scan && !(t.threshold > 0.0)) throw ConfigError("threshold must be > 0");
    if (!scan && spec.geometry != Geometry::Line)
      throw ConfigError("Bessel tests apply to the line geometry only");
  }
}

const TestResult* McReport::find(const std::string& name) const {
  for (const auto& t : tests)
    if (t.name == name) return &t;
  return nullptr;
}

int worker_count() {
  if (const char* env = std::getenv("REPEL_SIM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            if (!failed.exchange(true)) first_error = std::current_exception();
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<PathSummary> run_paths(const ExperimentPlan& plan) {
  plan.validate();
  const auto windows = windows_of_size(plan.spec.n_particles, 3, plan.spec.geometry);
  std::vector<PathSummary> out(static_cast<std::size_t>(plan.n_paths));
  parallel_for(out.size(), [&](std::size_t path) {
    PathSummary& s = out[path];
    s.min_gap_min = std::numeric_limits<double>::infinity();
    s.window3_min = std::numeric_limits<double>::infinity();
    try {
      s.steps = simulate_path(
          plan.spec, plan.cfg, plan.t_end, plan.grid,
          NoiseSource{plan.master_seed, path}, [&](double, const PathState& st) {
            s.s_terminal = spread_total(st.positions);
            s.min_gap_min = std::min(s.min_gap_min, min_gap(st.positions, plan.spec.geometry));
            for (const auto& w : windows)
              s.window3_min = std::min(s.window3_min,
                                       spread_window(st.positions, w, plan.spec.geometry));
          });
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      s.failed = true;
      s.error = e.what();
    }
  });
  return out;
}

SampleMoments sample_moments(std::span<const double> xs) {
  SampleMoments m;
  const double n = static_cast<double>(xs.size());
  if (xs.empty()) return m;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m.mean = mean;
  if (xs.size() > 1) {
    m.variance = m2 / (n - 1.0);
    m.mean_se = std::sqrt(m.variance / n);
    const double pop_var = m2 / n;
    m.variance_se = std::sqrt(std::max(0.0, m4 / n - pop_var * pop_var) / n);
  }
  return m;
}

double kolmogorov_q(double z) {
  if (!(z > 0.0)) return 1.0;
  constexpr double kTerm = 1e-10;
  if (z < 1.18) {
    // Jacobi theta form of the same function, fast for small z.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double sum = 0.0;
    for (int k = 1;; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * pi2 / (8.0 * z * z));
      sum += term;
      if (term < kTerm) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / z * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1;; ++k) {
    const double term = std::exp(-2.0 * k * k * z * z);
    sum += (k % 2 == 1) ? term : -term;
    if (term < kTerm) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_one_sample(std::span<const double> samples,
                       const std::function<double(double)>& cdf) {
  if (samples.empty()) throw EmptySample("KS test needs at least one sample");
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    const double hi = static_cast<double>(i + 1) / n - f;
    const double lo = f - static_cast<double>(i) / n;
    d = std::max({d, std::abs(hi), std::abs(lo)});
  }
  return {d, kolmogorov_q(std::sqrt(n) * d)};
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw EmptySample("KS test needs two nonempty samples");
  std::vector<double> xa(a.begin(), a.end()), xb(b.begin(), b.end());
  std::sort(xa.begin(), xa.end());
  std::sort(xb.begin(), xb.end());
  const double na = static_cast<double>(xa.size());
  const double nb = static_cast<double>(xb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xa.size() && j < xb.size()) {
    const double v = std::min(xa[i], xb[j]);
    while (i < xa.size() && xa[i] == v) ++i;
    while (j < xb.size() && xb[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, kolmogorov_q(std::sqrt(na * nb / (na + nb)) * d)};
}

namespace {

Frequency make_frequency(std::uint64_t hits, std::uint64_t total) {
  Frequency f;
  f.hits = hits;
  f.total = total;
  if (total > 0) {
    f.value = static_cast<double>(hits) / static_cast<double>(total);
    f.se = std::sqrt(f.value * (1.0 - f.value) / static_cast<double>(total));
  }
  return f;
}

}  // namespace

Frequency collision_frequency(std::span<const ObservableSeries> records,
                              const Functional& functional, double threshold) {
  if (records.empty()) throw EmptySample("collision frequency needs at least one record");
  std::uint64_t hits = 0;
  for (const auto& r : records)
    if (first_hit(r, functional, threshold)) ++hits;
  return make_frequency(hits, records.size());
}

Frequency collision_frequency(std::span<const PathSummary> paths,
                              Functional::Kind functional, double threshold) {
  if (paths.empty()) throw EmptySample("collision frequency needs at least one path");
  std::uint64_t hits = 0, total = 0;
  for (const auto& p : paths) {
    if (p.failed) continue;
    ++total;
    const double v = functional == Functional::Kind::MinGap ? p.min_gap_min : p.window3_min;
    if (v <= threshold) ++hits;
  }
  return make_frequency(hits, total);
}

McReport summarize(const ExperimentPlan& plan, std::span<const PathSummary> paths) {
  McReport report;
  auto& echo = report.plan_echo;
  echo.geometry = to_string(plan.spec.geometry);
  echo.n = plan.spec.n_particles;
  echo.lambda = plan.spec.coupling;
  echo.x0 = plan.spec.initial_positions;
  echo.t_end = plan.t_end;
  echo.scheme = plan.cfg.scheme == Scheme::ExactFree ? "exact_free" : "tamed_euler";
  echo.dt_max = plan.cfg.dt_max;
  echo.dt_min = plan.cfg.dt_min;
  echo.alpha = plan.cfg.gap_safety;
  echo.taming = plan.cfg.taming_on;
  echo.grid_points = plan.grid.size();
  const int n = plan.spec.n_particles;
  BesqSpec law;
  if (plan.spec.geometry == Geometry::Line) {
    law = {spread_dimension(n, plan.spec.coupling),
           spread_total(plan.spec.initial_positions) / (2.0 * n)};
    echo.dimension = law.dimension;
    echo.y0 = law.start;
  }
  report.master_seed = plan.master_seed;
  report.n_paths = paths.size();
  for (const auto& p : paths)
    if (p.failed) ++report.failures;

  std::vector<double> scaled;
  scaled.reserve(paths.size());
  for (const auto& p : paths)
    if (!p.failed) scaled.push_back(p.s_terminal / (2.0 * n));
  const double t = plan.grid.empty() ? plan.t_end : plan.grid.back();

  for (const auto& test : plan.tests) {
    switch (test.kind) {
      case TestSpec::Kind::BesselMoments: {
        const auto theory = besq_mean_var(law, t);
        const auto m = sample_moments(scaled);
        TestResult mean;
        mean.name = "bessel_mean";
        mean.mean = m.mean;
        mean.se = m.mean_se;
        mean.statistic = m.mean_se > 0.0 ? (m.mean - theory.mean) / m.mean_se : 0.0;
        TestResult var;
        var.name = "bessel_variance";
        var.mean = m.variance;
        var.se = m.variance_se;
        var.statistic = theory.variance > 0.0 ? (m.variance - theory.variance) / theory.variance : 0.0;
        report.tests.push_back(mean);
        report.tests.push_back(var);
        break;
      }
      case TestSpec::Kind::BesselKS: {
        TestResult r;
        r.name = "bessel_ks";
        if (scaled.empty()) {
          r.statistic = 1.0;
          r.p_value = 0.0;
        } else {
          const auto ks = ks_one_sample(scaled, [&](double y) { return besq_cdf(law, t, y); });
          r.statistic = ks.statistic;
          r.p_value = ks.p_value;
        }
        report.tests.push_back(r);
        break;
      }
      case TestSpec::Kind::CollisionScan: {
        const auto f = collision_frequency(paths, Functional::Kind::MinGap, test.threshold);
        TestResult r;
        r.name = "collision_scan";
        r.statistic = f.value;
        r.frequency = f.value;
        r.se = f.se;
        r.threshold = test.threshold;
        report.tests.push_back(r);
        break;
      }
      case TestSpec::Kind::MultipleCollisionScan: {
        const auto f = collision_frequency(paths, Functional::Kind::WindowSpread, test.threshold);
        double lowest = std::numeric_limits<double>::infinity();
        for (const auto& p : paths)
          if (!p.failed) lowest = std::min(lowest, p.window3_min);
        TestResult r;
        r.name = "multiple_collision_scan";
        r.statistic = std::isfinite(lowest) ? lowest : 0.0;
        r.frequency = f.value;
        r.se = f.se;
        r.threshold = test.threshold;
        report.tests.push_back(r);
        break;
      }
    }
  }
  return report;
}

McReport run_ensemble(const ExperimentPlan& plan) {
  const auto paths = run_paths(plan);
  return summarize(plan, paths);
}

}  // namespace repel
