#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "repel/integrate.hpp"
#include "repel/model.hpp"
#include "repel/observe.hpp"

namespace repel {

struct TestSpec {
  enum class Kind { BesselMoments, BesselKS, CollisionScan, MultipleCollisionScan };
  Kind kind = Kind::BesselMoments;
  /// Detection threshold for the collision scans; unused otherwise.
  double threshold = 0.0;
};

const char* to_string(TestSpec::Kind kind);

struct ExperimentPlan {
  SystemSpec spec;
  SchemeConfig cfg;
  double t_end = 1.0;
  std::vector<double> grid;
  int n_paths = 1;
  std::uint64_t master_seed = 0;
  std::vector<TestSpec> tests;

  void validate() const;
};

/// Per-path reduction of the grid observables.
struct PathSummary {
  bool failed = false;
  std::string error;
  std::uint64_t steps = 0;
  double s_terminal = 0.0;     ///< S at the last grid time
  double min_gap_min = 0.0;    ///< min over grid times of min_gap
  double window3_min = 0.0;    ///< min over grid times and r = 3 windows of S^I
};

/// One entry of the report. Optional fields are omitted from JSON when unset.
struct TestResult {
  std::string name;
  double statistic = 0.0;
  std::optional<double> p_value;
  std::optional<double> mean;
  std::optional<double> se;
  std::optional<double> frequency;
  std::optional<double> threshold;

  bool operator==(const TestResult&) const = default;
};

struct PlanEcho {
  std::string geometry;
  int n = 0;
  double lambda = 0.0;
  std::vector<double> x0;
  double t_end = 0.0;
  std::string scheme;
  double dt_max = 0.0;
  double dt_min = 0.0;
  double alpha = 0.0;
  bool taming = true;
  std::uint64_t grid_points = 0;
  /// Reference squared Bessel law (line geometry only).
  std::optional<double> dimension;
  std::optional<double> y0;

  bool operator==(const PlanEcho&) const = default;
};

struct McReport {
  PlanEcho plan_echo;
  std::uint64_t master_seed = 0;
  std::uint64_t n_paths = 0;
  std::uint64_t failures = 0;
  std::vector<TestResult> tests;

  [[nodiscard]] std::uint64_t effective_paths() const { return n_paths - failures; }
  [[nodiscard]] const TestResult* find(const std::string& name) const;
  bool operator==(const McReport&) const = default;
};

/// Number of worker threads: REPEL_SIM_THREADS if set (>= 1), else the
/// hardware concurrency. Never affects results.
int worker_count();

/// Runs fn(i) for i in [0, count) across worker_count() threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

/// Simulates every path of the plan (stream_id = path index) and reduces
/// each to a PathSummary. Per-path failures are recorded, not thrown.
std::vector<PathSummary> run_paths(const ExperimentPlan& plan);

/// Runs the ensemble and evaluates the requested tests.
McReport run_ensemble(const ExperimentPlan& plan);

/// Builds the report from precomputed summaries.
McReport summarize(const ExperimentPlan& plan, std::span<const PathSummary> paths);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Kolmogorov survival function Q(z) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 z^2).
double kolmogorov_q(double z);

KsResult ks_one_sample(std::span<const double> samples,
                       const std::function<double(double)>& cdf);

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

struct Frequency {
  double value = 0.0;
  double se = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t total = 0;
};

/// Fraction of paths on which the functional reaches `threshold` on the
/// grid, with binomial standard error sqrt(p (1 - p) / M).
Frequency collision_frequency(std::span<const ObservableSeries> records,
                              const Functional& functional, double threshold);

/// Same estimate from path summaries; MinGap uses min_gap_min and
/// WindowSpread uses the r = 3 window minimum. Failed paths are skipped.
Frequency collision_frequency(std::span<const PathSummary> paths,
                              Functional::Kind functional, double threshold);

/// Mean, variance and their standard errors for a sample.
struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;
  double mean_se = 0.0;
  double variance_se = 0.0;
};
SampleMoments sample_moments(std::span<const double> xs);

}  // namespace repel
