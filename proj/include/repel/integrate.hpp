#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "repel/model.hpp"
#include "repel/noise.hpp"
#include "repel/observe.hpp"

namespace repel {

enum class Scheme {
  ExactFree,   ///< exact Gaussian sampling, coupling must be 0
  TamedEuler,  ///< gap-adaptive tamed Euler-Maruyama with ordering repair
};

/// Taming denominator: 1 + h max|b| (Step) or 1 + sqrt(h) max|b| (RootStep).
/// RootStep bounds the drift displacement by sqrt(h) instead of 1.
enum class Taming { Step, RootStep };

struct SchemeConfig {
  Scheme scheme = Scheme::TamedEuler;
  double dt_max = 1e-4;
  double dt_min = 1e-8;
  /// alpha in h = alpha * min_gap^2.
  double gap_safety = 0.05;
  bool taming_on = true;
  Taming taming = Taming::Step;
  /// Per-path cap on the number of steps; exceeding it fails the path.
  std::uint64_t max_steps = 200'000'000;

  void validate() const;
};

/// clamp(alpha * min_gap^2, dt_min, dt_max).
double adaptive_dt(double min_gap, const SchemeConfig& cfg);

/// Sorts a line configuration; on the circle, reduces every angle to
/// [0, 2pi) and sorts, which restores x_1 <= ... <= x_N <= x_1 + 2pi.
void repair_ordering(std::vector<double>& positions, Geometry geometry);

/// Spreads each run of exactly tied positions into a symmetric fan with
/// spacing eps (widened to a few ulps when eps is below the local
/// resolution). Returns true if any tie was found.
bool separate_ties(std::vector<double>& positions, Geometry geometry, double eps);

/// One tamed Euler step of size h driven by the standard normal vector
/// `normals`: x' = x + h * b~ + sqrt(h) * normals, then ordering repair.
/// b~ = b / (1 + h * max|b|) when taming is on.
PathState advance(const PathState& state, const SystemSpec& spec,
                  const SchemeConfig& cfg, double h,
                  std::span<const double> normals);

/// One step with h = adaptive_dt(min_gap(state)) drawn from `noise`.
/// Throws DuplicatePosition on tied input.
PathState step_tamed(const PathState& state, const SystemSpec& spec,
                     const SchemeConfig& cfg, NoiseStream& noise);

/// Sampled path with derived observables.
struct TrajectoryRecord {
  Geometry geometry = Geometry::Line;
  std::vector<double> times;
  std::vector<std::vector<double>> positions;
  ObservableSeries observables;
  std::uint64_t steps = 0;
};

/// Called once per grid point with the grid time and the state recorded for
/// it (the first step whose time is at or after the grid point).
using GridObserver = std::function<void(double grid_time, const PathState& state)>;

/// Streaming form of simulate_path. Returns the number of steps taken.
std::uint64_t simulate_path(const SystemSpec& spec, const SchemeConfig& cfg,
                            double t_end, std::span<const double> output_grid,
                            NoiseSource noise, const GridObserver& observer);

/// Integrates one path and records positions and observables on the grid.
/// Throws ConfigError on an empty, unsorted, or out-of-range grid.
TrajectoryRecord simulate_path(const SystemSpec& spec, const SchemeConfig& cfg,
                               double t_end, std::span<const double> output_grid,
                               NoiseSource noise);

/// Exact draw of the free (coupling 0) line system at time t:
/// sort(x_0 + sqrt(t) * xi).
PathState sample_free_exact(const SystemSpec& spec, double t, NoiseStream& noise);

/// Uniform grid {step, 2 step, ...} up to t_end inclusive (t_end appended if
/// the last multiple falls short). With step <= 0, returns {t_end}.
std::vector<double> uniform_grid(double t_end, double step);

}  // namespace repel
