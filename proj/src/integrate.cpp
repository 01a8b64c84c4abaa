#include "repel/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "repel/errors.hpp"

namespace repel {

void SchemeConfig::validate() const {
  if (!(dt_max > 0.0) || !std::isfinite(dt_max)) throw ConfigError("dt-max must be > 0");
  if (!(dt_min > 0.0)) throw ConfigError("dt-min must be > 0");
  if (dt_min > dt_max) throw ConfigError("dt-min must be <= dt-max");
  if (!(gap_safety > 0.0) || gap_safety > 1.0)
    throw ConfigError("alpha must lie in (0, 1]");
  if (max_steps == 0) throw ConfigError("max-steps must be >= 1");
}

double adaptive_dt(double min_gap, const SchemeConfig& cfg) {
  const double h = cfg.gap_safety * min_gap * min_gap;
  if (!(h >= cfg.dt_min)) return cfg.dt_min;  // also catches NaN
  return std::min(h, cfg.dt_max);
}

void repair_ordering(std::vector<double>& positions, Geometry geometry) {
  if (geometry == Geometry::Circle) {
    for (double& x : positions) {
      x -= kTwoPi * std::floor(x / kTwoPi);
      if (x >= kTwoPi) x = 0.0;
    }
  }
  std::sort(positions.begin(), positions.end());
}

bool separate_ties(std::vector<double>& positions, Geometry geometry, double eps) {
  bool found = false;
  const std::size_t n = positions.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && positions[j] == positions[i]) ++j;
    if (j - i > 1) {
      found = true;
      const double v = positions[i];
      const double spacing = std::max(
          eps, 64.0 * std::numeric_limits<double>::epsilon() * std::abs(v));
      const double centre = 0.5 * static_cast<double>(j - i - 1);
      for (std::size_t k = i; k < j; ++k)
        positions[k] = v + (static_cast<double>(k - i) - centre) * spacing;
    }
    i = j;
  }
  if (geometry == Geometry::Circle && n > 1 &&
      positions.back() >= positions.front() + kTwoPi) {
    // last and first coincide across the wrap
    found = true;
    positions.back() = positions.front() + kTwoPi - std::max(eps, 1e-15);
  }
  if (found) repair_ordering(positions, geometry);
  return found;
}

namespace {

// x <- x + h * b~ + sqrt(h) * normals, then ordering repair. `drift` is scratch.
void advance_in_place(std::vector<double>& x, const SystemSpec& spec,
                      const SchemeConfig& cfg, double h,
                      std::span<const double> normals, std::span<double> drift) {
  const std::size_t n = x.size();
  double drift_scale = h;
  if (spec.coupling != 0.0) {
    drift_into(spec.geometry, x, spec.coupling, drift);
    if (cfg.taming_on) {
      double bmax = 0.0;
      for (double b : drift) bmax = std::max(bmax, std::abs(b));
      const double rate = cfg.taming == Taming::Step ? h : std::sqrt(h);
      drift_scale = h / (1.0 + rate * bmax);
    }
  } else {
    std::fill(drift.begin(), drift.end(), 0.0);
  }
  const double sqrt_h = std::sqrt(h);
  for (std::size_t i = 0; i < n; ++i) x[i] += drift_scale * drift[i] + sqrt_h * normals[i];
  repair_ordering(x, spec.geometry);
}

void validate_grid(std::span<const double> grid, double t_end) {
  if (grid.empty()) throw ConfigError("output grid must not be empty");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t-end must be >= 0");
  if (grid.front() < 0.0) throw ConfigError("output grid times must be >= 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ConfigError("output grid must be strictly increasing");
  if (grid.back() > t_end) throw ConfigError("output grid must end at or before t-end");
}

}  // namespace

PathState advance(const PathState& state, const SystemSpec& spec,
                  const SchemeConfig& cfg, double h,
                  std::span<const double> normals) {
  PathState next = state;
  std::vector<double> drift(state.positions.size());
  advance_in_place(next.positions, spec, cfg, h, normals, drift);
  next.time = state.time + h;
  return next;
}

PathState step_tamed(const PathState& state, const SystemSpec& spec,
                     const SchemeConfig& cfg, NoiseStream& noise) {
  const double h = adaptive_dt(min_gap(state.positions, spec.geometry), cfg);
  std::vector<double> normals(state.positions.size());
  noise.fill_normal(normals);
  return advance(state, spec, cfg, h, normals);
}

std::uint64_t simulate_path(const SystemSpec& spec, const SchemeConfig& cfg,
                            double t_end, std::span<const double> output_grid,
                            NoiseSource source, const GridObserver& observer) {
  spec.validate(/*allow_free=*/true);
  cfg.validate();
  validate_grid(output_grid, t_end);

  const auto n = static_cast<std::size_t>(spec.n_particles);
  PathState state{0.0, spec.initial_positions};
  repair_ordering(state.positions, spec.geometry);
  separate_ties(state.positions, spec.geometry, cfg.dt_min);

  NoiseStream noise(source);
  std::vector<double> normals(n);
  std::size_t next = 0;
  auto emit_due = [&] {
    while (next < output_grid.size() && output_grid[next] <= state.time)
      observer(output_grid[next++], state);
  };
  emit_due();
  const double t_stop = output_grid.back();

  if (cfg.scheme == Scheme::ExactFree) {
    if (spec.coupling != 0.0 || spec.geometry != Geometry::Line)
      throw ConfigError("exact scheme requires lambda = 0 on the line");
    // Unsorted free Brownian motions; the ordered system is their order
    // statistics.
    std::vector<double> free = state.positions;
    std::uint64_t draws = 0;
    while (next < output_grid.size()) {
      const double t = output_grid[next];
      const double sd = std::sqrt(t - state.time);
      for (double& x : free) x += sd * noise.normal();
      ++draws;
      state.time = t;
      state.positions = free;
      std::sort(state.positions.begin(), state.positions.end());
      emit_due();
    }
    return draws;
  }

  std::vector<double> drift(n);
  std::uint64_t steps = 0;
  while (next < output_grid.size() && state.time < t_stop) {
    if (steps >= cfg.max_steps) {
      std::ostringstream os;
      os << "step budget " << cfg.max_steps << " exhausted at t=" << state.time;
      throw StepBudgetExceeded(os.str());
    }
    const double remaining = t_end - state.time;
    double h = adaptive_dt(min_gap(state.positions, spec.geometry), cfg);
    const bool last = h >= remaining;
    if (last) h = remaining;
    noise.fill_normal(normals);
    advance_in_place(state.positions, spec, cfg, h, normals, drift);
    state.time = last ? t_end : state.time + h;
    ++steps;
    if (spec.coupling != 0.0) separate_ties(state.positions, spec.geometry, cfg.dt_min);
    emit_due();
  }
  return steps;
}

TrajectoryRecord simulate_path(const SystemSpec& spec, const SchemeConfig& cfg,
                               double t_end, std::span<const double> output_grid,
                               NoiseSource noise) {
  TrajectoryRecord rec;
  rec.geometry = spec.geometry;
  rec.observables = make_series(spec.n_particles, spec.geometry);
  rec.steps = simulate_path(spec, cfg, t_end, output_grid, noise,
                            [&](double t, const PathState& s) {
                              rec.times.push_back(t);
                              rec.positions.push_back(s.positions);
                              append_observation(rec.observables, t, s.positions,
                                                 spec.geometry);
                            });
  return rec;
}

PathState sample_free_exact(const SystemSpec& spec, double t, NoiseStream& noise) {
  if (spec.coupling != 0.0) throw ConfigError("exact free sampling requires lambda = 0");
  if (spec.geometry != Geometry::Line) throw ConfigError("exact free sampling requires line geometry");
  if (!(t >= 0.0)) throw ConfigError("t must be >= 0");
  spec.validate(/*allow_free=*/true);
  PathState s{t, spec.initial_positions};
  const double sd = std::sqrt(t);
  for (double& x : s.positions) x += sd * noise.normal();
  std::sort(s.positions.begin(), s.positions.end());
  return s;
}

std::vector<double> uniform_grid(double t_end, double step) {
  std::vector<double> g;
  if (step > 0.0) {
    const auto count = static_cast<std::size_t>(std::floor(t_end / step * (1.0 + 1e-12)));
    g.reserve(count + 1);
    for (std::size_t i = 1; i <= count; ++i) g.push_back(std::min(static_cast<double>(i) * step, t_end));
  }
  if (g.empty() || g.back() < t_end) g.push_back(t_end);
  return g;
}

}  // namespace repel
