#pragma once

#include <numbers>
#include <span>
#include <vector>

namespace repel {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class Geometry { Line, Circle };

const char* to_string(Geometry g);

/// A system of N mutually repelling Brownian particles.
///
/// Line positions are weakly increasing. Circle positions are angles stored
/// as unwrapped reals with x_1 in [0, 2pi) and x_1 <= ... <= x_N <= x_1 + 2pi.
struct SystemSpec {
  Geometry geometry = Geometry::Line;
  int n_particles = 3;
  double coupling = 1.0;
  std::vector<double> initial_positions;

  /// Throws ConfigError naming the violated constraint. The free system
  /// (coupling == 0) is only admitted when `allow_free` is set; it is the
  /// exactly solvable reference case.
  void validate(bool allow_free = false) const;
};

/// Current time and ordered positions of one path.
struct PathState {
  double time = 0.0;
  std::vector<double> positions;
};

/// Drift b(x) of the particle system. Components sum to zero.
struct DriftVector {
  std::vector<double> values;

  [[nodiscard]] double sum() const;
  [[nodiscard]] double max_abs() const;
};

/// Checks the ordering invariant of `positions` for `geometry`.
bool is_ordered(std::span<const double> positions, Geometry geometry);

/// b_i = coupling * sum_{j != i} 1 / (x_i - x_j). Throws DuplicatePosition on a
/// zero gap.
DriftVector drift_line(std::span<const double> positions, double coupling);

/// b_i = (coupling / 2) * sum_{j != i} cot((x_i - x_j) / 2). Throws
/// DuplicatePosition on a zero angular gap.
DriftVector drift_circle(std::span<const double> positions, double coupling);

/// Allocation-free forms used by the integrators; `out` must have N entries.
void drift_line_into(std::span<const double> positions, double coupling,
                     std::span<double> out);
void drift_circle_into(std::span<const double> positions, double coupling,
                       std::span<double> out);
void drift_into(Geometry geometry, std::span<const double> positions,
                double coupling, std::span<double> out);

/// |sum_j (sum_k (x_j - x_k))^2 - (N/2) sum_j sum_k (x_j - x_k)^2|.
/// Zero for every input; the quadratic variation identity for the total
/// spread.
double qv_identity_residual(std::span<const double> positions);

/// |sum_{j,k} sum_{l != j} (x_j - x_k) / (x_j - x_l) - N^2 (N - 1) / 2|.
/// Zero for every input with distinct entries; the drift identity behind the
/// squared Bessel dimension. Throws DuplicatePosition.
double drift_identity_residual(std::span<const double> positions);

}  // namespace repel
