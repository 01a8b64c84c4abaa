#pragma once

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "repel/model.hpp"

namespace repel {

/// Consecutive index block I = {q, ..., q + r - 1} (1-based, as in the
/// particle labels). On the circle the block may wrap past N.
struct SubsetWindow {
  int q = 1;
  int r = 3;

  auto operator<=>(const SubsetWindow&) const = default;

  /// Throws WindowOutOfRange unless 3 <= r <= n and the block fits: q + r - 1
  /// <= n on the line, 1 <= q <= n on the circle.
  void validate(int n, Geometry geometry = Geometry::Line) const;
};

/// All windows of size r for n particles: n - r + 1 on the line, n on the
/// circle (every cyclic starting index).
std::vector<SubsetWindow> windows_of_size(int n, int r, Geometry geometry);

/// Observable series sampled on a time grid. All series share times.size().
struct ObservableSeries {
  std::vector<double> times;
  std::vector<double> s_total;
  std::map<SubsetWindow, std::vector<double>> s_windows;
  std::optional<std::vector<double>> r_circ;
  std::vector<double> min_gap;
};

/// S = sum_j sum_k (x_j - x_k)^2 over ordered pairs.
double spread_total(std::span<const double> positions);

/// S^I, the same double sum restricted to the line window I.
double spread_window(std::span<const double> positions, SubsetWindow w);

/// S^I for a cyclic window on the circle; indices past N are taken as
/// x_{i - N} + 2pi so differences are angular differences along the arc.
double spread_window_circular(std::span<const double> positions, SubsetWindow w);

/// Dispatches to spread_window or spread_window_circular.
double spread_window(std::span<const double> positions, SubsetWindow w,
                     Geometry geometry);

/// R = sum_j sum_k sin^2((x_j - x_k) / 2).
double spread_circle(std::span<const double> positions);

/// Smallest consecutive gap; on the circle the wrap gap x_1 + 2pi - x_N is
/// included.
double min_gap(std::span<const double> positions, Geometry geometry);

/// A scalar functional tracked for first-hit detection.
struct Functional {
  enum class Kind { MinGap, WindowSpread };
  Kind kind = Kind::MinGap;
  SubsetWindow window{};

  static Functional min_gap() { return {Kind::MinGap, {}}; }
  static Functional window_spread(SubsetWindow w) { return {Kind::WindowSpread, w}; }
};

/// Earliest grid time at which the functional is <= threshold.
std::optional<double> first_hit(const ObservableSeries& series,
                                const Functional& functional, double threshold);

/// Appends one grid sample of every tracked observable.
void append_observation(ObservableSeries& series, double time,
                        std::span<const double> positions, Geometry geometry);

/// Creates an empty series tracking all r = 3 windows for the geometry (and
/// R on the circle).
ObservableSeries make_series(int n, Geometry geometry);

}  // namespace repel
