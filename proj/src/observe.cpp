#include "repel/observe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "repel/detail/summation.hpp"
#include "repel/errors.hpp"

namespace repel {

void SubsetWindow::validate(int n, Geometry geometry) const {
  const bool fits = geometry == Geometry::Line ? (q >= 1 && q + r - 1 <= n)
                                               : (q >= 1 && q <= n);
  if (r < 3 || r > n || !fits) {
    std::ostringstream os;
    os << "window {q=" << q << ", r=" << r << "} out of range for n=" << n;
    throw WindowOutOfRange(os.str());
  }
}

std::vector<SubsetWindow> windows_of_size(int n, int r, Geometry geometry) {
  std::vector<SubsetWindow> out;
  if (r < 3 || r > n) return out;
  const int count = geometry == Geometry::Line ? n - r + 1 : n;
  for (int q = 1; q <= count; ++q) out.push_back({q, r});
  return out;
}

namespace {

// Double sum over ordered pairs of (y_j - y_k)^2 = 2 * sum_{j<k}.
template <class Get>
double pair_square_sum(std::size_t count, Get get) {
  detail::CompensatedSum s;
  for (std::size_t j = 0; j < count; ++j) {
    const double yj = get(j);
    for (std::size_t k = j + 1; k < count; ++k) {
      const double d = yj - get(k);
      s += d * d;
    }
  }
  return 2.0 * s.value();
}

}  // namespace

double spread_total(std::span<const double> positions) {
  return pair_square_sum(positions.size(), [&](std::size_t i) { return positions[i]; });
}

double spread_window(std::span<const double> positions, SubsetWindow w) {
  w.validate(static_cast<int>(positions.size()), Geometry::Line);
  return spread_total(positions.subspan(static_cast<std::size_t>(w.q - 1),
                                        static_cast<std::size_t>(w.r)));
}

double spread_window_circular(std::span<const double> positions, SubsetWindow w) {
  const auto n = positions.size();
  w.validate(static_cast<int>(n), Geometry::Circle);
  const auto start = static_cast<std::size_t>(w.q - 1);
  return pair_square_sum(static_cast<std::size_t>(w.r), [&](std::size_t i) {
    const std::size_t idx = start + i;
    return idx < n ? positions[idx] : positions[idx - n] + kTwoPi;
  });
}

double spread_window(std::span<const double> positions, SubsetWindow w,
                     Geometry geometry) {
  return geometry == Geometry::Line ? spread_window(positions, w)
                                    : spread_window_circular(positions, w);
}

double spread_circle(std::span<const double> positions) {
  const std::size_t n = positions.size();
  detail::CompensatedSum s;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      const double v = std::sin(0.5 * (positions[j] - positions[k]));
      s += v * v;
    }
  }
  return 2.0 * s.value();
}

double min_gap(std::span<const double> positions, Geometry geometry) {
  if (positions.size() < 2) return std::numeric_limits<double>::infinity();
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < positions.size(); ++i)
    g = std::min(g, positions[i] - positions[i - 1]);
  if (geometry == Geometry::Circle)
    g = std::min(g, positions.front() + kTwoPi - positions.back());
  return std::max(g, 0.0);
}

std::optional<double> first_hit(const ObservableSeries& series,
                                const Functional& functional, double threshold) {
  const std::vector<double>* values = &series.min_gap;
  if (functional.kind == Functional::Kind::WindowSpread) {
    const auto it = series.s_windows.find(functional.window);
    if (it == series.s_windows.end()) return std::nullopt;
    values = &it->second;
  }
  const std::size_t n = std::min(values->size(), series.times.size());
  for (std::size_t i = 0; i < n; ++i)
    if ((*values)[i] <= threshold) return series.times[i];
  return std::nullopt;
}

ObservableSeries make_series(int n, Geometry geometry) {
  ObservableSeries s;
  for (const auto& w : windows_of_size(n, 3, geometry)) s.s_windows[w];
  if (geometry == Geometry::Circle) s.r_circ.emplace();
  return s;
}

void append_observation(ObservableSeries& series, double time,
                        std::span<const double> positions, Geometry geometry) {
  series.times.push_back(time);
  series.s_total.push_back(spread_total(positions));
  for (auto& [w, values] : series.s_windows)
    values.push_back(spread_window(positions, w, geometry));
  if (series.r_circ) series.r_circ->push_back(spread_circle(positions));
  series.min_gap.push_back(min_gap(positions, geometry));
}

}  // namespace repel
