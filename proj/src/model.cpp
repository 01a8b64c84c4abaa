#include "repel/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "repel/detail/summation.hpp"
#include "repel/errors.hpp"

namespace repel {

const char* to_string(Geometry g) {
  return g == Geometry::Line ? "line" : "circle";
}

void SystemSpec::validate(bool allow_free) const {
  if (n_particles < 3) throw ConfigError("n must be >= 3");
  if (!std::isfinite(coupling)) throw ConfigError("lambda must be finite");
  if (allow_free) {
    if (coupling < 0.0) throw ConfigError("lambda must be >= 0");
  } else if (!(coupling > 0.0)) {
    throw ConfigError("lambda must be > 0");
  }
  if (static_cast<int>(initial_positions.size()) != n_particles) {
    std::ostringstream os;
    os << "x0 must have n = " << n_particles << " entries, got "
       << initial_positions.size();
    throw ConfigError(os.str());
  }
  for (double x : initial_positions)
    if (!std::isfinite(x)) throw ConfigError("x0 entries must be finite");
  if (geometry == Geometry::Circle) {
    const double x1 = initial_positions.front();
    if (x1 < 0.0 || x1 >= kTwoPi)
      throw ConfigError("circle x0[0] must lie in [0, 2pi)");
  }
  if (!is_ordered(initial_positions, geometry)) {
    throw ConfigError(geometry == Geometry::Line
                          ? "x0 must be nondecreasing"
                          : "circle x0 must satisfy x1 <= ... <= xN <= x1 + 2pi");
  }
}

double DriftVector::sum() const {
  detail::CompensatedSum s;
  for (double v : values) s += v;
  return s.value();
}

double DriftVector::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

bool is_ordered(std::span<const double> positions, Geometry geometry) {
  if (!std::is_sorted(positions.begin(), positions.end())) return false;
  if (geometry == Geometry::Circle && !positions.empty())
    return positions.back() <= positions.front() + kTwoPi;
  return true;
}

namespace {

[[noreturn]] void throw_duplicate(std::size_t i, std::size_t j) {
  std::ostringstream os;
  os << "particles " << i + 1 << " and " << j + 1 << " share a position";
  throw DuplicatePosition(os.str());
}

// Accumulates the antisymmetric pair kernel f(x_i - x_j) into out, scaled.
// Each pair term is computed once and added with opposite signs, so the
// components cancel pairwise.
template <class Kernel>
void accumulate_pairs(std::span<const double> x, double scale,
                      std::span<double> out, Kernel kernel) {
  const std::size_t n = x.size();
  constexpr std::size_t kStackMax = 64;
  detail::CompensatedSum stack_acc[kStackMax];
  std::vector<detail::CompensatedSum> heap_acc;
  detail::CompensatedSum* acc = stack_acc;
  if (n > kStackMax) {
    heap_acc.resize(n);
    acc = heap_acc.data();
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double term = kernel(x[i] - x[j], i, j);
      acc[i] += term;
      acc[j] += -term;
    }
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = scale * acc[i].value();
}

}  // namespace

void drift_line_into(std::span<const double> positions, double coupling,
                     std::span<double> out) {
  accumulate_pairs(positions, coupling, out,
                   [](double d, std::size_t i, std::size_t j) {
                     if (d == 0.0) throw_duplicate(i, j);
                     return 1.0 / d;
                   });
}

void drift_circle_into(std::span<const double> positions, double coupling,
                       std::span<double> out) {
  accumulate_pairs(positions, 0.5 * coupling, out,
                   [](double d, std::size_t i, std::size_t j) {
                     if (d == 0.0 || std::abs(d) == kTwoPi) throw_duplicate(i, j);
                     const double h = 0.5 * d;
                     return std::cos(h) / std::sin(h);
                   });
}

void drift_into(Geometry geometry, std::span<const double> positions,
                double coupling, std::span<double> out) {
  if (geometry == Geometry::Line)
    drift_line_into(positions, coupling, out);
  else
    drift_circle_into(positions, coupling, out);
}

DriftVector drift_line(std::span<const double> positions, double coupling) {
  DriftVector b{std::vector<double>(positions.size())};
  drift_line_into(positions, coupling, b.values);
  return b;
}

DriftVector drift_circle(std::span<const double> positions, double coupling) {
  DriftVector b{std::vector<double>(positions.size())};
  drift_circle_into(positions, coupling, b.values);
  return b;
}

double qv_identity_residual(std::span<const double> positions) {
  const std::size_t n = positions.size();
  detail::CompensatedSum lhs, spread;
  for (std::size_t j = 0; j < n; ++j) {
    detail::CompensatedSum row;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = positions[j] - positions[k];
      row += d;
      spread += d * d;
    }
    const double r = row.value();
    lhs += r * r;
  }
  return std::abs(lhs.value() - 0.5 * static_cast<double>(n) * spread.value());
}

double drift_identity_residual(std::span<const double> positions) {
  const std::size_t n = positions.size();
  detail::CompensatedSum total;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < n; ++l) {
      if (l == j) continue;
      const double denom = positions[j] - positions[l];
      if (denom == 0.0) throw_duplicate(std::min(j, l), std::max(j, l));
      for (std::size_t k = 0; k < n; ++k)
        total += (positions[j] - positions[k]) / denom;
    }
  }
  const double nd = static_cast<double>(n);
  return std::abs(total.value() - 0.5 * nd * nd * (nd - 1.0));
}

}  // namespace repel
