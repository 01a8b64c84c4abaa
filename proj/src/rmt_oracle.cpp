#include "repel/rmt_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "repel/errors.hpp"

namespace repel {

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

bool Matrix::is_symmetric(double tol) const {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
  return true;
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

EigenDecomposition jacobi_eigen_symmetric(const Matrix& input, bool with_vectors) {
  const std::size_t n = input.size();
  if (n > 64) throw DomainError("jacobi solver supports n <= 64");
  if (!input.is_symmetric()) throw DomainError("jacobi solver needs a symmetric matrix");

  Matrix a = input;
  Matrix v(n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;
  const double target = 1e-12 * input.frobenius_norm();
  constexpr int kMaxSweeps = 100;

  int sweep = 0;
  while (off_diagonal_norm(a) > target) {
    if (sweep == kMaxSweeps) throw EigenFailure("jacobi: no convergence after 100 sweeps");
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation annihilating a(p, q); t is the smaller root of
        // t^2 + 2 theta t - 1 = 0.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        if (with_vectors) {
          for (std::size_t k = 0; k < n; ++k) {
            const double vkp = v(k, p), vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  EigenDecomposition out;
  out.sweeps = sweep;
  out.eigenvalues.reserve(n);
  for (std::size_t k : order) out.eigenvalues.push_back(a(k, k));
  if (with_vectors) {
    Matrix sorted(n);
    for (std::size_t col = 0; col < n; ++col)
      for (std::size_t row = 0; row < n; ++row) sorted(row, col) = v(row, order[col]);
    out.eigenvectors = std::move(sorted);
  }
  return out;
}

void MatrixEnsembleSpec::validate() const {
  if (n < 3) throw ConfigError("n must be >= 3");
  if (static_cast<int>(initial_diagonal.size()) != n)
    throw ConfigError("initial diagonal must have n entries");
  if (!std::is_sorted(initial_diagonal.begin(), initial_diagonal.end()))
    throw ConfigError("initial diagonal must be nondecreasing");
  if (!(time > 0.0)) throw ConfigError("t must be > 0");
}

std::vector<double> sample_goe_eigenvalues(const MatrixEnsembleSpec& spec,
                                           NoiseStream& noise) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.n);
  const double diag_sd = std::sqrt(spec.time);
  const double off_sd = std::sqrt(0.5 * spec.time);
  Matrix h(n);
  for (std::size_t i = 0; i < n; ++i) {
    h(i, i) = spec.initial_diagonal[i] + diag_sd * noise.normal();
    for (std::size_t j = i + 1; j < n; ++j) h(i, j) = h(j, i) = off_sd * noise.normal();
  }
  return jacobi_eigen_symmetric(h).eigenvalues;
}

}  // namespace repel
