#pragma once

#include <optional>
#include <span>
#include <vector>

#include "repel/noise.hpp"

namespace repel {

/// Dense square matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  [[nodiscard]] std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  [[nodiscard]] double frobenius_norm() const;
  [[nodiscard]] bool is_symmetric(double tol = 0.0) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct EigenDecomposition {
  std::vector<double> eigenvalues;        ///< ascending
  std::optional<Matrix> eigenvectors;     ///< column k pairs with eigenvalues[k]
  int sweeps = 0;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// 1e-12 ||A||_F. Throws EigenFailure after 100 sweeps, DomainError for
/// non-symmetric input or n > 64.
EigenDecomposition jacobi_eigen_symmetric(const Matrix& a, bool with_vectors = false);

/// Initial diagonal x_0 and time t of the Gaussian symmetric matrix
/// H_t = diag(x_0) + G_t.
struct MatrixEnsembleSpec {
  int n = 3;
  std::vector<double> initial_diagonal;
  double time = 1.0;

  void validate() const;
};

/// Ascending eigenvalues of diag(x_0) + G, with G symmetric, diagonal
/// entries of variance t and off-diagonal entries of variance t / 2. These
/// have the law of the coupling-1/2 particle system at time t.
std::vector<double> sample_goe_eigenvalues(const MatrixEnsembleSpec& spec,
                                           NoiseStream& noise);

}  // namespace repel
