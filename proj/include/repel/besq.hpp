#pragma once

#include "repel/noise.hpp"

namespace repel {

/// Squared Bessel process BESQ(delta) started at y0:
/// dY = delta dt + 2 sqrt(Y) dW.
struct BesqSpec {
  double dimension = 2.0;
  double start = 0.0;

  void validate() const;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// (n - 1)(lambda n + 1): dimension of the squared Bessel process S / (2n)
/// for n particles with coupling lambda. Throws DomainError for n < 3 or
/// lambda < 0.
double spread_dimension(int n, double coupling);

/// (r - 1)(lambda r + 1): the same constant for a window of r particles.
double window_dimension(int r, double coupling);

/// Mean y0 + delta t and variance 4 y0 t + 2 delta t^2 of Y_t.
Moments besq_mean_var(const BesqSpec& spec, double t);

/// Exact transition draw: K ~ Poisson(y0 / (2t)), Y ~ Gamma(delta/2 + K, 2t).
double besq_sample(const BesqSpec& spec, double t, NoiseStream& noise);

/// CDF of Y_t: ncx2_cdf(y / t, delta, y0 / t).
double besq_cdf(const BesqSpec& spec, double t, double y);

/// Regularized lower incomplete gamma P(a, x), series for x < a + 1 and
/// Lentz continued fraction otherwise.
double regularized_gamma_p(double a, double x);

/// Noncentral chi-square CDF as a Poisson mixture of central chi-square
/// CDFs, scanned outward from the modal Poisson index until the omitted
/// Poisson mass is below 1e-12.
double ncx2_cdf(double x, double dof, double noncentrality);

}  // namespace repel
