#include "repel/besq.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "repel/errors.hpp"

namespace repel {

void BesqSpec::validate() const {
  if (!(dimension > 0.0)) throw DomainError("besq dimension must be > 0");
  if (!(start >= 0.0)) throw DomainError("besq start must be >= 0");
}

double spread_dimension(int n, double coupling) {
  if (n < 3) throw DomainError("n must be >= 3");
  if (!(coupling >= 0.0)) throw DomainError("lambda must be >= 0");
  return (n - 1) * (coupling * n + 1.0);
}

double window_dimension(int r, double coupling) {
  if (r < 3) throw DomainError("window size r must be >= 3");
  if (!(coupling > 0.0)) throw DomainError("lambda must be > 0");
  return (r - 1) * (coupling * r + 1.0);
}

Moments besq_mean_var(const BesqSpec& spec, double t) {
  spec.validate();
  if (!(t >= 0.0)) throw DomainError("t must be >= 0");
  return {spec.start + spec.dimension * t,
          4.0 * spec.start * t + 2.0 * spec.dimension * t * t};
}

double besq_sample(const BesqSpec& spec, double t, NoiseStream& noise) {
  spec.validate();
  if (!(t > 0.0)) throw DomainError("t must be > 0");
  const auto k = noise.poisson(spec.start / (2.0 * t));
  return noise.gamma(0.5 * spec.dimension + static_cast<double>(k), 2.0 * t);
}

double besq_cdf(const BesqSpec& spec, double t, double y) {
  spec.validate();
  if (!(t > 0.0)) throw DomainError("t must be > 0");
  return ncx2_cdf(y / t, spec.dimension, spec.start / t);
}

namespace {

constexpr double kGammaEps = 1e-15;
constexpr int kGammaMaxIter = 100000;

double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kGammaMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the modified Lentz continued fraction.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double poisson_log_weight(int k, double mean) {
  return -mean + k * std::log(mean) - std::lgamma(k + 1.0);
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw DomainError("gamma shape must be > 0");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double ncx2_cdf(double x, double dof, double noncentrality) {
  if (!(dof > 0.0)) throw DomainError("degrees of freedom must be > 0");
  if (!(noncentrality >= 0.0)) throw DomainError("noncentrality must be >= 0");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double half_x = 0.5 * x;
  const double half_dof = 0.5 * dof;
  const double mean = 0.5 * noncentrality;
  if (mean == 0.0) return regularized_gamma_p(half_dof, half_x);

  constexpr double kTail = 1e-12;
  const int mode = static_cast<int>(std::floor(mean));
  double mass = 0.0;
  double cdf = 0.0;
  // Upward from the mode, then downward; each direction stops when the
  // remaining Poisson mass on that side cannot matter.
  for (int k = mode;; ++k) {
    const double w = std::exp(poisson_log_weight(k, mean));
    mass += w;
    cdf += w * regularized_gamma_p(half_dof + k, half_x);
    if (1.0 - mass < kTail || (k > mode + 10 && w < kTail * 1e-3)) break;
  }
  for (int k = mode - 1; k >= 0; --k) {
    if (1.0 - mass < kTail) break;
    const double w = std::exp(poisson_log_weight(k, mean));
    mass += w;
    cdf += w * regularized_gamma_p(half_dof + k, half_x);
    if (w < kTail * 1e-3 && k < mode - 10) break;
  }
  if (cdf < 0.0) return 0.0;
  return cdf > 1.0 ? 1.0 : cdf;
}

}  // namespace repel
