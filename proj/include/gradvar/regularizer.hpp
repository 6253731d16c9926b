#pragma once

// The linearithmic regularizer
//
//   psi(w; alpha, V, M) = 3 * int_0^{|w|} min_{eta <= 1/M} [ ln(x/alpha + 1)/eta + eta V ] dx
//
// The inner minimum has the closed form (with l = ln(x/alpha + 1))
//   2 sqrt(V l)       if l <= V / M^2
//   M l + V / M       otherwise
// so psi is radial with derivative integrand(|w|) and can be inverted in
// closed form on each branch.

#include <cmath>
#include <limits>
#include <string>

#include <gsl/gsl_sf_dawson.h>

#include "gradvar/errors.hpp"
#include "gradvar/point.hpp"

namespace gradvar {

struct PfRegParams {
  double alpha;  // scale, > 0
  double vbar;   // variance proxy, > 0
  double m;      // magnitude cap, > 0

  void validate() const {
    if (!(alpha > 0.0) || !(vbar > 0.0) || !(m > 0.0) || !std::isfinite(alpha) || !std::isfinite(vbar) ||
        !std::isfinite(m))
      throw ConfigError("regularizer parameters must be positive and finite");
  }

  /// Value of ln(x/alpha + 1) at which the inner minimiser hits eta = 1/M.
  double branch_log() const noexcept { return vbar / (m * m); }
};

inline constexpr double kMaxExponent = 700.0;

namespace detail {

// z - D(z) for the Dawson integral D; the series avoids cancellation near 0.
inline double z_minus_dawson(double z) {
  if (z < 0.2) {
    const double z2 = z * z;
    double term = z;  // (-1)^n 2^n z^{2n+1} / (2n+1)!!, n = 0
    double sum = 0.0;
    for (int n = 1; n < 30; ++n) {
      term *= -2.0 * z2 / (2.0 * n + 1.0);
      sum -= term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return z - gsl_sf_dawson(z);
}

// int_0^r 6 sqrt(V ln(x/alpha + 1)) dx
inline double sqrt_branch_integral(double r, const PfRegParams& p) {
  const double s = 1.0 + r / p.alpha;
  const double l = std::log1p(r / p.alpha);
  return 6.0 * std::sqrt(p.vbar) * p.alpha * s * z_minus_dawson(std::sqrt(l));
}

}  // namespace detail

/// Radial derivative of psi: 3 * min_{eta <= 1/m}[ l/eta + eta vbar ].
inline double integrand(double x, const PfRegParams& p) {
  if (!(x >= 0.0)) throw DomainError("integrand requires x >= 0");
  const double l = std::log1p(x / p.alpha);
  if (l <= p.branch_log()) return 6.0 * std::sqrt(p.vbar * l);
  return 3.0 * (p.m * l + p.vbar / p.m);
}

/// psi(r) = int_0^r integrand(x) dx in closed form.
inline double psi_value(double r, const PfRegParams& p) {
  if (!(r >= 0.0)) throw DomainError("psi_value requires r >= 0");
  if (r == 0.0) return 0.0;
  const double lb = p.branch_log();
  const double l = std::log1p(r / p.alpha);
  if (lb >= kMaxExponent || l <= lb) return detail::sqrt_branch_integral(r, p);

  const double xb = p.alpha * std::expm1(lb);
  const double sb = 1.0 + xb / p.alpha;
  const double s = 1.0 + r / p.alpha;
  // int (M l + V/M) dx = M alpha (s ln s - s) + (V/M) x
  return detail::sqrt_branch_integral(xb, p) + 3.0 * p.m * p.alpha * (s * (l - 1.0) - sb * (lb - 1.0)) +
         3.0 * (p.vbar / p.m) * (r - xb);
}

/// Gradient of w -> psi(|w|): integrand(|w|) w / |w| (zero at the origin).
inline Point psi_gradient(const Point& w, const PfRegParams& p) {
  const double r = w.norm();
  if (r == 0.0) return Point::zeros(w.dim());
  return (integrand(r, p) / r) * w;
}

/// Radius r with integrand(r) = target. Zero for target below 1e-12.
inline double inv_deriv(double target, const PfRegParams& p) {
  if (!(target >= 0.0)) throw DomainError("inv_deriv requires target >= 0");
  if (target < 1e-12) return 0.0;
  double exponent;
  if (target <= 6.0 * p.vbar / p.m)
    exponent = target * target / (36.0 * p.vbar);
  else
    exponent = target / (3.0 * p.m) - p.branch_log();
  if (!(exponent <= kMaxExponent)) throw MagnitudeOverflow("inv_deriv exponent exceeds " + std::to_string(kMaxExponent));
  return p.alpha * std::expm1(exponent);
}

}  // namespace gradvar
