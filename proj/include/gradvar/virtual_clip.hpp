#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "gradvar/errors.hpp"
#include "gradvar/oftrl.hpp"
#include "gradvar/point.hpp"
#include "gradvar/regularizer.hpp"

namespace gradvar {

/// delta * min{1, m_hat / |delta|}
inline Point clip(const Point& delta, double m_hat) {
  if (!(m_hat > 0.0)) throw DomainError("clip requires m_hat > 0");
  const double n = delta.norm();
  if (n <= m_hat) return delta;
  return (m_hat / n) * delta;
}

struct RadiusSolverOptions {
  double residual_tol = 1e-10;
  int max_bisections = 200;
  int max_doublings = 60;
};

/// Unique r >= 0 with integrand(r, p) + beta r = target.
///
/// The search starts from the bracket prev_radius +- theta_step / beta
/// (clamped to [0, target / beta]) and widens it geometrically if the
/// regularizer parameters moved enough that the root left the bracket.
/// Bisection runs until the bracket cannot be split further.
inline double solve_radius(double target, const PfRegParams& p, double beta, double prev_radius,
                           double theta_step, const RadiusSolverOptions& opt = {}) {
  if (!(target >= 0.0)) throw DomainError("solve_radius requires target >= 0");
  if (!(beta > 0.0)) throw DomainError("solve_radius requires beta > 0");
  if (target == 0.0) return 0.0;
  if (!std::isfinite(target) || !std::isfinite(prev_radius) || !std::isfinite(theta_step))
    throw NumericalError("solve_radius: non-finite input");

  auto residual = [&](double r) { return integrand(r, p) + beta * r - target; };

  const double cap = target / beta;
  const double reach = theta_step / beta;
  double lo = std::clamp(prev_radius - reach, 0.0, cap);
  double hi = std::clamp(prev_radius + reach, lo, cap);
  const double width = std::max(hi - lo, 1e-12 * (1.0 + prev_radius));

  double f_lo = residual(lo);
  for (int k = 0; f_lo > 0.0; ++k) {
    if (k >= opt.max_doublings) throw NumericalError("solve_radius: lower bracket expansion failed");
    lo = std::max(0.0, lo - width * std::ldexp(1.0, k));
    f_lo = residual(lo);
  }
  double f_hi = residual(hi);
  for (int k = 0; f_hi < 0.0; ++k) {
    if (k >= opt.max_doublings) throw NumericalError("solve_radius: upper bracket expansion failed");
    hi = std::min(cap, hi + width * std::ldexp(1.0, k));
    f_hi = residual(hi);
  }
  if (std::isnan(f_lo) || std::isnan(f_hi)) throw NumericalError("solve_radius: NaN residual");

  double best = std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
  double best_res = std::min(std::abs(f_lo), std::abs(f_hi));
  for (int it = 0; it < opt.max_bisections && best_res > 0.0; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = residual(mid);
    if (std::isnan(f_mid)) throw NumericalError("solve_radius: NaN residual");
    if (std::abs(f_mid) < best_res) {
      best_res = std::abs(f_mid);
      best = mid;
    }
    if (f_mid < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  // Below 1e-10 absolute unless target is so large that rounding of the
  // target itself dominates.
  const double tol = std::max(opt.residual_tol, 16.0 * std::numeric_limits<double>::epsilon() * target);
  if (!(best_res <= tol))
    throw NumericalError("solve_radius: residual " + std::to_string(best_res) + " above tolerance");
  return best;
}

/// Fully-adaptive optimistic FTRL with virtual clipping: the regularizer is
/// psi(.; alpha, V, M_hat) + (beta/2)|w|^2 and gradients are passed unclipped.
class ClipLearner {
 public:
  ClipLearner(double eps, double gamma, std::size_t dim)
      : eps_(eps), gamma_(gamma), grad_sum_(dim), w_(dim), h_(dim) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("virtual_clip: eps must be positive");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("virtual_clip: gamma must be positive");
    if (dim == 0) throw ConfigError("virtual_clip: dimension must be positive");
    beta_ = gamma / eps;
    m_hat_ = gamma;
    b_ = 4.0;
    vbar_ = 4.0 * gamma * gamma;
    alpha_ = alpha_schedule(eps, b_);
  }

  std::size_t dim() const noexcept { return w_.dim(); }
  double eps() const noexcept { return eps_; }
  double gamma() const noexcept { return gamma_; }
  double beta() const noexcept { return beta_; }
  double m_hat() const noexcept { return m_hat_; }
  double b() const noexcept { return b_; }
  double vbar() const noexcept { return vbar_; }
  double alpha() const noexcept { return alpha_; }
  PfRegParams params() const noexcept { return {alpha_, vbar_, m_hat_}; }

  const Point& decision() const noexcept { return w_; }
  const Point& hint() const noexcept { return h_; }
  /// sum of gradients so far (not negated).
  const Point& gradient_sum() const noexcept { return grad_sum_.value(); }

  /// Sum over rounds of |Delta_t - Delta_hat_t|^2.
  double clip_error_sq() const noexcept { return clip_error_sq_; }
  /// |g_t - h_t + h_{t+1}| from the last step.
  double last_theta_step() const noexcept { return last_theta_step_; }
  /// |theta_tilde| the last radius was solved against.
  double last_target() const noexcept { return last_target_; }
  double last_radius() const noexcept { return w_.norm(); }

  /// Consume g_t, take h_{t+1}, return w_{t+1}.
  const Point& step(const Point& g, const Point& h_next) {
    g.require_finite();
    h_next.require_finite();
    w_.check_same_dim(g);
    w_.check_same_dim(h_next);

    const Point delta = g - h_;
    const Point delta_hat = clip(delta, m_hat_);
    const double dh2 = delta_hat.squared_norm();
    b_ += dh2 / (m_hat_ * m_hat_);
    clip_error_sq_ += squared_distance(delta, delta_hat);
    m_hat_ = std::max(m_hat_, delta.norm());
    dhat_sq_sum_ += dh2;
    vbar_ = 4.0 * m_hat_ * m_hat_ + dhat_sq_sum_;
    alpha_ = alpha_schedule(eps_, b_);

    last_theta_step_ = (delta + h_next).norm();
    const double prev_radius = w_.norm();
    grad_sum_.add(g);
    h_ = h_next;
    Point tilde = -(grad_sum_.value() + h_);
    last_target_ = tilde.norm();
    if (last_target_ == 0.0) {
      w_ = Point::zeros(dim());
    } else {
      const double r = solve_radius(last_target_, params(), beta_, prev_radius, last_theta_step_);
      w_ = std::move(tilde *= r / last_target_);
    }
    w_.require_finite();
    return w_;
  }

  /// Non-optimistic use (all hints zero), as a base learner.
  const Point& update(const Point& g) { return step(g, Point::zeros(dim())); }

 private:
  double eps_;
  double gamma_;
  double beta_;
  double m_hat_;
  double b_;
  double vbar_;
  double alpha_;
  double dhat_sq_sum_ = 0.0;
  double clip_error_sq_ = 0.0;
  double last_theta_step_ = 0.0;
  double last_target_ = 0.0;
  CompensatedSum grad_sum_;
  Point w_;
  Point h_;
};

}  // namespace gradvar
