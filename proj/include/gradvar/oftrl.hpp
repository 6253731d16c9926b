#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>

#include "gradvar/errors.hpp"
#include "gradvar/point.hpp"
#include "gradvar/regularizer.hpp"

namespace gradvar {

/// alpha = eps / (sqrt(B) (ln B)^2), the comparator-scale schedule.
inline double alpha_schedule(double eps, double b) {
  const double lb = std::log(b);
  return eps / (std::sqrt(b) * lb * lb);
}

/// Optimistic FTRL with the linearithmic regularizer and a known Lipschitz
/// bound G. Each step is O(d) plus a closed-form scalar inversion.
class OftrlLearner {
 public:
  /// Called when a gradient or hint exceeds the promised bound.
  using Warning = std::function<void(const std::string&)>;

  struct Snapshot {
    double vbar;
    double b;
    double alpha;
  };

  OftrlLearner(double g_lipschitz, double eps, std::size_t dim, Warning warn = {})
      : g_(g_lipschitz), eps_(eps), theta_(dim), w_(dim), h_(dim), warn_(std::move(warn)) {
    if (!(g_lipschitz > 0.0) || !std::isfinite(g_lipschitz)) throw ConfigError("oftrl: G must be positive");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("oftrl: eps must be positive");
    if (dim == 0) throw ConfigError("oftrl: dimension must be positive");
    const double m = 2.0 * g_;
    vbar_ = 4.0 * m * m;
    b_ = 4.0;
    alpha_ = alpha_schedule(eps_, b_);
  }

  std::size_t dim() const noexcept { return w_.dim(); }
  double lipschitz() const noexcept { return g_; }
  double eps() const noexcept { return eps_; }
  double magnitude_cap() const noexcept { return 2.0 * g_; }

  const Point& decision() const noexcept { return w_; }
  const Point& hint() const noexcept { return h_; }
  /// theta_t = -sum of gradients so far.
  const Point& theta() const noexcept { return theta_.value(); }
  double vbar() const noexcept { return vbar_; }
  double b() const noexcept { return b_; }
  double alpha() const noexcept { return alpha_; }
  Snapshot snapshot() const noexcept { return {vbar_, b_, alpha_}; }
  PfRegParams params() const noexcept { return {alpha_, vbar_, 2.0 * g_}; }

  /// Consume g_t, take h_{t+1}, return w_{t+1}.
  const Point& step(const Point& g, const Point& h_next) {
    g.require_finite();
    h_next.require_finite();
    w_.check_same_dim(g);
    w_.check_same_dim(h_next);
    if (warn_) {
      if (g.norm() > g_ + 1e-9) warn_("gradient norm " + std::to_string(g.norm()) + " exceeds G");
      if (h_next.norm() > g_ + 1e-9) warn_("hint norm " + std::to_string(h_next.norm()) + " exceeds G");
    }

    const double m = 2.0 * g_;
    const double dev = squared_distance(g, h_);
    vbar_ += dev;
    b_ += dev / (m * m);
    alpha_ = alpha_schedule(eps_, b_);

    theta_.subtract(g);
    h_ = h_next;
    Point tilde = theta_.value() - h_;
    const double norm = tilde.norm();
    if (norm == 0.0) {
      w_ = Point::zeros(dim());
    } else {
      const double r = inv_deriv(norm, params());
      w_ = std::move(tilde *= r / norm);
    }
    w_.require_finite();
    return w_;
  }

 private:
  double g_;
  double eps_;
  double vbar_;
  double b_;
  double alpha_;
  CompensatedSum theta_;
  Point w_;
  Point h_;
  Warning warn_;
};

}  // namespace gradvar
