#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "gradvar/errors.hpp"
#include "gradvar/point.hpp"
#include "gradvar/reduction.hpp"

namespace gradvar {

/// w / max(1, |w|)
inline Point project_unit_ball(Point w) {
  const double n = w.norm();
  if (n > 1.0) w *= 1.0 / n;
  return w;
}

/// One-step optimistic OGD on the unit ball:
/// Pi[w - eta (g - h + h_next)].
inline Point ogd_base_update(const Point& w, const Point& g, const Point& h, const Point& h_next, double eta) {
  if (!(eta > 0.0)) throw DomainError("ogd_base_update requires eta > 0");
  Point next = w;
  next.axpy(-eta, g);
  next.axpy(eta, h);
  next.axpy(-eta, h_next);
  return project_unit_ball(std::move(next));
}

/// p_i proportional to exp(-eps (cum_i + m_i)), shifted by the max exponent.
inline std::vector<double> hedge_update(const std::vector<double>& cum_losses, const std::vector<double>& m_next,
                                        double eps_next) {
  if (cum_losses.empty() || cum_losses.size() != m_next.size())
    throw ConfigError("hedge_update: loss and hint vectors must be nonempty and equal length");
  if (!(eps_next > 0.0)) throw DomainError("hedge_update requires eps > 0");
  std::vector<double> p(cum_losses.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = -eps_next * (cum_losses[i] + m_next[i]);
    top = std::max(top, p[i]);
  }
  if (!std::isfinite(top)) throw NumericalError("hedge_update: non-finite exponent");
  double z = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    z += v;
  }
  for (double& v : p) v /= z;
  return p;
}

/// Anytime, Lipschitz-adaptive dynamic-regret learner on the unit ball:
/// doubling epochs add one OGD base each, combined by optimistic Hedge.
class BallEnsemble {
 public:
  /// Radicands below this are floored when forming step sizes.
  static constexpr double kVarianceFloor = 1e-12;

  explicit BallEnsemble(std::size_t dim, double diameter = 1.0, bool hint_from_updated_bases = true)
      : d_(diameter), post_update_hint_(hint_from_updated_bases), h_(dim), x_(dim) {
    if (dim == 0) throw ConfigError("ensemble: dimension must be positive");
    if (!(diameter > 0.0)) throw ConfigError("ensemble: diameter must be positive");
    bases_.push_back(Point::zeros(dim));
    p_ = {1.0};
    cum_ = {0.0};
  }

  std::size_t dim() const noexcept { return x_.dim(); }
  std::size_t n() const noexcept { return bases_.size(); }
  double diameter() const noexcept { return d_; }
  double epoch_v() const noexcept { return epoch_v_; }
  double total_v() const noexcept { return total_v_; }
  const std::vector<Point>& bases() const noexcept { return bases_; }
  const std::vector<double>& weights() const noexcept { return p_; }
  const std::vector<double>& cumulative_losses() const noexcept { return cum_; }
  const Point& decision() const noexcept { return x_; }
  const Point& hint() const noexcept { return h_; }
  /// V_{I_n} of each completed epoch, in order.
  const std::vector<double>& completed_epochs() const noexcept { return completed_; }

  double step_size(std::size_t i) const {
    return d_ * std::ldexp(1.0, static_cast<int>(i)) / std::sqrt(std::max(total_v_, kVarianceFloor));
  }

  /// Consume g_t, take h_{t+1}, return x_{t+1}.
  const Point& step(const Point& g, const Point& h_next) {
    g.require_finite();
    h_next.require_finite();
    x_.check_same_dim(g);
    x_.check_same_dim(h_next);

    const double dev = squared_distance(g, h_);
    epoch_v_ += dev;
    total_v_ += dev;

    std::vector<double> losses(n());
    for (std::size_t i = 0; i < n(); ++i) losses[i] = dot(g, bases_[i]);

    std::vector<double> m(n());
    for (std::size_t i = 0; i < n(); ++i) {
      if (!post_update_hint_) m[i] = dot(h_next, bases_[i]);
      bases_[i] = ogd_base_update(bases_[i], g, h_, h_next, step_size(i + 1));
      if (post_update_hint_) m[i] = dot(h_next, bases_[i]);
    }

    if (epoch_v_ > std::ldexp(1.0, static_cast<int>(n()))) {
      completed_.push_back(epoch_v_);
      bases_.push_back(Point::zeros(dim()));
      p_.assign(n(), 1.0 / static_cast<double>(n()));
      cum_.assign(n(), 0.0);
      epoch_v_ = 0.0;
    } else {
      for (std::size_t i = 0; i < n(); ++i) cum_[i] += losses[i];
      const double eps = 1.0 / (d_ * std::sqrt(std::max(epoch_v_, kVarianceFloor)));
      p_ = hedge_update(cum_, m, eps);
    }

    h_ = h_next;
    combine();
    return x_;
  }

 private:
  void combine() {
    x_ = Point::zeros(dim());
    for (std::size_t i = 0; i < n(); ++i) x_.axpy(p_[i], bases_[i]);
  }

  double d_;
  bool post_update_hint_;
  std::vector<Point> bases_;
  std::vector<double> p_;
  std::vector<double> cum_;
  std::vector<double> completed_;
  double epoch_v_ = 0.0;
  double total_v_ = 0.0;
  Point h_;
  Point x_;
};

/// Dynamic-regret learner: direction x_t from the ball ensemble, scale y_t
/// from the scalar optimistic learner, play w_t = y_t x_t with h_t = g_{t-1}.
class DynamicLearner {
 public:
  DynamicLearner(double eps, double gamma, std::size_t dim, bool hint_from_updated_bases = true)
      : ball_(dim, 1.0, hint_from_updated_bases), a1d_(make_alg4(eps, gamma, 1)), w_(dim), last_g_(dim) {}

  std::size_t dim() const noexcept { return w_.dim(); }
  const Point& decision() const noexcept { return w_; }
  const Point& x() const noexcept { return ball_.decision(); }
  double y() const noexcept { return a1d_.decision()[0]; }
  const Point& hint() const noexcept { return last_g_; }
  const BallEnsemble& ball() const noexcept { return ball_; }
  const Alg4Learner& scalar() const noexcept { return a1d_; }

  /// Consume g_t and return w_{t+1}.
  const Point& step(const Point& g) {
    g.require_finite();
    w_.check_same_dim(g);
    const double g_dot_x = dot(g, ball_.decision());
    const Point& x_next = ball_.step(g, g);
    a1d_.update(Point{g_dot_x});
    a1d_.predict(Point{dot(g, x_next)});
    last_g_ = g;
    w_ = a1d_.decision()[0] * x_next;
    w_.require_finite();
    return w_;
  }

 private:
  BallEnsemble ball_;
  Alg4Learner a1d_;
  Point w_;
  Point last_g_;
};

}  // namespace gradvar
