#pragma once

#include <concepts>
#include <cstddef>
#include <utility>

#include "gradvar/errors.hpp"
#include "gradvar/point.hpp"
#include "gradvar/virtual_clip.hpp"

namespace gradvar {

/// A non-optimistic online learner usable on R^d or R: it exposes its
/// current decision and consumes one gradient per round.
///
/// Conforming learners are expected to guarantee
///   Reg_T(u) <= A_T(u) + B_T(u) sqrt(sum |g_t|^2)
/// with B_T(u) <= |u| lambda_T(u) for the scalar instance.
template <class L>
concept BaseLearner = requires(L learner, const L& clearner, const Point& g) {
  { clearner.decision() } -> std::convertible_to<const Point&>;
  { clearner.dim() } -> std::convertible_to<std::size_t>;
  learner.update(g);
};

/// Default base: the virtual-clipping learner with hints fixed at zero.
struct ClipBaseFactory {
  ClipLearner operator()(double eps, double gamma, std::size_t dim) const { return ClipLearner(eps, gamma, dim); }
};

/// Optimistic reduction: plays w_t = x_t - y_t h_t where x_t comes from a
/// learner on R^d fed g_t and y_t from a learner on R fed -<g_t, h_t>.
template <BaseLearner BaseX, BaseLearner BaseY = BaseX>
class ReductionLearner {
 public:
  ReductionLearner(BaseX ax, BaseY ay) : ax_(std::move(ax)), ay_(std::move(ay)), h_(ax_.dim()) {
    if (ay_.dim() != 1) throw ConfigError("reduction: scalar base must be one-dimensional");
    predict(Point::zeros(ax_.dim()));
  }

  std::size_t dim() const noexcept { return ax_.dim(); }
  const BaseX& ax() const noexcept { return ax_; }
  const BaseY& ay() const noexcept { return ay_; }

  /// Start a round with hint h_t; returns w_t = x_t - y_t h_t.
  const Point& predict(const Point& h) {
    h.require_finite();
    ax_.decision().check_same_dim(h);
    h_ = h;
    x_ = ax_.decision();
    y_ = ay_.decision()[0];
    w_ = x_;
    w_.axpy(-y_, h_);
    w_.require_finite();
    predicted_ = true;
    return w_;
  }

  /// Finish the round with gradient g_t.
  void update(const Point& g) {
    if (!predicted_) throw ConfigError("reduction: update called before predict in this round");
    g.require_finite();
    last_y_feed_ = -dot(g, h_);
    ax_.update(g);
    ay_.update(Point{last_y_feed_});
    predicted_ = false;
  }

  /// update(g_t) followed by predict(h_{t+1}).
  const Point& step(const Point& g, const Point& h_next) {
    update(g);
    return predict(h_next);
  }

  const Point& decision() const noexcept { return w_; }
  const Point& hint() const noexcept { return h_; }
  const Point& x() const noexcept { return x_; }
  double y() const noexcept { return y_; }
  /// Scalar gradient handed to the R-learner in the last update.
  double last_y_feed() const noexcept { return last_y_feed_; }

 private:
  BaseX ax_;
  BaseY ay_;
  Point h_;
  Point x_;
  double y_ = 0.0;
  Point w_;
  double last_y_feed_ = 0.0;
  bool predicted_ = false;
};

/// Efficient fully-adaptive optimistic learner: A_x(eps, gamma) on R^d and
/// A_y(eps / gamma, gamma^2) on R.
template <class Factory = ClipBaseFactory>
auto make_alg4(double eps, double gamma, std::size_t dim, Factory factory = {}) {
  if (!(eps > 0.0) || !(gamma > 0.0)) throw ConfigError("alg4: eps and gamma must be positive");
  if (dim == 0) throw ConfigError("alg4: dimension must be positive");
  auto ax = factory(eps, gamma, dim);
  auto ay = factory(eps / gamma, gamma * gamma, 1);
  return ReductionLearner<decltype(ax), decltype(ay)>(std::move(ax), std::move(ay));
}

using Alg4Learner = ReductionLearner<ClipLearner, ClipLearner>;

}  // namespace gradvar
