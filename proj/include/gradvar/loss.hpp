#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gradvar/errors.hpp"
#include "gradvar/point.hpp"

namespace gradvar {

/// f(w) = 1/2 ||A w - b||^2 + <lin, w>, A stored row-major with `rows` rows.
struct QuadraticLoss {
  std::size_t rows = 0;
  std::vector<double> a;
  Point b;
  Point lin;
};

/// f(w) = log(1 + exp(-label <feature, w>)).
struct LogisticLoss {
  Point feature;
  double label = 1.0;
};

/// f(w) = huber_delta(<feature, w> - target), the smoothed absolute value.
struct HuberLoss {
  Point feature;
  double target = 0.0;
  double delta = 1.0;
};

struct LossValue {
  double value;
  Point gradient;
};

/// A differentiable convex loss with optional smoothness and infimum metadata.
class LossOracle {
 public:
  using Family = std::variant<QuadraticLoss, LogisticLoss, HuberLoss>;

  LossOracle(Family family, std::size_t dim, std::optional<double> smoothness,
             std::optional<double> inf_value)
      : family_(std::move(family)), dim_(dim), smoothness_(smoothness), inf_value_(inf_value) {}

  /// 1/2 L ||w - center||^2 + <lin, w>; smoothness and infimum are exact.
  static LossOracle scaled_quadratic(double curvature, const Point& center, const Point& lin) {
    if (!(curvature > 0.0)) throw ConfigError("quadratic curvature must be positive");
    center.check_same_dim(lin);
    const std::size_t d = center.dim();
    const double s = std::sqrt(curvature);
    QuadraticLoss q;
    q.rows = d;
    q.a.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) q.a[i * d + i] = s;
    q.b = s * center;
    q.lin = lin;
    // min is attained at center - lin / L
    const double inf = dot(lin, center) - lin.squared_norm() / (2.0 * curvature);
    return LossOracle(std::move(q), d, curvature, inf);
  }

  /// f = 0 on R^dim.
  static LossOracle zero(std::size_t dim) {
    QuadraticLoss q{0, {}, Point(0), Point::zeros(dim)};
    return LossOracle(std::move(q), dim, 0.0, 0.0);
  }

  /// General quadratic. When `smoothness` is absent it is estimated as the
  /// top eigenvalue of A^T A by power iteration, padded slightly upward.
  static LossOracle quadratic(std::size_t rows, std::vector<double> a, Point b, Point lin,
                              std::optional<double> smoothness = std::nullopt,
                              std::optional<double> inf_value = std::nullopt) {
    const std::size_t d = lin.dim();
    if (rows == 0 || a.size() != rows * d || b.dim() != rows)
      throw ConfigError("quadratic loss: inconsistent matrix shape");
    QuadraticLoss q{rows, std::move(a), std::move(b), std::move(lin)};
    if (!smoothness) smoothness = top_eigenvalue_ata(q, d);
    return LossOracle(std::move(q), d, smoothness, inf_value);
  }

  static LossOracle logistic(Point feature, double label) {
    if (label != 1.0 && label != -1.0) throw ConfigError("logistic label must be +1 or -1");
    const double l = feature.squared_norm() / 4.0;
    const double inf = feature.squared_norm() > 0.0 ? 0.0 : std::log(2.0);
    const std::size_t d = feature.dim();
    return LossOracle(LogisticLoss{std::move(feature), label}, d, l, inf);
  }

  static LossOracle huber(Point feature, double target, double delta) {
    if (!(delta > 0.0)) throw ConfigError("huber delta must be positive");
    const double l = feature.squared_norm() / delta;
    const double inf = feature.squared_norm() > 0.0 ? 0.0 : huber_value(-target, delta);
    const std::size_t d = feature.dim();
    return LossOracle(HuberLoss{std::move(feature), target, delta}, d, l, inf);
  }

  std::size_t dim() const noexcept { return dim_; }
  std::optional<double> smoothness() const noexcept { return smoothness_; }
  std::optional<double> inf_value() const noexcept { return inf_value_; }
  const Family& family() const noexcept { return family_; }

  LossValue evaluate(const Point& w) const {
    if (w.dim() != dim_)
      throw ConfigError("loss evaluated at dimension " + std::to_string(w.dim()) + ", expected " +
                        std::to_string(dim_));
    return std::visit([&](const auto& f) { return eval(f, w); }, family_);
  }

  double value(const Point& w) const { return evaluate(w).value; }
  Point gradient(const Point& w) const { return evaluate(w).gradient; }

 private:
  static double huber_value(double r, double delta) {
    const double ar = std::abs(r);
    return ar <= delta ? r * r / (2.0 * delta) : ar - delta / 2.0;
  }

  static LossValue eval(const QuadraticLoss& q, const Point& w) {
    const std::size_t d = w.dim();
    Point grad = q.lin;
    double value = dot(q.lin, w);
    for (std::size_t r = 0; r < q.rows; ++r) {
      double res = -q.b[r];
      for (std::size_t j = 0; j < d; ++j) res += q.a[r * d + j] * w[j];
      value += 0.5 * res * res;
      for (std::size_t j = 0; j < d; ++j) grad[j] += res * q.a[r * d + j];
    }
    return {value, std::move(grad)};
  }

  static LossValue eval(const LogisticLoss& f, const Point& w) {
    const double m = f.label * dot(f.feature, w);
    // log(1 + exp(-m)) and its derivative -sigmoid(-m), both overflow-safe
    const double value = m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    const double s = m > 0.0 ? std::exp(-m) / (1.0 + std::exp(-m)) : 1.0 / (1.0 + std::exp(m));
    return {value, (-f.label * s) * f.feature};
  }

  static LossValue eval(const HuberLoss& f, const Point& w) {
    const double r = dot(f.feature, w) - f.target;
    const double slope = std::clamp(r / f.delta, -1.0, 1.0);
    return {huber_value(r, f.delta), slope * f.feature};
  }

  static double top_eigenvalue_ata(const QuadraticLoss& q, std::size_t d) {
    std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d)));
    std::vector<double> av(q.rows), next(d);
    double lambda = 0.0;
    for (int it = 0; it < 1000; ++it) {
      for (std::size_t r = 0; r < q.rows; ++r) {
        av[r] = 0.0;
        for (std::size_t j = 0; j < d; ++j) av[r] += q.a[r * d + j] * v[j];
      }
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t r = 0; r < q.rows; ++r)
        for (std::size_t j = 0; j < d; ++j) next[j] += q.a[r * d + j] * av[r];
      double n = 0.0;
      for (double x : next) n += x * x;
      n = std::sqrt(n);
      if (n == 0.0) return 0.0;
      const double prev = lambda;
      lambda = n;
      for (std::size_t j = 0; j < d; ++j) v[j] = next[j] / n;
      if (it > 10 && std::abs(lambda - prev) <= 1e-14 * lambda) break;
    }
    return lambda * (1.0 + 1e-6);
  }

  Family family_;
  std::size_t dim_;
  std::optional<double> smoothness_;
  std::optional<double> inf_value_;
};

/// (f(w), grad f(w)) with finiteness enforced on both.
inline LossValue eval_loss_and_grad(const LossOracle& oracle, const Point& w) {
  LossValue out = oracle.evaluate(w);
  if (!std::isfinite(out.value)) throw NumericalError("loss value is not finite");
  out.gradient.require_finite();
  return out;
}

/// Bregman divergence D_f(x, y) = f(x) - f(y) - <grad f(y), x - y>.
inline double bregman(const LossOracle& f, const Point& x, const Point& y) {
  const LossValue fy = f.evaluate(y);
  return f.value(x) - fy.value - dot(fy.gradient, x - y);
}

}  // namespace gradvar
