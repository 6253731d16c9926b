#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gradvar/errors.hpp"

namespace gradvar {

/// A d-dimensional real vector: decisions, gradients, hints and comparators.
///
/// Coordinates are required to be finite. Construction from raw data checks
/// this; in-place arithmetic does not, so learners call `require_finite()`
/// on whatever they emit.
class Point {
 public:
  Point() = default;
  explicit Point(std::size_t dim) : coords_(dim, 0.0) {}
  Point(std::initializer_list<double> values) : coords_(values) { require_finite(); }
  explicit Point(std::vector<double> values) : coords_(std::move(values)) { require_finite(); }

  static Point zeros(std::size_t dim) { return Point(dim); }

  std::size_t dim() const noexcept { return coords_.size(); }
  double& operator[](std::size_t i) noexcept { return coords_[i]; }
  double operator[](std::size_t i) const noexcept { return coords_[i]; }

  std::span<const double> coords() const noexcept { return coords_; }
  std::span<double> coords() noexcept { return coords_; }
  const std::vector<double>& values() const noexcept { return coords_; }

  bool is_finite() const noexcept {
    for (double v : coords_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  const Point& require_finite() const {
    if (!is_finite()) throw NumericalError("non-finite coordinate in Point");
    return *this;
  }

  Point& operator+=(const Point& o) {
    check_same_dim(o);
    for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += o.coords_[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    check_same_dim(o);
    for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= o.coords_[i];
    return *this;
  }
  Point& operator*=(double s) noexcept {
    for (double& v : coords_) v *= s;
    return *this;
  }

  /// this += s * o
  Point& axpy(double s, const Point& o) {
    check_same_dim(o);
    for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += s * o.coords_[i];
    return *this;
  }

  double squared_norm() const noexcept {
    double s = 0.0;
    for (double v : coords_) s += v * v;
    return s;
  }
  double norm() const noexcept { return std::sqrt(squared_norm()); }

  bool operator==(const Point&) const = default;

  void check_same_dim(const Point& o) const {
    if (o.dim() != dim())
      throw ConfigError("dimension mismatch: " + std::to_string(dim()) + " vs " + std::to_string(o.dim()));
  }

 private:
  std::vector<double> coords_;
};

inline Point operator+(Point a, const Point& b) { return a += b; }
inline Point operator-(Point a, const Point& b) { return a -= b; }
inline Point operator*(double s, Point a) { return a *= s; }
inline Point operator*(Point a, double s) { return a *= s; }
inline Point operator-(Point a) { return a *= -1.0; }

inline double dot(const Point& a, const Point& b) {
  a.check_same_dim(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline double distance(const Point& a, const Point& b) { return (a - b).norm(); }
inline double squared_distance(const Point& a, const Point& b) { return (a - b).squared_norm(); }

/// Running vector sum with Kahan compensation.
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(std::size_t dim) : sum_(dim), carry_(dim) {}

  void add(const Point& x) {
    sum_.check_same_dim(x);
    for (std::size_t i = 0; i < x.dim(); ++i) {
      const double y = x[i] - carry_[i];
      const double t = sum_[i] + y;
      carry_[i] = (t - sum_[i]) - y;
      sum_[i] = t;
    }
  }
  void subtract(const Point& x) { add(-x); }

  const Point& value() const noexcept { return sum_; }

 private:
  Point sum_;
  Point carry_;
};

}  // namespace gradvar
