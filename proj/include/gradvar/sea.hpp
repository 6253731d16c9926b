#pragma once

// Stochastically-extended adversarial environments: each round's loss is
//   f_t(w) = 1/2 L |w - c_t|^2 + <xi_t, w>,   xi_t ~ N(0, sigma^2 I)
// so the mean loss F_t = 1/2 L |w - c_t|^2 is chosen by a deterministic
// schedule and the noise only touches the linear term.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "gradvar/errors.hpp"
#include "gradvar/loss.hpp"
#include "gradvar/point.hpp"

namespace gradvar {

/// Counter-based randomness: every draw is a pure function of its key, so
/// auxiliary estimates never shift the main stream.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t t, std::uint64_t idx) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ t);
  return splitmix64(h ^ idx);
}

/// Uniform on the open interval (0, 1).
inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t t, std::uint64_t idx) {
  return (static_cast<double>(hash(seed, stream, t, idx) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal by Box-Muller on two keyed uniforms.
inline double gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t t, std::uint64_t idx) {
  const double u1 = uniform(seed, stream, t, 2 * idx);
  const double u2 = uniform(seed, stream, t, 2 * idx + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

enum Stream : std::uint64_t { kNoise = 1, kCenters = 2, kMonteCarlo = 3, kJitter = 4, kFeatures = 5 };

}  // namespace rng

enum class MeanSchedule {
  fixed,     // c_t = c
  jitter,    // c_t = c + i.i.d. Gaussian offsets of scale radius / 10
  drifting,  // c_t on a circle of the given radius, one revolution over T
  abrupt,    // piecewise constant over `segments` equal blocks
};

inline MeanSchedule parse_schedule(const std::string& s) {
  if (s == "fixed") return MeanSchedule::fixed;
  if (s == "jitter") return MeanSchedule::jitter;
  if (s == "drifting") return MeanSchedule::drifting;
  if (s == "abrupt") return MeanSchedule::abrupt;
  throw ConfigError("unknown mean schedule '" + s + "'");
}

inline const char* to_string(MeanSchedule s) {
  switch (s) {
    case MeanSchedule::fixed: return "fixed";
    case MeanSchedule::jitter: return "jitter";
    case MeanSchedule::drifting: return "drifting";
    case MeanSchedule::abrupt: return "abrupt";
  }
  return "?";
}

struct SeaSpec {
  std::size_t horizon = 0;
  std::size_t dim = 1;
  double curvature = 1.0;  // L
  double sigma = 0.0;      // per-coordinate noise scale
  double radius = 1.0;     // scale of the mean centers
  std::size_t segments = 4;
  MeanSchedule schedule = MeanSchedule::fixed;
  std::uint64_t seed = 0;

  void validate() const {
    if (dim == 0) throw ConfigError("sea: dimension must be positive");
    if (!(curvature > 0.0) || !std::isfinite(curvature)) throw ConfigError("sea: curvature must be positive");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sea: sigma must be nonnegative");
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw ConfigError("sea: radius must be nonnegative");
    if (segments == 0) throw ConfigError("sea: segments must be positive");
  }
};

namespace detail {

// A fixed unit direction derived from the seed.
inline Point seeded_direction(const SeaSpec& s, std::uint64_t key) {
  Point v(s.dim);
  for (std::size_t i = 0; i < s.dim; ++i) v[i] = rng::gaussian(s.seed, rng::kCenters, key, i);
  const double n = v.norm();
  if (n == 0.0) {
    v[0] = 1.0;
    return v;
  }
  return (1.0 / n) * v;
}

}  // namespace detail

/// Center c_t of the mean loss F_t (also its minimiser).
inline Point mean_center(const SeaSpec& s, std::size_t t) {
  if (t < 1 || t > s.horizon) throw DomainError("round " + std::to_string(t) + " outside [1, T]");
  switch (s.schedule) {
    case MeanSchedule::fixed:
      return s.radius * detail::seeded_direction(s, 0);
    case MeanSchedule::jitter: {
      Point c = s.radius * detail::seeded_direction(s, 0);
      for (std::size_t i = 0; i < s.dim; ++i) c[i] += 0.1 * s.radius * rng::gaussian(s.seed, rng::kJitter, t, i);
      return c;
    }
    case MeanSchedule::drifting: {
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(t - 1) / static_cast<double>(s.horizon);
      Point c(s.dim);
      c[0] = s.radius * std::cos(phase);
      if (s.dim > 1) c[1] = s.radius * std::sin(phase);
      return c;
    }
    case MeanSchedule::abrupt: {
      const std::size_t block = (t - 1) * s.segments / s.horizon;
      return s.radius * detail::seeded_direction(s, 1 + block);
    }
  }
  throw ConfigError("unknown mean schedule");
}

/// Realized round: the sampled loss plus the parameters that produced it.
struct SeaRound {
  LossOracle loss;
  Point center;
  Point noise;
};

inline Point sample_noise(const SeaSpec& s, std::size_t t, std::uint64_t stream = rng::kNoise,
                          std::uint64_t sample = 0) {
  Point xi(s.dim);
  if (s.sigma == 0.0) return xi;
  for (std::size_t i = 0; i < s.dim; ++i) xi[i] = s.sigma * rng::gaussian(s.seed, stream, t, sample * s.dim + i);
  return xi;
}

inline SeaRound sample_round(const SeaSpec& s, std::size_t t) {
  Point c = mean_center(s, t);
  Point xi = sample_noise(s, t);
  LossOracle f = LossOracle::scaled_quadratic(s.curvature, c, xi);
  return {std::move(f), std::move(c), std::move(xi)};
}

/// Mean loss F_t.
inline LossOracle mean_loss(const SeaSpec& s, std::size_t t) {
  return LossOracle::scaled_quadratic(s.curvature, mean_center(s, t), Point::zeros(s.dim));
}

/// sigma_t^2(u) for the Gaussian linear-term family: d sigma^2 for every u.
inline double sigma_sq(const SeaSpec& s, std::size_t t, const Point&) {
  if (t < 1 || t > s.horizon) throw DomainError("round " + std::to_string(t) + " outside [1, T]");
  return static_cast<double>(s.dim) * s.sigma * s.sigma;
}

struct MonteCarloEstimate {
  double mean;
  double std_error;
};

/// Monte-Carlo E|grad f_t(u) - grad F_t(u)|^2 over n_mc fresh samples drawn
/// from a stream disjoint from the one the learner sees.
inline MonteCarloEstimate sigma_sq_mc(const SeaSpec& s, std::size_t t, const Point& u, std::size_t n_mc) {
  if (n_mc == 0) throw ConfigError("sigma_sq_mc: n_mc must be positive");
  const Point mean_grad = mean_loss(s, t).gradient(u);
  const Point c = mean_center(s, t);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < n_mc; ++k) {
    const Point xi = sample_noise(s, t, rng::kMonteCarlo, k);
    const LossOracle f = LossOracle::scaled_quadratic(s.curvature, c, xi);
    const double v = squared_distance(f.gradient(u), mean_grad);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(n_mc);
  const double mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean, std::sqrt(var / n)};
}

/// Sigma_t^2(u) = |grad F_t(u) - grad F_{t-1}(u)|^2 = L^2 |c_t - c_{t-1}|^2.
inline double adv_variation_sq(const SeaSpec& s, std::size_t t, const Point& u) {
  if (t < 2) throw DomainError("adversarial variation is undefined at t = 1");
  return squared_distance(mean_loss(s, t).gradient(u), mean_loss(s, t - 1).gradient(u));
}

}  // namespace gradvar
