#pragma once

// Brute-force verifiers. Nothing here is used by a learner; every routine
// recomputes its answer from definitions so it can check the fast paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gradvar/core.hpp"
#include "gradvar/dynamic.hpp"
#include "gradvar/errors.hpp"
#include "gradvar/loss.hpp"
#include "gradvar/point.hpp"
#include "gradvar/regularizer.hpp"

namespace gradvar::oracle {

/// Golden-section minimiser of a unimodal function on [0, hi].
inline double numeric_radial_argmin(const std::function<double(double)>& objective, double hi,
                                    double tol = 1e-12) {
  if (!(hi >= 0.0) || !std::isfinite(hi)) throw DomainError("radial argmin needs a finite hi >= 0");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double r) {
    const double v = objective(r);
    if (!std::isfinite(v)) throw NumericalError("radial argmin: non-finite objective at r = " + std::to_string(r));
    return v;
  };
  double a = 0.0;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol * std::max(1.0, b)) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    if (c >= d) break;
  }
  const double mid = 0.5 * (a + b);
  // The bracket may have collapsed onto an endpoint of [0, hi].
  double best = mid;
  double fbest = f(mid);
  for (double cand : {0.0, hi}) {
    const double fv = f(cand);
    if (fv < fbest) {
      fbest = fv;
      best = cand;
    }
  }
  return best;
}

/// Central finite-difference gradient.
inline Point finite_difference_gradient(const std::function<double(const Point&)>& f, const Point& x,
                                        double h = 1e-6) {
  Point g(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) {
    Point xp = x;
    Point xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// sum_{t=2}^T |grad f_t(u_{t-1}) - grad f_{t-1}(u_{t-1})|^2
inline double gradient_variation(const std::vector<LossOracle>& losses, const std::vector<Point>& u) {
  if (losses.size() != u.size()) throw ConfigError("gradient_variation: loss and comparator counts differ");
  double v = 0.0;
  for (std::size_t t = 1; t < losses.size(); ++t)
    v += squared_distance(losses[t].gradient(u[t - 1]), losses[t - 1].gradient(u[t - 1]));
  return v;
}

/// sum_{t=2}^T sup_{w in grid} |grad f_t(w) - grad f_{t-1}(w)|^2
inline double gradient_variation_sup(const std::vector<LossOracle>& losses, const std::vector<Point>& grid) {
  double v = 0.0;
  for (std::size_t t = 1; t < losses.size(); ++t) {
    double best = 0.0;
    for (const Point& w : grid) best = std::max(best, squared_distance(losses[t].gradient(w), losses[t - 1].gradient(w)));
    v += best;
  }
  return v;
}

/// Regular grid on [-r, r]^dim with `per_axis` points per axis.
inline std::vector<Point> box_grid(std::size_t dim, double r, std::size_t per_axis) {
  if (per_axis < 2) throw ConfigError("box_grid needs at least two points per axis");
  std::vector<Point> out;
  std::vector<std::size_t> idx(dim, 0);
  while (true) {
    Point p(dim);
    for (std::size_t i = 0; i < dim; ++i)
      p[i] = -r + 2.0 * r * static_cast<double>(idx[i]) / static_cast<double>(per_axis - 1);
    out.push_back(std::move(p));
    std::size_t k = 0;
    while (k < dim && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == dim) break;
  }
  return out;
}

struct PathLengths {
  double p;     // sum |u_t - u_{t-1}|
  double p_sq;  // sum |u_t - u_{t-1}|^2
  double m;     // max |u_t|
};

inline PathLengths path_lengths(const std::vector<Point>& u) {
  if (u.empty()) throw ConfigError("path_lengths: empty comparator sequence");
  PathLengths out{0.0, 0.0, u[0].norm()};
  for (std::size_t t = 1; t < u.size(); ++t) {
    const double s = squared_distance(u[t], u[t - 1]);
    out.p += std::sqrt(s);
    out.p_sq += s;
    out.m = std::max(out.m, u[t].norm());
  }
  return out;
}

/// F_T = sum f_t(u_t) - inf f_t; needs every loss to carry its infimum.
inline double comparator_gap(const std::vector<LossOracle>& losses, const std::vector<Point>& u) {
  double total = 0.0;
  for (std::size_t t = 0; t < losses.size(); ++t) {
    if (!losses[t].inf_value()) throw ConfigError("comparator_gap: loss without a known infimum");
    total += losses[t].value(u[t]) - *losses[t].inf_value();
  }
  return total;
}

// ---------------------------------------------------------------------------
// Inequality checks

inline constexpr double kLemmaTolerance = 1e-6;

struct LemmaResult {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  // Absolute rounding allowance for sides that are computed by cancellation.
  double rounding = 0.0;

  /// (rhs - lhs + rounding) scaled by |rhs| (or by 1 when rhs is zero).
  double margin() const {
    const double scale = rhs != 0.0 ? std::abs(rhs) : 1.0;
    return (rhs - lhs + rounding) / scale;
  }
  bool pass(double tol = kLemmaTolerance) const { return std::isfinite(lhs) && margin() >= -tol; }
};

/// sum_t |g_t(w_t) - g_{t-1}(w_{t-1})|^2 (with f_0 = 0) against
/// min{|g_1(w_1)|^2 + 4 V_T + 4 L^2 P_sq, 16 L F_T} + 16 L sum D_{f_t}(u_t, w_t).
inline LemmaResult check_variation_decomposition(const std::vector<LossOracle>& losses, const std::vector<Point>& w,
                                                 const std::vector<Point>& u, double smoothness) {
  if (losses.size() != w.size() || losses.size() != u.size())
    throw ConfigError("variation decomposition: sequence lengths differ");
  LemmaResult r{"variation_decomposition"};
  if (losses.empty()) return r;
  const Point g1 = losses[0].gradient(w[0]);
  r.lhs = g1.squared_norm();
  for (std::size_t t = 1; t < losses.size(); ++t)
    r.lhs += squared_distance(losses[t].gradient(w[t]), losses[t - 1].gradient(w[t - 1]));
  double breg = 0.0;
  for (std::size_t t = 0; t < losses.size(); ++t) breg += bregman(losses[t], u[t], w[t]);
  const double v = gradient_variation(losses, u);
  const PathLengths pl = path_lengths(u);
  const double via_variation = g1.squared_norm() + 4.0 * v + 4.0 * smoothness * smoothness * pl.p_sq;
  const double via_loss = 16.0 * smoothness * comparator_gap(losses, u);
  r.rhs = std::min(via_variation, via_loss) + 16.0 * smoothness * breg;
  return r;
}

/// sum_t alpha_t |delta_t|^2 / sqrt(vbar_t) <= 4 eps m_T, where alpha_t and
/// vbar_t are the values in force when delta_t was observed.
inline LemmaResult check_tuning_sum(const std::vector<double>& delta_sq, const std::vector<double>& alpha,
                                    const std::vector<double>& vbar, double eps, double m_final) {
  if (delta_sq.size() != alpha.size() || delta_sq.size() != vbar.size())
    throw ConfigError("tuning sum: sequence lengths differ");
  LemmaResult r{"tuning_sum"};
  for (std::size_t t = 0; t < delta_sq.size(); ++t) r.lhs += alpha[t] * delta_sq[t] / std::sqrt(vbar[t]);
  r.rhs = 4.0 * eps * m_final;
  return r;
}

/// Builds the schedule from scratch for scalar g_t and nondecreasing caps h_t >= |g_t|.
inline LemmaResult check_tuning_sum_scalar(const std::vector<double>& g, const std::vector<double>& h, double eps) {
  if (g.size() != h.size()) throw ConfigError("tuning sum: sequence lengths differ");
  std::vector<double> dsq(g.size()), alpha(g.size()), vbar(g.size());
  double sum_g2 = 0.0;
  double sum_ratio = 0.0;
  for (std::size_t t = 0; t < g.size(); ++t) {
    const double b = 4.0 + sum_ratio;
    const double lb = std::log(b);
    alpha[t] = eps / (std::sqrt(b) * lb * lb);
    vbar[t] = 4.0 * h[t] * h[t] + sum_g2;
    dsq[t] = g[t] * g[t];
    sum_g2 += g[t] * g[t];
    sum_ratio += g[t] * g[t] / (h[t] * h[t]);
  }
  return check_tuning_sum(dsq, alpha, vbar, eps, g.empty() ? 0.0 : h.back());
}

/// |grad f(x) - grad f(y)|^2 <= 2 L D_f(x, y)
inline LemmaResult check_smoothness_bregman(const LossOracle& f, const Point& x, const Point& y, double smoothness) {
  LemmaResult r{"smoothness_bregman"};
  r.lhs = squared_distance(f.gradient(x), f.gradient(y));
  r.rhs = 2.0 * smoothness * bregman(f, x, y);
  const double terms = std::abs(f.value(x)) + std::abs(f.value(y)) + std::abs(dot(f.gradient(y), x - y));
  r.rounding = 2.0 * smoothness * 8.0 * std::numeric_limits<double>::epsilon() * terms;
  return r;
}

/// |grad f(x)|^2 <= 2 L (f(x) - inf f)
inline LemmaResult check_self_bounding(const LossOracle& f, const Point& x, double smoothness) {
  if (!f.inf_value()) throw ConfigError("self-bounding check needs the loss infimum");
  LemmaResult r{"self_bounding"};
  r.lhs = f.gradient(x).squared_norm();
  r.rhs = 2.0 * smoothness * (f.value(x) - *f.inf_value());
  r.rounding = 2.0 * smoothness * 8.0 * std::numeric_limits<double>::epsilon() *
               (std::abs(f.value(x)) + std::abs(*f.inf_value()));
  return r;
}

/// Runs one-step optimistic OGD on the unit ball from the origin and checks
///   sum <g_t, w_t - u_t> <= (5 D^2 + 12 D P_T) / (8 eta_{T+1})
///                           + sum 2 eta_{t+1} |g_t - h_t|^2
///                           - sum_{t<T} |w_t - w_{t+1}|^2 / (4 eta_{t+1}).
/// `h` holds h_1..h_{T+1}; `eta` holds eta_2..eta_{T+1} (nonincreasing).
inline LemmaResult check_one_step_ogd(const std::vector<Point>& g, const std::vector<Point>& h,
                                      const std::vector<double>& eta, const std::vector<Point>& u,
                                      double diameter) {
  const std::size_t n = g.size();
  if (h.size() != n + 1 || eta.size() != n || u.size() != n) throw ConfigError("one-step OGD: sequence lengths differ");
  LemmaResult r{"one_step_ogd"};
  if (n == 0) return r;
  Point w = Point::zeros(g[0].dim());
  double movement = 0.0;
  double stability = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    r.lhs += dot(g[t], w - u[t]);
    stability += 2.0 * eta[t] * squared_distance(g[t], h[t]);
    Point next = ogd_base_update(w, g[t], h[t], h[t + 1], eta[t]);
    if (t + 1 < n) movement += squared_distance(w, next) / (4.0 * eta[t]);
    w = std::move(next);
  }
  const double p = path_lengths(u).p;
  r.rhs = (5.0 * diameter * diameter + 12.0 * diameter * p) / (8.0 * eta.back()) + stability - movement;
  return r;
}

/// Runs optimistic Hedge from uniform weights and checks, for expert `i`,
///   sum <l_t, p_t - e_i> <= ln N / eps_T + sum <l_t - m_t, p_t - p_{t+1}>
///                           - sum |p_t - p_{t+1}|_1^2 / (2 eps_{t-1}),
/// with eps_0 = eps_1. `m` holds m_1..m_{T+1}, `eps` holds eps_1..eps_{T+1}.
inline std::vector<LemmaResult> check_optimistic_hedge(const std::vector<std::vector<double>>& losses,
                                                       const std::vector<std::vector<double>>& m,
                                                       const std::vector<double>& eps) {
  const std::size_t T = losses.size();
  if (m.size() != T + 1 || eps.size() != T + 1) throw ConfigError("optimistic hedge: sequence lengths differ");
  if (T == 0) return {};
  const std::size_t n = losses[0].size();
  std::vector<double> cum(n, 0.0);
  std::vector<double> p = hedge_update(cum, m[0], eps[0]);
  std::vector<double> expert_loss(n, 0.0);
  double learner_loss = 0.0;
  double optimism = 0.0;
  double movement = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      cum[i] += losses[t][i];
      expert_loss[i] += losses[t][i];
      learner_loss += losses[t][i] * p[i];
    }
    const std::vector<double> next = hedge_update(cum, m[t + 1], eps[t + 1]);
    double l1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      optimism += (losses[t][i] - m[t][i]) * (p[i] - next[i]);
      l1 += std::abs(p[i] - next[i]);
    }
    const double eps_prev = t == 0 ? eps[0] : eps[t - 1];
    movement += l1 * l1 / (2.0 * eps_prev);
    p = next;
  }
  std::vector<LemmaResult> out;
  for (std::size_t i = 0; i < n; ++i) {
    LemmaResult r{"optimistic_hedge"};
    r.lhs = learner_loss - expert_loss[i];
    r.rhs = std::log(static_cast<double>(n)) / eps[T - 1] + optimism - movement;
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Alternative iterate routes

/// Bisection for the r >= 0 with integrand(r, p) + beta r = target, run to
/// bracket collapse on [0, target / beta] (or an expanding bracket when
/// beta = 0).
inline double invert_radial_derivative(double target, const PfRegParams& p, double beta) {
  if (target <= 0.0) return 0.0;
  auto f = [&](double r) { return integrand(r, p) + beta * r - target; };
  double lo = 0.0;
  double hi = beta > 0.0 ? target / beta : 1.0;
  if (beta <= 0.0) {
    while (f(hi) < 0.0) {
      hi *= 2.0;
      if (!std::isfinite(hi)) throw NumericalError("radial inverse: bracket overflow");
    }
  }
  while (true) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

/// Centered-mirror-descent form of optimistic FTRL with the hybrid
/// regularizer Psi_t = psi_t + (beta/2)|w|^2:
///   grad Psi_{t+1}(w_{t+1}) = grad Psi_t(w_t) - (g_t - h_t + h_{t+1}),
/// started from w_1 = 0. `params[t]` are the psi parameters of Psi_{t+1}
/// (params[0] is Psi_1). Returns w_1..w_{T+1}.
inline std::vector<Point> cmd_iterates(const std::vector<Point>& g, const std::vector<Point>& h,
                                       const std::vector<PfRegParams>& params, double beta) {
  const std::size_t T = g.size();
  if (h.size() != T + 1 || params.size() != T + 1) throw ConfigError("cmd route: sequence lengths differ");
  const std::size_t dim = h[0].dim();
  std::vector<Point> w{Point::zeros(dim)};
  for (std::size_t t = 0; t < T; ++t) {
    const double r = w[t].norm();
    Point grad = r > 0.0 ? ((integrand(r, params[t]) + beta * r) / r) * w[t] : Point::zeros(dim);
    grad -= g[t] - h[t] + h[t + 1];
    const double target = grad.norm();
    if (target == 0.0) {
      w.push_back(Point::zeros(dim));
      continue;
    }
    const double radius = invert_radial_derivative(target, params[t + 1], beta);
    w.push_back((radius / target) * grad);
  }
  return w;
}

/// Stability term of one FTRL round for the linearithmic regularizer:
///   <d, w - w'> - D_{psi}(w', w) - (psi' - psi)(w')
/// with the gradient of psi taken by a central difference in the radius.
inline double stability_term(const Point& d, const Point& w, const Point& w_next, const PfRegParams& p,
                             const PfRegParams& p_next) {
  auto radial_slope = [&](double r) {
    const double h = std::max(1e-7, 1e-6 * r);
    const double lo = std::max(0.0, r - h);
    return (psi_value(r + h, p) - psi_value(lo, p)) / (r + h - lo);
  };
  const double r = w.norm();
  Point grad = r > 0.0 ? (radial_slope(r) / r) * w : Point::zeros(w.dim());
  const double r_next = w_next.norm();
  const double breg = psi_value(r_next, p) - psi_value(r, p) - dot(grad, w_next - w);
  return dot(d, w - w_next) - breg - (psi_value(r_next, p_next) - psi_value(r_next, p));
}

// ---------------------------------------------------------------------------
// Bound evaluators (every hidden constant set to 1)

enum class Theorem { oftrl, virtual_clip, alg4, comparator_dynamic, dynamic, sea };

inline Theorem parse_theorem(const std::string& s) {
  static const std::map<std::string, Theorem> names{
      {"oftrl", Theorem::oftrl},         {"virtual_clip", Theorem::virtual_clip},
      {"alg4", Theorem::alg4},           {"comparator_dynamic", Theorem::comparator_dynamic},
      {"dynamic", Theorem::dynamic},     {"sea", Theorem::sea}};
  const auto it = names.find(s);
  if (it == names.end()) throw ConfigError("unknown bound '" + s + "'");
  return it->second;
}

struct BoundInputs {
  std::size_t horizon = 0;
  double m = 0.0;          // |u| (static) or max |u_t| (dynamic)
  double path = 0.0;       // P_T
  double variation = 0.0;  // V_T(u), or the SEA sum sigma^2 + Sigma^2
  double smoothness = 0.0;
  double lipschitz = 0.0;  // G
  double eps = 1.0;
  double gamma = 1.0;
};

struct BoundReport {
  std::string theorem;
  std::vector<std::pair<std::string, double>> components;
  double bound = 0.0;
  double regret = 0.0;

  double ratio() const { return bound > 0.0 ? regret / bound : 0.0; }
  double component(const std::string& name) const {
    for (const auto& [k, v] : components)
      if (k == name) return v;
    throw ConfigError("no bound component '" + name + "'");
  }
};

inline BoundReport evaluate_bound(Theorem which, const BoundInputs& in, double regret) {
  const double u = in.m;
  const double G = in.lipschitz;
  const double L = in.smoothness;
  const double eps = in.eps;
  const double gam = in.gamma;
  const double V = in.variation;
  const double sqrt_t = std::sqrt(static_cast<double>(in.horizon));
  BoundReport rep;
  rep.regret = regret;
  auto add = [&](const char* name, double v) { rep.components.emplace_back(name, std::max(0.0, v)); };

  switch (which) {
    case Theorem::oftrl: {
      rep.theorem = "oftrl";
      const double lp = log_plus(u * sqrt_t / eps);
      add("leading", u * std::sqrt(V * lp));
      add("smoothness", L * u * u);
      add("lipschitz", G * u * lp);
      add("offset", eps * G);
      break;
    }
    case Theorem::virtual_clip: {
      rep.theorem = "virtual_clip";
      const double lp = log_plus(u * sqrt_t / eps);
      add("leading", u * std::sqrt(V * lp));
      add("smoothness", L * u * u);
      add("eps_gamma", eps * gam);
      add("eps_G", eps * G);
      add("gamma_u", gam * u);
      add("quadratic_u", gam / eps * u * u);
      add("G_squared", eps / gam * G * G);
      break;
    }
    case Theorem::alg4:
    case Theorem::dynamic:
    case Theorem::sea: {
      // Static: S = |u|^2. Dynamic: S = M^2 + M P_T, and the extra path terms.
      const bool is_static = which == Theorem::alg4;
      rep.theorem = is_static ? "alg4" : (which == Theorem::dynamic ? "dynamic" : "sea");
      const double s = is_static ? u * u : u * u + u * in.path;
      const double lx = G > 0.0 ? log_plus(u * G * sqrt_t / (eps * gam)) : 1.0;
      const double lg = log_plus(G / gam);
      add("leading", std::sqrt(s * V * lx));
      add("smoothness", L * s * lx);
      if (!is_static) {
        add("path_sqrt", G * std::sqrt(s));
        add("path", in.path * G);
      }
      add("eps_G", eps * G);
      add("eps_gamma", eps * gam);
      add("G_squared", eps * G * G / gam * lg);
      add("quadratic_u", gam * u * u / eps * log_plus(u / eps));
      add("G_fourth", eps * std::pow(G, 4) / std::pow(gam, 3) * lg);
      add("u_G", u * G * std::pow(lx, 1.5));
      add("cross", G > 0.0 ? std::pow(gam, 3) * u * u / (eps * G * G) * lx * log_plus(gam * u / (eps * G)) : 0.0);
      break;
    }
    case Theorem::comparator_dynamic: {
      rep.theorem = "comparator_dynamic";
      const double s = u * u + u * in.path;
      add("leading", std::sqrt(s * V * log_plus(u * static_cast<double>(in.horizon) / eps)));
      add("smoothness", L * s);
      add("offset", eps * G);
      break;
    }
  }
  for (const auto& c : rep.components) rep.bound += c.second;
  return rep;
}

}  // namespace gradvar::oracle
