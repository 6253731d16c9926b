#pragma once

// Experiment harness: configuration text, loss streams, the run loop that
// writes transcripts, transcript verification and parameter sweeps.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "gradvar/core.hpp"
#include "gradvar/dynamic.hpp"
#include "gradvar/errors.hpp"
#include "gradvar/loss.hpp"
#include "gradvar/oftrl.hpp"
#include "gradvar/oracle.hpp"
#include "gradvar/point.hpp"
#include "gradvar/reduction.hpp"
#include "gradvar/sea.hpp"
#include "gradvar/transcript.hpp"
#include "gradvar/virtual_clip.hpp"

namespace gradvar {

inline constexpr const char* kTranscriptFormat = "gradvar-transcript-1";

/// Largest regret/bound ratio the bound check accepts.
inline constexpr double kBoundConstant = 100.0;

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  const auto b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

inline double parse_real(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const ParseError&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

inline std::uint64_t parse_count(const std::string& key, const std::string& v) {
  const double x = parse_real(key, v);
  if (!(x >= 0.0) || x != std::floor(x) || x > 9.007199254740992e15)
    throw ConfigError("key '" + key + "': expected a nonnegative integer, got '" + v + "'");
  return static_cast<std::uint64_t>(x);
}

}  // namespace detail

struct ExperimentConfig {
  std::string learner = "alg4";  // oftrl | virtual_clip | alg4 | dynamic
  std::optional<double> g_bound;
  double eps = 1.0;
  double gamma = 1.0;

  std::string stream = "sea";  // sea | logistic | zero
  std::size_t dim = 2;
  double radius = 1.0;
  std::optional<double> lipschitz;
  std::size_t segments = 4;

  MeanSchedule schedule = MeanSchedule::drifting;
  double sigma = 0.0;
  std::optional<double> curvature;

  std::string comparator = "best";  // best | argmin | point | zero
  std::optional<Point> comparator_point;

  std::size_t horizon = 100;
  std::uint64_t seed = 0;
  std::string hint = "previous";  // previous | zero

  void set(const std::string& key, const std::string& value) {
    using detail::parse_count;
    using detail::parse_real;
    if (key == "learner") learner = value;
    else if (key == "learner.G") g_bound = parse_real(key, value);
    else if (key == "learner.eps") eps = parse_real(key, value);
    else if (key == "learner.gamma") gamma = parse_real(key, value);
    else if (key == "stream") stream = value;
    else if (key == "stream.dim") dim = parse_count(key, value);
    else if (key == "stream.radius") radius = parse_real(key, value);
    else if (key == "stream.lipschitz") lipschitz = parse_real(key, value);
    else if (key == "stream.segments") segments = parse_count(key, value);
    else if (key == "sea.schedule") schedule = parse_schedule(value);
    else if (key == "sea.sigma") sigma = parse_real(key, value);
    else if (key == "sea.curvature") curvature = parse_real(key, value);
    else if (key == "comparator") comparator = value;
    else if (key == "comparator.point") {
      try {
        comparator_point = Point(detail::parse_list(value));
      } catch (const Error&) {
        throw ConfigError("key 'comparator.point': expected ';'-separated numbers");
      }
    } else if (key == "T") horizon = parse_count(key, value);
    else if (key == "seed") seed = parse_count(key, value);
    else if (key == "hint") hint = value;
    else throw ConfigError("unknown configuration key '" + key + "'");
  }

  void validate() const {
    static const std::vector<std::string> learners{"oftrl", "virtual_clip", "alg4", "dynamic"};
    if (std::find(learners.begin(), learners.end(), learner) == learners.end())
      throw ConfigError("unknown learner '" + learner + "'");
    if (learner == "oftrl" && !g_bound) throw ConfigError("learner oftrl requires learner.G");
    if (learner != "oftrl" && g_bound) throw ConfigError("learner " + learner + " does not take learner.G");
    if (g_bound && !(*g_bound > 0.0 && std::isfinite(*g_bound))) throw ConfigError("learner.G must be positive");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("learner.eps must be positive");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("learner.gamma must be positive");
    if (stream != "sea" && stream != "logistic" && stream != "zero") throw ConfigError("unknown stream '" + stream + "'");
    if (dim == 0) throw ConfigError("stream.dim must be positive");
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw ConfigError("stream.radius must be nonnegative");
    if (lipschitz && !(*lipschitz > 0.0 && std::isfinite(*lipschitz)))
      throw ConfigError("stream.lipschitz must be positive");
    if (segments == 0) throw ConfigError("stream.segments must be positive");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sea.sigma must be nonnegative");
    if (curvature && !(*curvature > 0.0 && std::isfinite(*curvature)))
      throw ConfigError("sea.curvature must be positive");
    if (curvature && lipschitz && stream == "sea")
      throw ConfigError("set at most one of sea.curvature and stream.lipschitz");
    if (stream == "sea" && lipschitz && !curvature && !(radius > 0.0))
      throw ConfigError("stream.lipschitz on a sea stream needs stream.radius > 0");
    if (comparator == "point") {
      if (!comparator_point) throw ConfigError("comparator point requires comparator.point");
      if (comparator_point->dim() != dim) throw ConfigError("comparator.point dimension differs from stream.dim");
    } else if (comparator == "best" || comparator == "argmin") {
      if (stream == "logistic") throw ConfigError("comparator " + comparator + " is not available for logistic streams");
    } else if (comparator != "zero") {
      throw ConfigError("unknown comparator '" + comparator + "'");
    }
    if (hint != "previous" && hint != "zero") throw ConfigError("unknown hint policy '" + hint + "'");
    if (learner == "dynamic" && hint != "previous") throw ConfigError("learner dynamic always uses previous-gradient hints");
  }

  /// Canonical key/value list; feeding it back through set() reproduces the config.
  std::vector<std::pair<std::string, std::string>> to_pairs() const {
    using detail::fmt_double;
    std::vector<std::pair<std::string, std::string>> kv{
        {"learner", learner},
    };
    if (g_bound) kv.emplace_back("learner.G", fmt_double(*g_bound));
    kv.emplace_back("learner.eps", fmt_double(eps));
    kv.emplace_back("learner.gamma", fmt_double(gamma));
    kv.emplace_back("stream", stream);
    kv.emplace_back("stream.dim", std::to_string(dim));
    kv.emplace_back("stream.radius", fmt_double(radius));
    if (lipschitz) kv.emplace_back("stream.lipschitz", fmt_double(*lipschitz));
    kv.emplace_back("stream.segments", std::to_string(segments));
    kv.emplace_back("sea.schedule", to_string(schedule));
    kv.emplace_back("sea.sigma", fmt_double(sigma));
    if (curvature) kv.emplace_back("sea.curvature", fmt_double(*curvature));
    kv.emplace_back("comparator", comparator);
    if (comparator_point) {
      std::ostringstream os;
      detail::put_vector(os, comparator_point->coords());
      kv.emplace_back("comparator.point", os.str());
    }
    kv.emplace_back("T", std::to_string(horizon));
    kv.emplace_back("seed", std::to_string(seed));
    kv.emplace_back("hint", hint);
    return kv;
  }

  static ExperimentConfig parse(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    std::vector<std::string> seen;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (std::find(seen.begin(), seen.end(), key) != seen.end())
        throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
      seen.push_back(key);
      cfg.set(key, value);
    }
    cfg.validate();
    return cfg;
  }

  static ExperimentConfig from_metadata(const Transcript& tr) {
    const auto format = tr.meta("format");
    if (!format || *format != kTranscriptFormat) throw ParseError("transcript lacks a recognised format tag");
    ExperimentConfig cfg;
    for (const auto& [k, v] : tr.metadata)
      if (k != "format") cfg.set(k, v);
    cfg.validate();
    return cfg;
  }
};

/// Deterministic loss stream and comparator schedule built from a config.
class StreamSource {
 public:
  explicit StreamSource(const ExperimentConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    if (cfg.stream == "sea") {
      SeaSpec s;
      s.horizon = cfg.horizon;
      s.dim = cfg.dim;
      s.sigma = cfg.sigma;
      s.radius = cfg.radius;
      s.segments = cfg.segments;
      s.schedule = cfg.schedule;
      s.seed = cfg.seed;
      if (cfg.curvature)
        s.curvature = *cfg.curvature;
      else if (cfg.lipschitz)
        s.curvature = *cfg.lipschitz / (2.0 * cfg.radius);
      s.validate();
      sea_ = s;
    }
    if (cfg.comparator == "best") best_ = hindsight_best();
  }

  const ExperimentConfig& config() const noexcept { return cfg_; }
  const std::optional<SeaSpec>& sea() const noexcept { return sea_; }
  std::size_t horizon() const noexcept { return cfg_.horizon; }
  std::size_t dim() const noexcept { return cfg_.dim; }

  LossOracle loss(std::size_t t) const {
    if (t < 1 || t > cfg_.horizon) throw DomainError("round outside [1, T]");
    if (sea_) return sample_round(*sea_, t).loss;
    if (cfg_.stream == "zero") return LossOracle::zero(cfg_.dim);
    // logistic: unit-direction features scaled to the Lipschitz level,
    // labels from a fixed separating direction.
    const double scale = cfg_.lipschitz.value_or(1.0);
    Point a(cfg_.dim);
    for (std::size_t i = 0; i < cfg_.dim; ++i) a[i] = rng::gaussian(cfg_.seed, rng::kFeatures, t, i);
    const double n = a.norm();
    if (n > 0.0) a *= scale / n;
    const double margin = dot(a, logistic_target());
    return LossOracle::logistic(std::move(a), margin >= 0.0 ? 1.0 : -1.0);
  }

  Point comparator(std::size_t t) const {
    if (cfg_.comparator == "zero") return Point::zeros(cfg_.dim);
    if (cfg_.comparator == "point") return *cfg_.comparator_point;
    if (cfg_.comparator == "best") return *best_;
    // argmin of the mean loss
    if (sea_) return mean_center(*sea_, t);
    return Point::zeros(cfg_.dim);
  }

  /// sigma_t^2(u) for SEA streams, zero otherwise.
  double sigma_sq_at(std::size_t t, const Point& u) const { return sea_ ? sigma_sq(*sea_, t, u) : 0.0; }
  /// Sigma_t^2(u) for SEA streams, zero otherwise.
  double adv_sq_at(std::size_t t, const Point& u) const { return sea_ ? adv_variation_sq(*sea_, t, u) : 0.0; }

 private:
  Point logistic_target() const {
    Point v(cfg_.dim);
    for (std::size_t i = 0; i < cfg_.dim; ++i) v[i] = rng::gaussian(cfg_.seed, rng::kCenters, 0, i);
    const double n = v.norm();
    return n > 0.0 ? (cfg_.radius / n) * v : v;
  }

  // Minimiser of sum_t f_t for streams sharing one curvature:
  // mean of (c_t - xi_t / L).
  Point hindsight_best() const {
    Point acc(cfg_.dim);
    if (!sea_ || cfg_.horizon == 0) return acc;
    for (std::size_t t = 1; t <= cfg_.horizon; ++t) {
      const SeaRound r = sample_round(*sea_, t);
      acc += r.center;
      acc.axpy(-1.0 / sea_->curvature, r.noise);
    }
    acc *= 1.0 / static_cast<double>(cfg_.horizon);
    return acc;
  }

  ExperimentConfig cfg_;
  std::optional<SeaSpec> sea_;
  std::optional<Point> best_;
};

/// Type-erased learner with the round protocol used by the harness.
class AnyLearner {
 public:
  explicit AnyLearner(const ExperimentConfig& cfg) : impl_(make(cfg)) {}

  const Point& decision() const {
    return std::visit([](const auto& l) -> const Point& { return l.decision(); }, impl_);
  }

  const Point& hint() const {
    return std::visit([](const auto& l) -> const Point& { return l.hint(); }, impl_);
  }

  /// Internal state in force for the current decision.
  void describe(TranscriptRow& row) const {
    std::visit(
        [&](const auto& l) {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, OftrlLearner>) {
            row.vbar = l.vbar();
            row.b = l.b();
            row.alpha = l.alpha();
          } else if constexpr (std::is_same_v<T, ClipLearner>) {
            row.vbar = l.vbar();
            row.b = l.b();
            row.alpha = l.alpha();
            row.m_hat = l.m_hat();
            row.radius = l.last_radius();
          } else if constexpr (std::is_same_v<T, Alg4Learner>) {
            row.vbar = l.ax().vbar();
            row.b = l.ax().b();
            row.alpha = l.ax().alpha();
            row.m_hat = l.ax().m_hat();
            row.radius = l.x().norm();
          } else {
            row.vbar = l.ball().total_v();
            row.n = l.ball().n();
            row.p = l.ball().weights();
            row.radius = std::abs(l.y());
          }
        },
        impl_);
  }

  void step(const Point& g, const Point& h_next) {
    std::visit(
        [&](auto& l) {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, DynamicLearner>)
            l.step(g);
          else
            l.step(g, h_next);
        },
        impl_);
  }

  std::size_t warnings() const noexcept { return *warnings_; }

 private:
  using Impl = std::variant<OftrlLearner, ClipLearner, Alg4Learner, DynamicLearner>;

  Impl make(const ExperimentConfig& cfg) {
    if (cfg.learner == "oftrl")
      return OftrlLearner(*cfg.g_bound, cfg.eps, cfg.dim, [w = warnings_](const std::string&) { ++*w; });
    if (cfg.learner == "virtual_clip") return ClipLearner(cfg.eps, cfg.gamma, cfg.dim);
    if (cfg.learner == "alg4") return make_alg4(cfg.eps, cfg.gamma, cfg.dim);
    return DynamicLearner(cfg.eps, cfg.gamma, cfg.dim);
  }

  std::shared_ptr<std::size_t> warnings_ = std::make_shared<std::size_t>(0);
  Impl impl_;
};

inline oracle::Theorem theorem_for(const ExperimentConfig& cfg) {
  if (cfg.learner == "oftrl") return oracle::Theorem::oftrl;
  if (cfg.learner == "virtual_clip") return oracle::Theorem::virtual_clip;
  if (cfg.learner == "alg4") return oracle::Theorem::alg4;
  return cfg.stream == "sea" && cfg.sigma > 0.0 ? oracle::Theorem::sea : oracle::Theorem::dynamic;
}

/// Accumulates the problem-dependent quantities the bounds are stated in.
class BoundAccumulator {
 public:
  BoundAccumulator(const StreamSource& src, std::optional<double> declared_g) : src_(src) {
    if (declared_g) g_ = *declared_g;
  }

  void observe(std::size_t t, const LossOracle& f, const Point& u, const Point& g) {
    g_ = std::max(g_, g.norm());
    l_ = std::max(l_, f.smoothness().value_or(0.0));
    m_ = std::max(m_, u.norm());
    if (prev_f_) {
      v_ += squared_distance(f.gradient(*prev_u_), prev_f_->gradient(*prev_u_));
      path_ += distance(u, *prev_u_);
      noise_ += src_.sigma_sq_at(t, *prev_u_) + src_.sigma_sq_at(t - 1, *prev_u_) + src_.adv_sq_at(t, *prev_u_);
    }
    prev_f_ = f;
    prev_u_ = u;
  }

  oracle::BoundInputs inputs(oracle::Theorem which, const ExperimentConfig& cfg, std::size_t rounds) const {
    oracle::BoundInputs in;
    in.horizon = rounds;
    in.m = m_;
    in.path = path_;
    in.variation = which == oracle::Theorem::sea ? noise_ : v_;
    in.smoothness = l_;
    in.lipschitz = g_;
    in.eps = cfg.eps;
    in.gamma = cfg.gamma;
    return in;
  }

 private:
  const StreamSource& src_;
  double g_ = 0.0;
  double l_ = 0.0;
  double m_ = 0.0;
  double v_ = 0.0;
  double path_ = 0.0;
  double noise_ = 0.0;
  std::optional<LossOracle> prev_f_;
  std::optional<Point> prev_u_;
};

struct RunResult {
  std::size_t rounds = 0;
  double learner_loss = 0.0;
  double comparator_loss = 0.0;
  double step_seconds = 0.0;  // time spent inside learner updates
  std::size_t warnings = 0;
  oracle::BoundReport bound;

  double regret() const { return learner_loss - comparator_loss; }
  double seconds_per_round() const { return rounds ? step_seconds / static_cast<double>(rounds) : 0.0; }
};

inline std::vector<std::pair<std::string, std::string>> transcript_metadata(const ExperimentConfig& cfg) {
  auto kv = cfg.to_pairs();
  kv.insert(kv.begin(), {"format", kTranscriptFormat});
  return kv;
}

/// Runs the experiment, streaming transcript rows to `out`. On a numerical
/// failure the rows written so far are flushed before the error propagates.
inline RunResult run_experiment(const ExperimentConfig& cfg, std::ostream* out) {
  cfg.validate();
  const StreamSource src(cfg);
  AnyLearner learner(cfg);
  BoundAccumulator acc(src, cfg.g_bound);
  RunResult res;
  if (out) write_transcript_header(*out, transcript_metadata(cfg));

  try {
    for (std::size_t t = 1; t <= cfg.horizon; ++t) {
      const LossOracle f = src.loss(t);
      TranscriptRow row;
      row.t = t;
      row.w = learner.decision();
      row.h = learner.hint();
      row.u = src.comparator(t);
      learner.describe(row);
      LossValue lv = eval_loss_and_grad(f, row.w);
      row.f_w = lv.value;
      row.f_u = f.value(row.u);
      row.g = std::move(lv.gradient);
      if (out) write_transcript_row(*out, row);

      res.learner_loss += row.f_w;
      res.comparator_loss += row.f_u;
      res.rounds = t;
      acc.observe(t, f, row.u, row.g);

      const Point h_next = cfg.hint == "zero" ? Point::zeros(cfg.dim) : row.g;
      const auto start = std::chrono::steady_clock::now();
      learner.step(row.g, h_next);
      res.step_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  } catch (const NumericalError&) {
    if (out) out->flush();
    throw;
  }
  if (out) out->flush();
  res.warnings = learner.warnings();
  const auto which = theorem_for(cfg);
  res.bound = oracle::evaluate_bound(which, acc.inputs(which, cfg, res.rounds), res.regret());
  return res;
}

// ---------------------------------------------------------------------------
// Verification

struct CheckLine {
  std::string name;
  double lhs;
  double rhs;
  double margin;
  bool pass;
};

struct VerifyReport {
  std::vector<CheckLine> checks;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckLine& c) { return c.pass; });
  }

  void add(const oracle::LemmaResult& r) { checks.push_back({r.name, r.lhs, r.rhs, r.margin(), r.pass()}); }

  void write(std::ostream& os) const {
    os << "check,lhs,rhs,margin,result\n";
    for (const auto& c : checks)
      os << c.name << ',' << detail::fmt_double(c.lhs) << ',' << detail::fmt_double(c.rhs) << ','
         << detail::fmt_double(c.margin) << ',' << (c.pass ? "PASS" : "FAIL") << '\n';
  }
};

namespace detail {

// The round-level check with the smallest margin stands for the whole run.
inline oracle::LemmaResult worst(const std::vector<oracle::LemmaResult>& rs, const std::string& name) {
  oracle::LemmaResult out{name};
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : rs) {
    if (r.margin() < best || !std::isfinite(r.lhs)) {
      best = r.margin();
      out = r;
      out.name = name;
    }
  }
  return out;
}

// Relative agreement |a - b| / max(1, |b|) reported as a check with rhs = tol.
inline oracle::LemmaResult agreement(const std::string& name, double err, double tol) {
  oracle::LemmaResult r{name};
  r.lhs = err;
  r.rhs = tol;
  return r;
}

inline void check_replay(const Transcript& tr, const StreamSource& src, VerifyReport& rep) {
  double worst_err = 0.0;
  for (const auto& row : tr.rows) {
    const LossOracle f = src.loss(row.t);
    const LossValue lv = f.evaluate(row.w);
    const double scale = std::max(1.0, std::abs(lv.value));
    worst_err = std::max(worst_err, std::abs(lv.value - row.f_w) / scale);
    worst_err = std::max(worst_err, std::abs(f.value(row.u) - row.f_u) / std::max(1.0, std::abs(row.f_u)));
    worst_err = std::max(worst_err, distance(lv.gradient, row.g) / std::max(1.0, row.g.norm()));
  }
  rep.add(agreement("replay", worst_err, 1e-9));
}

inline void check_lemmas(const Transcript& tr, const ExperimentConfig& cfg, const StreamSource& src,
                         VerifyReport& rep) {
  std::vector<LossOracle> losses;
  std::vector<Point> w, u;
  double smoothness = 0.0;
  for (const auto& row : tr.rows) {
    losses.push_back(src.loss(row.t));
    smoothness = std::max(smoothness, losses.back().smoothness().value_or(0.0));
    w.push_back(row.w);
    u.push_back(row.u);
  }
  if (tr.rows.empty()) {
    rep.add(oracle::LemmaResult{"variation_decomposition"});
  } else {
    rep.add(oracle::check_variation_decomposition(losses, w, u, smoothness));
  }
  std::vector<oracle::LemmaResult> sb, self;
  for (std::size_t t = 0; t < losses.size(); ++t) {
    const double l = losses[t].smoothness().value_or(smoothness);
    sb.push_back(oracle::check_smoothness_bregman(losses[t], u[t], w[t], l));
    sb.push_back(oracle::check_smoothness_bregman(losses[t], w[t], u[t], l));
    self.push_back(oracle::check_self_bounding(losses[t], w[t], l));
  }
  rep.add(worst(sb, "smoothness_bregman"));
  rep.add(worst(self, "self_bounding"));

  if (cfg.learner == "oftrl") {
    std::vector<double> dsq, alpha, vbar;
    for (const auto& row : tr.rows) {
      if (!row.alpha || !row.vbar) throw ConfigError("oftrl transcript lacks alpha/vbar columns");
      dsq.push_back(squared_distance(row.g, row.h));
      alpha.push_back(*row.alpha);
      vbar.push_back(*row.vbar);
    }
    rep.add(oracle::check_tuning_sum(dsq, alpha, vbar, cfg.eps, 2.0 * *cfg.g_bound));
  }
}

inline void check_closed_form(const Transcript& tr, const ExperimentConfig& cfg, VerifyReport& rep) {
  if (cfg.learner != "oftrl") throw ConfigError("suite closed-form applies to oftrl transcripts only");
  const double m = 2.0 * *cfg.g_bound;
  CompensatedSum grad_sum(cfg.dim);
  double worst_err = 0.0;
  for (std::size_t k = 0; k + 1 < tr.rows.size(); ++k) {
    grad_sum.add(tr.rows[k].g);
    const TranscriptRow& next = tr.rows[k + 1];
    if (!next.alpha || !next.vbar) throw ConfigError("oftrl transcript lacks alpha/vbar columns");
    const PfRegParams p{*next.alpha, *next.vbar, m};
    const Point tilde = -(grad_sum.value() + next.h);
    const double theta = tilde.norm();
    double r = 0.0;
    if (theta > 0.0) {
      double hi = 1.0;
      while (integrand(hi, p) < theta) hi *= 2.0;
      r = oracle::numeric_radial_argmin([&](double x) { return psi_value(x, p) - theta * x; }, hi);
    }
    const Point expect = theta > 0.0 ? (r / theta) * tilde : Point::zeros(cfg.dim);
    worst_err = std::max(worst_err, distance(expect, next.w) / std::max(1.0, expect.norm()));
  }
  rep.add(agreement("closed_form", worst_err, 1e-6));
}

inline void check_cmd(const Transcript& tr, const ExperimentConfig& cfg, VerifyReport& rep) {
  if (cfg.learner != "virtual_clip") throw ConfigError("suite cmd applies to virtual_clip transcripts only");
  if (tr.rows.empty()) {
    rep.add(agreement("cmd_equivalence", 0.0, 1e-8));
    return;
  }
  std::vector<Point> g, h;
  std::vector<PfRegParams> params;
  for (const auto& row : tr.rows) {
    if (!row.alpha || !row.vbar || !row.m_hat) throw ConfigError("virtual_clip transcript lacks internals");
    h.push_back(row.h);
    params.push_back({*row.alpha, *row.vbar, *row.m_hat});
  }
  for (std::size_t k = 0; k + 1 < tr.rows.size(); ++k) g.push_back(tr.rows[k].g);
  const auto w = oracle::cmd_iterates(g, h, params, cfg.gamma / cfg.eps);
  double worst_err = 0.0;
  for (std::size_t k = 0; k < tr.rows.size(); ++k)
    worst_err = std::max(worst_err, distance(w[k], tr.rows[k].w) / std::max(1.0, tr.rows[k].w.norm()));
  rep.add(agreement("cmd_equivalence", worst_err, 1e-8));
}

inline oracle::BoundReport transcript_bound(const Transcript& tr, const ExperimentConfig& cfg,
                                            const StreamSource& src) {
  BoundAccumulator acc(src, cfg.g_bound);
  double regret = 0.0;
  for (const auto& row : tr.rows) {
    acc.observe(row.t, src.loss(row.t), row.u, row.g);
    regret += row.f_w - row.f_u;
  }
  const auto which = theorem_for(cfg);
  return oracle::evaluate_bound(which, acc.inputs(which, cfg, tr.rows.size()), regret);
}

}  // namespace detail

/// Suites: replay, lemmas, closed-form (oftrl), cmd (virtual_clip), bound, all.
inline VerifyReport verify_transcript(const Transcript& tr, const std::string& suite) {
  const ExperimentConfig cfg = ExperimentConfig::from_metadata(tr);
  if (tr.rows.size() > cfg.horizon) throw ParseError("transcript has more rows than T");
  const StreamSource src(cfg);
  VerifyReport rep;
  const bool all = suite == "all";
  if (!all && suite != "replay" && suite != "lemmas" && suite != "closed-form" && suite != "cmd" && suite != "bound")
    throw ConfigError("unknown suite '" + suite + "'");
  if (all || suite == "replay") detail::check_replay(tr, src, rep);
  if (all || suite == "lemmas") detail::check_lemmas(tr, cfg, src, rep);
  if (suite == "closed-form" || (all && cfg.learner == "oftrl")) detail::check_closed_form(tr, cfg, rep);
  if (suite == "cmd" || (all && cfg.learner == "virtual_clip")) detail::check_cmd(tr, cfg, rep);
  if (all || suite == "bound") {
    const auto b = detail::transcript_bound(tr, cfg, src);
    oracle::LemmaResult r{"bound_ratio"};
    r.lhs = b.regret;
    r.rhs = kBoundConstant * b.bound;
    rep.add(r);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
  double value;
  std::size_t horizon;
  double regret;
  double bound;
  double ratio;
  double seconds_per_round;
};

/// Applies one sweep-axis value to a config.
inline ExperimentConfig apply_axis(ExperimentConfig cfg, const std::string& axis, double v) {
  if (!std::isfinite(v) || !(v > 0.0 || (axis == "sigma_noise" && v == 0.0)))
    throw ConfigError("sweep value " + detail::fmt_double(v) + " is not valid for axis " + axis);
  if (axis == "T") {
    if (v != std::floor(v)) throw ConfigError("sweep axis T needs integer values");
    cfg.horizon = static_cast<std::size_t>(v);
  } else if (axis == "G") {
    cfg.lipschitz = v;
    if (cfg.learner == "oftrl") cfg.g_bound = v;
  } else if (axis == "sigma_noise") {
    cfg.sigma = v;
  } else if (axis == "gamma") {
    cfg.gamma = v;
  } else if (axis == "eps") {
    cfg.eps = v;
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "'");
  }
  cfg.validate();
  return cfg;
}

/// Worker count: hardware concurrency, capped by GRADVAR_THREADS when set.
inline std::size_t sweep_threads(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GRADVAR_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

inline std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const std::string& axis,
                                       const std::vector<double>& values) {
  std::vector<ExperimentConfig> cfgs;
  for (double v : values) cfgs.push_back(apply_axis(base, axis, v));
  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < cfgs.size(); i = next++) {
      try {
        const RunResult r = run_experiment(cfgs[i], nullptr);
        rows[i] = {values[i], cfgs[i].horizon, r.regret(), r.bound.bound, r.bound.ratio(), r.seconds_per_round()};
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = sweep_threads(cfgs.size());
  for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

inline void write_sweep(std::ostream& os, const std::string& axis, const std::vector<SweepRow>& rows) {
  os << axis << ",T,regret,bound,ratio,seconds_per_round\n";
  for (const auto& r : rows)
    os << detail::fmt_double(r.value) << ',' << r.horizon << ',' << detail::fmt_double(r.regret) << ','
       << detail::fmt_double(r.bound) << ',' << detail::fmt_double(r.ratio) << ','
       << detail::fmt_double(r.seconds_per_round) << '\n';
}

}  // namespace gradvar
