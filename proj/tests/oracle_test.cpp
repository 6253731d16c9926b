#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gradvar/oracle.hpp"
#include "test_util.hpp"

namespace oracle = gradvar::oracle;
using gradvar::LossOracle;
using gradvar::Point;

namespace {

std::vector<LossOracle> drifting_quadratics(std::mt19937_64& rng, std::size_t T, std::size_t dim, double L) {
  std::vector<LossOracle> out;
  Point c = gradvar::test_util::random_point(rng, dim);
  for (std::size_t t = 0; t < T; ++t) {
    c += gradvar::test_util::random_point(rng, dim, 0.1);
    out.push_back(LossOracle::scaled_quadratic(L, c, gradvar::test_util::random_point(rng, dim, 0.2)));
  }
  return out;
}

}  // namespace

TEST(RadialArgmin, Examples) {
  EXPECT_NEAR(oracle::numeric_radial_argmin([](double r) { return -3.0 * r + 0.5 * r * r; }, 10.0), 3.0, 1e-8);
  EXPECT_NEAR(oracle::numeric_radial_argmin([](double r) { return 0.5 * r * r; }, 10.0), 0.0, 1e-8);
  const gradvar::PfRegParams p{1.0, 1.0, 1.0};
  const double r = oracle::numeric_radial_argmin([&](double x) { return gradvar::psi_value(x, p) - 6.0 * x; }, 10.0);
  EXPECT_NEAR(r, std::numbers::e - 1.0, 1e-7);
  EXPECT_NEAR(r, gradvar::inv_deriv(6.0, p), 1e-7);
}

TEST(RadialArgmin, EndpointAndErrors) {
  EXPECT_NEAR(oracle::numeric_radial_argmin([](double r) { return -r; }, 4.0), 4.0, 1e-12);
  EXPECT_THROW(oracle::numeric_radial_argmin([](double) { return std::nan(""); }, 1.0), gradvar::NumericalError);
  EXPECT_THROW(oracle::numeric_radial_argmin([](double r) { return r; }, -1.0), gradvar::DomainError);
}

TEST(RadialArgmin, RepeatableOnStrictlyConvexObjectives) {
  std::mt19937_64 rng(71);
  for (int k = 0; k < 50; ++k) {
    const double a = gradvar::test_util::log_uniform(rng, 0.1, 10.0);
    const double b = gradvar::test_util::log_uniform(rng, 0.1, 10.0);
    auto f = [&](double r) { return -b * r + a * r * r + std::exp(0.1 * r); };
    const double r1 = oracle::numeric_radial_argmin(f, 50.0);
    const double r2 = oracle::numeric_radial_argmin(f, 50.0);
    EXPECT_EQ(r1, r2);
    // Stationarity: 2 a r + 0.1 e^{0.1 r} = b when interior.
    if (r1 > 0.0) {
      EXPECT_NEAR(2.0 * a * r1 + 0.1 * std::exp(0.1 * r1), b, 1e-6 * b);
    }
  }
}

TEST(FiniteDifference, QuadraticGradient) {
  const auto f = LossOracle::scaled_quadratic(2.0, Point{1.0, -1.0}, Point{0.5, 0.0});
  const Point x{0.3, 0.7};
  const Point fd = oracle::finite_difference_gradient([&](const Point& w) { return f.value(w); }, x);
  const Point g = f.gradient(x);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(fd[i], g[i], 1e-7);
}

TEST(GradientVariation, Examples) {
  const auto f = LossOracle::scaled_quadratic(1.0, Point{1.0}, Point{0.0});
  EXPECT_EQ(oracle::gradient_variation({f, f, f}, {Point{0.0}, Point{2.0}, Point{-1.0}}), 0.0);
  EXPECT_EQ(oracle::gradient_variation({f}, {Point{0.0}}), 0.0);

  std::vector<LossOracle> fs;
  std::vector<Point> cs{Point{0.0, 0.0}, Point{1.0, 0.0}, Point{1.0, 2.0}, Point{-1.0, 2.0}};
  for (const Point& c : cs) fs.push_back(LossOracle::scaled_quadratic(1.0, c, Point::zeros(2)));
  std::mt19937_64 rng(72);
  std::vector<Point> u;
  for (std::size_t t = 0; t < cs.size(); ++t) u.push_back(gradvar::test_util::random_point(rng, 2, 5.0));
  EXPECT_NEAR(oracle::gradient_variation(fs, u), 1.0 + 4.0 + 4.0, 1e-12);
  EXPECT_THROW(oracle::gradient_variation(fs, {Point{0.0, 0.0}}), gradvar::ConfigError);
}

TEST(GradientVariation, BoundedBySupOverGrid) {
  std::mt19937_64 rng(73);
  std::vector<LossOracle> fs;
  for (int t = 0; t < 30; ++t) {
    const Point a = gradvar::test_util::random_point(rng, 2);
    fs.push_back(LossOracle::logistic(a, t % 3 == 0 ? 1.0 : -1.0));
  }
  const auto grid = oracle::box_grid(2, 1.0, 21);
  EXPECT_EQ(grid.size(), 441u);
  const Point u{0.5, -0.5};  // a grid point
  const std::vector<Point> us(fs.size(), u);
  EXPECT_LE(oracle::gradient_variation(fs, us), oracle::gradient_variation_sup(fs, grid) + 1e-12);
}

TEST(PathLengths, Examples) {
  const auto c = oracle::path_lengths({Point{1.0, 1.0}, Point{1.0, 1.0}, Point{1.0, 1.0}});
  EXPECT_EQ(c.p, 0.0);
  EXPECT_EQ(c.p_sq, 0.0);
  EXPECT_DOUBLE_EQ(c.m, std::sqrt(2.0));
  const auto s = oracle::path_lengths({Point{0.0}, Point{1.0}, Point{0.0}});
  EXPECT_EQ(s.p, 2.0);
  EXPECT_EQ(s.p_sq, 2.0);
  EXPECT_EQ(s.m, 1.0);
  EXPECT_THROW(oracle::path_lengths({}), gradvar::ConfigError);
}

TEST(PathLengths, CauchySchwarz) {
  std::mt19937_64 rng(74);
  for (int k = 0; k < 50; ++k) {
    std::vector<Point> u;
    for (int t = 0; t < 40; ++t) u.push_back(gradvar::test_util::random_point(rng, 3));
    const auto pl = oracle::path_lengths(u);
    EXPECT_LE(pl.p, std::sqrt(39.0 * pl.p_sq) * (1.0 + 1e-12));
  }
}

TEST(LogPlus, Definition) {
  EXPECT_EQ(gradvar::log_plus(0.5), 1.0);
  EXPECT_EQ(gradvar::log_plus(std::numbers::e), 1.0);
  EXPECT_DOUBLE_EQ(gradvar::log_plus(100.0), std::log(100.0));
}

TEST(Lemmas, MarginScaling) {
  oracle::LemmaResult r{"x", 1.0, 2.0};
  EXPECT_DOUBLE_EQ(r.margin(), 0.5);
  oracle::LemmaResult z{"z", 0.0, 0.0};
  EXPECT_EQ(z.margin(), 0.0);
  EXPECT_TRUE(z.pass());
  oracle::LemmaResult bad{"b", 1.0, 0.0};
  EXPECT_FALSE(bad.pass());
}

TEST(Lemmas, ZeroGradientTranscriptPasses) {
  std::vector<LossOracle> fs(5, LossOracle::zero(3));
  std::vector<Point> w(5, Point::zeros(3)), u(5, Point{1.0, 0.0, 0.0});
  const auto r = oracle::check_variation_decomposition(fs, w, u, 1.0);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_TRUE(r.pass());
  EXPECT_TRUE(oracle::check_self_bounding(fs[0], w[0], 0.0).pass());
  EXPECT_TRUE(oracle::check_smoothness_bregman(fs[0], w[0], u[0], 0.0).pass());
  EXPECT_TRUE(oracle::check_tuning_sum({0.0, 0.0}, {1.0, 1.0}, {4.0, 4.0}, 1.0, 1.0).pass());
}

TEST(Lemmas, VariationDecompositionOnRandomRuns) {
  std::mt19937_64 rng(75);
  for (int run = 0; run < 20; ++run) {
    const double L = gradvar::test_util::log_uniform(rng, 0.1, 10.0);
    const auto fs = drifting_quadratics(rng, 200, 3, L);
    std::vector<Point> w, u;
    Point cur = gradvar::test_util::random_point(rng, 3);
    for (int t = 0; t < 200; ++t) {
      w.push_back(gradvar::test_util::random_point(rng, 3, 2.0));
      if (t % 40 == 0) cur = gradvar::test_util::random_point(rng, 3);
      u.push_back(cur);
    }
    const auto r = oracle::check_variation_decomposition(fs, w, u, L);
    EXPECT_TRUE(r.pass()) << run << ": " << r.lhs << " vs " << r.rhs;
  }
}

TEST(Lemmas, SmoothnessBregmanAndSelfBounding) {
  std::mt19937_64 rng(76);
  for (int k = 0; k < 200; ++k) {
    const Point a = gradvar::test_util::random_point(rng, 3);
    const Point x = gradvar::test_util::random_point(rng, 3, 3.0);
    const Point y = gradvar::test_util::random_point(rng, 3, 3.0);
    const auto lg = LossOracle::logistic(a, k % 2 ? 1.0 : -1.0);
    const auto q = LossOracle::scaled_quadratic(2.5, gradvar::test_util::random_point(rng, 3), a);
    const auto hb = LossOracle::huber(a, 0.3, 0.5);
    for (const auto* f : {&lg, &q, &hb}) {
      const auto sb = oracle::check_smoothness_bregman(*f, x, y, *f->smoothness());
      EXPECT_TRUE(sb.pass()) << k << " " << ": " << sb.lhs << " vs " << sb.rhs;
      const auto self = oracle::check_self_bounding(*f, x, *f->smoothness());
      EXPECT_TRUE(self.pass()) << k << " " << ": " << self.lhs << " vs " << self.rhs;
    }
  }
}

TEST(Lemmas, TuningSumScalar) {
  std::mt19937_64 rng(77);
  for (int run = 0; run < 20; ++run) {
    std::vector<double> g, h;
    double cap = 0.1;
    for (int t = 0; t < 300; ++t) {
      const double x = gradvar::test_util::log_uniform(rng, 1e-3, 1.0) * (t % 50 == 0 ? 20.0 : 1.0);
      cap = std::max(cap, x);
      g.push_back(x);
      h.push_back(cap);
    }
    const auto r = oracle::check_tuning_sum_scalar(g, h, 0.5);
    EXPECT_TRUE(r.pass()) << r.lhs << " vs " << r.rhs;
  }
}

TEST(Lemmas, LengthMismatchIsConfigError) {
  EXPECT_THROW(oracle::check_tuning_sum({1.0}, {}, {}, 1.0, 1.0), gradvar::ConfigError);
  EXPECT_THROW(oracle::check_one_step_ogd({Point{1.0}}, {Point{1.0}}, {1.0}, {Point{0.0}}, 2.0), gradvar::ConfigError);
  EXPECT_THROW(oracle::check_optimistic_hedge({{1.0}}, {{0.0}}, {1.0, 1.0}), gradvar::ConfigError);
}

TEST(Cmd, ZeroBetaRouteMatchesClosedForm) {
  // With beta = 0 the hybrid regularizer is psi alone, so the route must
  // reproduce the closed-form inverse for a fixed parameter set.
  const gradvar::PfRegParams p{0.5, 16.0, 2.0};
  std::mt19937_64 rng(78);
  std::vector<Point> g, h{Point::zeros(2)};
  for (int t = 0; t < 50; ++t) {
    g.push_back(gradvar::test_util::random_point(rng, 2));
    h.push_back(gradvar::test_util::random_point(rng, 2));
  }
  const auto w = oracle::cmd_iterates(g, h, std::vector<gradvar::PfRegParams>(g.size() + 1, p), 0.0);
  Point theta = Point::zeros(2);
  for (std::size_t t = 0; t < g.size(); ++t) {
    theta -= g[t];
    const Point tilde = theta - h[t + 1];
    const double r = gradvar::inv_deriv(tilde.norm(), p);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(w[t + 1][i], r / tilde.norm() * tilde[i], 1e-8 * std::max(1.0, r));
  }
}

TEST(Bounds, ParseAndUnknown) {
  EXPECT_EQ(oracle::parse_theorem("alg4"), oracle::Theorem::alg4);
  EXPECT_THROW(oracle::parse_theorem("no_such_bound"), gradvar::ConfigError);
}

TEST(Bounds, ZeroRegretGivesZeroRatio) {
  oracle::BoundInputs in;
  in.horizon = 100;
  const auto r = oracle::evaluate_bound(oracle::Theorem::oftrl, in, 0.0);
  EXPECT_EQ(r.ratio(), 0.0);
}

TEST(Bounds, OftrlLeadingTerm) {
  oracle::BoundInputs in;
  in.horizon = 10000;
  in.m = 2.0;
  in.variation = 50.0;
  in.smoothness = 1.5;
  in.lipschitz = 3.0;
  in.eps = 0.1;
  const auto r = oracle::evaluate_bound(oracle::Theorem::oftrl, in, 7.0);
  const double lp = std::log(2.0 * 100.0 / 0.1);
  EXPECT_DOUBLE_EQ(r.component("leading"), 2.0 * std::sqrt(50.0 * lp));
  EXPECT_DOUBLE_EQ(r.component("smoothness"), 1.5 * 4.0);
  EXPECT_DOUBLE_EQ(r.component("lipschitz"), 3.0 * 2.0 * lp);
  EXPECT_DOUBLE_EQ(r.component("offset"), 0.3);
  EXPECT_DOUBLE_EQ(r.bound, r.component("leading") + 6.0 + 6.0 * lp + 0.3);
  EXPECT_DOUBLE_EQ(r.ratio(), 7.0 / r.bound);
  EXPECT_THROW(r.component("nope"), gradvar::ConfigError);
}

TEST(Bounds, ComponentsNonnegativeAndFinite) {
  std::mt19937_64 rng(79);
  for (auto th : {oracle::Theorem::oftrl, oracle::Theorem::virtual_clip, oracle::Theorem::alg4,
                  oracle::Theorem::comparator_dynamic, oracle::Theorem::dynamic, oracle::Theorem::sea}) {
    for (int k = 0; k < 50; ++k) {
      oracle::BoundInputs in;
      in.horizon = 1 + k * 37;
      in.m = gradvar::test_util::log_uniform(rng, 1e-3, 1e2);
      in.path = gradvar::test_util::log_uniform(rng, 1e-3, 1e2);
      in.variation = gradvar::test_util::log_uniform(rng, 1e-3, 1e4);
      in.smoothness = gradvar::test_util::log_uniform(rng, 1e-3, 1e2);
      in.lipschitz = gradvar::test_util::log_uniform(rng, 1e-3, 1e2);
      in.eps = gradvar::test_util::log_uniform(rng, 1e-2, 10.0);
      in.gamma = gradvar::test_util::log_uniform(rng, 1e-2, 10.0);
      const auto r = oracle::evaluate_bound(th, in, 1.0);
      for (const auto& [name, v] : r.components) {
        EXPECT_GE(v, 0.0) << name;
        EXPECT_TRUE(std::isfinite(v)) << name;
      }
      EXPECT_TRUE(std::isfinite(r.ratio()));
    }
  }
}

TEST(Bounds, DynamicReducesToStaticShapeWithoutPath) {
  oracle::BoundInputs in;
  in.horizon = 1000;
  in.m = 1.0;
  in.variation = 10.0;
  in.smoothness = 1.0;
  in.lipschitz = 1.0;
  const auto s = oracle::evaluate_bound(oracle::Theorem::alg4, in, 1.0);
  const auto d = oracle::evaluate_bound(oracle::Theorem::dynamic, in, 1.0);
  EXPECT_DOUBLE_EQ(s.component("leading"), d.component("leading"));
  EXPECT_DOUBLE_EQ(d.component("path"), 0.0);
}
