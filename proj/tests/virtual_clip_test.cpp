#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gradvar/oracle.hpp"
#include "gradvar/virtual_clip.hpp"
#include "test_util.hpp"

using gradvar::ClipLearner;
using gradvar::PfRegParams;
using gradvar::Point;

namespace {

double residual(double r, double target, const PfRegParams& p, double beta) {
  return gradvar::integrand(r, p) + beta * r - target;
}

// Gradients whose scale jumps around so that clipping actually happens.
Point heavy_gradient(std::mt19937_64& rng, std::size_t dim) {
  const double scale = gradvar::test_util::log_uniform(rng, 1e-2, 1e2);
  return gradvar::test_util::random_point(rng, dim, scale);
}

}  // namespace

TEST(Clip, Examples) {
  EXPECT_EQ(gradvar::clip(Point{3.0, 4.0}, 10.0), (Point{3.0, 4.0}));
  const Point c = gradvar::clip(Point{3.0, 4.0}, 1.0);
  EXPECT_NEAR(c[0], 0.6, 1e-15);
  EXPECT_NEAR(c[1], 0.8, 1e-15);
  EXPECT_EQ(gradvar::clip(Point{0.0, 0.0}, 2.0), Point::zeros(2));
  EXPECT_THROW(gradvar::clip(Point{1.0}, 0.0), gradvar::DomainError);
}

TEST(Clip, NormBoundAndDirection) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 500; ++k) {
    const Point d = heavy_gradient(rng, 4);
    const double m = gradvar::test_util::log_uniform(rng, 1e-2, 1e2);
    const Point c = gradvar::clip(d, m);
    EXPECT_LE(c.norm(), m * (1.0 + 1e-15));
    EXPECT_NEAR(dot(c, d), c.norm() * d.norm(), 1e-12 * c.norm() * d.norm());
  }
}

TEST(SolveRadius, ZeroTarget) { EXPECT_EQ(gradvar::solve_radius(0.0, {1.0, 1.0, 1.0}, 1.0, 0.0, 0.0), 0.0); }

TEST(SolveRadius, UnitExample) {
  const PfRegParams p{1.0, 1.0, 1.0};
  const double r = gradvar::solve_radius(1.0, p, 1.0, 0.0, 1.0);
  EXPECT_GT(r, 0.0);
  EXPECT_LT(r, 1.0);
  EXPECT_LE(std::abs(residual(r, 1.0, p, 1.0)), 1e-10);
  EXPECT_LE(std::log(r + 1.0), 1.0);
  // Independent bisection on [0, 1].
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (6.0 * std::sqrt(std::log1p(mid)) + mid < 1.0 ? lo : hi) = mid;
  }
  EXPECT_NEAR(r, lo, 1e-12);
}

TEST(SolveRadius, ExpandsWhenRootLeavesBracket) {
  const PfRegParams p{0.5, 20.0, 2.0};
  // A stale previous radius far from the root forces expansion both ways.
  for (double prev : {0.0, 1e-6, 3.0, 50.0}) {
    const double r = gradvar::solve_radius(7.0, p, 0.5, prev, 1e-9);
    EXPECT_LE(std::abs(residual(r, 7.0, p, 0.5)), 1e-10) << prev;
  }
}

TEST(SolveRadius, RejectsBadInput) {
  EXPECT_THROW(gradvar::solve_radius(-1.0, {1.0, 1.0, 1.0}, 1.0, 0.0, 0.0), gradvar::DomainError);
  EXPECT_THROW(gradvar::solve_radius(1.0, {1.0, 1.0, 1.0}, 0.0, 0.0, 0.0), gradvar::DomainError);
  EXPECT_THROW(gradvar::solve_radius(std::nan(""), {1.0, 1.0, 1.0}, 1.0, 0.0, 0.0), gradvar::Error);
}

TEST(SolveRadius, RadialMapSlopeAtLeastBeta) {
  std::mt19937_64 rng(32);
  for (int k = 0; k < 50; ++k) {
    const PfRegParams p{gradvar::test_util::log_uniform(rng, 1e-3, 1.0), 4.0 * gradvar::test_util::log_uniform(rng, 1.0, 50.0),
                        1.0};
    const double beta = gradvar::test_util::log_uniform(rng, 1e-2, 1e2);
    double prev = 0.0;
    for (int i = 1; i <= 500; ++i) {
      const double r = 0.01 * i;
      const double v = gradvar::integrand(r, p) + beta * r;
      EXPECT_GE(v - prev, beta * 0.01 * (1.0 - 1e-9));
      prev = v;
    }
  }
}

TEST(ClipLearner, Initialisation) {
  ClipLearner a(2.0, 3.0, 2);
  EXPECT_DOUBLE_EQ(a.beta(), 1.5);
  EXPECT_DOUBLE_EQ(a.m_hat(), 3.0);
  EXPECT_DOUBLE_EQ(a.b(), 4.0);
  EXPECT_DOUBLE_EQ(a.vbar(), 36.0);
  EXPECT_EQ(a.decision(), Point::zeros(2));
  EXPECT_THROW(ClipLearner(0.0, 1.0, 1), gradvar::ConfigError);
  EXPECT_THROW(ClipLearner(1.0, -1.0, 1), gradvar::ConfigError);
  EXPECT_THROW(ClipLearner(1.0, 1.0, 0), gradvar::ConfigError);
}

TEST(ClipLearner, ZeroStream) {
  ClipLearner a(1.0, 1.0, 3);
  for (int t = 0; t < 50; ++t) EXPECT_EQ(a.step(Point::zeros(3), Point::zeros(3)), Point::zeros(3));
}

TEST(ClipLearner, FirstRoundScalarExample) {
  ClipLearner a(1.0, 1.0, 1);
  const Point w = a.step(Point{-2.0}, Point{0.0});
  EXPECT_DOUBLE_EQ(a.m_hat(), 2.0);
  EXPECT_DOUBLE_EQ(a.vbar(), 17.0);
  EXPECT_DOUBLE_EQ(a.b(), 5.0);
  EXPECT_DOUBLE_EQ(a.clip_error_sq(), 1.0);
  const PfRegParams p{gradvar::alpha_schedule(1.0, 5.0), 17.0, 2.0};
  EXPECT_DOUBLE_EQ(a.alpha(), p.alpha);
  EXPECT_GT(w[0], 0.0);
  EXPECT_LE(w[0], 2.0);
  EXPECT_LE(std::abs(residual(w[0], 2.0, p, 1.0)), 1e-10);
  double lo = 0.0, hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid, 2.0, p, 1.0) < 0.0 ? lo : hi) = mid;
  }
  EXPECT_NEAR(w[0], lo, 1e-12);
}

TEST(ClipLearner, AccumulatorInvariants) {
  std::mt19937_64 rng(33);
  for (int run = 0; run < 10; ++run) {
    const double gamma = gradvar::test_util::log_uniform(rng, 1e-2, 10.0);
    ClipLearner a(gradvar::test_util::log_uniform(rng, 1e-2, 10.0), gamma, 3);
    double prev_m = a.m_hat();
    double dhat_sq = 0.0;
    for (int t = 1; t <= 200; ++t) {
      const Point g = heavy_gradient(rng, 3);
      const Point h = heavy_gradient(rng, 3);
      const Point delta = g - a.hint();
      const double m_before = a.m_hat();
      dhat_sq += gradvar::clip(delta, m_before).squared_norm();
      a.step(g, h);
      EXPECT_GE(a.m_hat(), prev_m);
      EXPECT_DOUBLE_EQ(a.m_hat(), std::max(m_before, delta.norm()));
      EXPECT_LE(a.b(), 4.0 + t + 1e-9);
      EXPECT_NEAR(a.vbar(), 4.0 * a.m_hat() * a.m_hat() + dhat_sq, 1e-9 * a.vbar());
      prev_m = a.m_hat();
    }
    // Telescoping clip error.
    EXPECT_LE(a.clip_error_sq(), (a.m_hat() - gamma) * (a.m_hat() - gamma) * (1.0 + 1e-12) + 1e-300);
  }
}

TEST(ClipLearner, ResidualOnEveryRound) {
  std::mt19937_64 rng(34);
  for (int run = 0; run < 10; ++run) {
    ClipLearner a(gradvar::test_util::log_uniform(rng, 1e-2, 10.0), gradvar::test_util::log_uniform(rng, 1e-2, 10.0), 2);
    for (int t = 0; t < 300; ++t) {
      a.step(heavy_gradient(rng, 2), heavy_gradient(rng, 2));
      const double target = a.last_target();
      const double r = a.last_radius();
      EXPECT_LE(std::abs(residual(r, target, a.params(), a.beta())), 1e-10) << "target " << target;
    }
  }
}

TEST(ClipLearner, IteratesMatchRadialArgmin) {
  std::mt19937_64 rng(35);
  for (int run = 0; run < 10; ++run) {
    ClipLearner a(gradvar::test_util::log_uniform(rng, 0.1, 10.0), gradvar::test_util::log_uniform(rng, 0.1, 10.0), 3);
    for (int t = 0; t < 50; ++t) {
      a.step(gradvar::test_util::random_point(rng, 3), gradvar::test_util::random_point(rng, 3));
      const Point tilde = -(a.gradient_sum() + a.hint());
      const double target = tilde.norm();
      const PfRegParams p = a.params();
      const double beta = a.beta();
      const double r = gradvar::oracle::numeric_radial_argmin(
          [&](double x) { return gradvar::psi_value(x, p) + 0.5 * beta * x * x - target * x; }, target / beta);
      EXPECT_LE(std::abs(a.last_radius() - r), 1e-6 * std::max(r, 1e-9)) << run << " " << t;
    }
  }
}

TEST(ClipLearner, RadiusMovesWithinBracketForFixedParams) {
  std::mt19937_64 rng(36);
  const PfRegParams p{0.05, 30.0, 2.0};
  const double beta = 0.8;
  Point theta = Point::zeros(2);
  Point h = Point::zeros(2);
  Point w = Point::zeros(2);
  for (int t = 0; t < 1000; ++t) {
    const Point g = gradvar::test_util::random_point(rng, 2);
    const Point h_next = gradvar::test_util::random_point(rng, 2);
    const double step = (g - h + h_next).norm();
    theta -= g;
    const Point tilde = theta - h_next;
    const double target = tilde.norm();
    const double r = gradvar::solve_radius(target, p, beta, w.norm(), step);
    EXPECT_LE(std::abs(r - w.norm()), step / beta + 1e-9);
    w = target > 0.0 ? (r / target) * tilde : Point::zeros(2);
    h = h_next;
  }
}

TEST(ClipLearner, CmdRouteMatchesFtrl) {
  std::mt19937_64 rng(37);
  const double beta = 2.0;
  ClipLearner a(0.5, 1.0, 3);
  std::vector<Point> g, h{Point::zeros(3)};
  std::vector<PfRegParams> params{a.params()};
  std::vector<Point> w{a.decision()};
  for (int t = 0; t < 300; ++t) {
    g.push_back(gradvar::test_util::random_point(rng, 3, 2.0));
    h.push_back(gradvar::test_util::random_point(rng, 3, 2.0));
    w.push_back(a.step(g.back(), h.back()));
    params.push_back(a.params());
  }
  ASSERT_DOUBLE_EQ(a.beta(), beta);
  const auto cmd = gradvar::oracle::cmd_iterates(g, h, params, beta);
  ASSERT_EQ(cmd.size(), w.size());
  for (std::size_t t = 0; t < w.size(); ++t)
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(cmd[t][i], w[t][i], 1e-8 * std::max(1.0, w[t].norm())) << t;
}

TEST(ClipLearner, UpdateUsesZeroHints) {
  ClipLearner a(1.0, 1.0, 2), b(1.0, 1.0, 2);
  std::mt19937_64 rng(38);
  for (int t = 0; t < 20; ++t) {
    const Point g = gradvar::test_util::random_point(rng, 2);
    EXPECT_EQ(a.update(g), b.step(g, Point::zeros(2)));
  }
}
