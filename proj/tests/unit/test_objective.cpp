#include <cmath>

#include <gtest/gtest.h>

#include "dualdecomp/error.hpp"
#include "dualdecomp/objective.hpp"
#include "support.hpp"

using namespace dualdecomp;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index k = 0;
  for (double x : values) v[k++] = x;
  return v;
}

// Root of w(P − r)(β + P) + a(β + P) − γ = 0 by plain bisection on (−β, big).
double bisect_log_root(double w, double r, double gamma, double beta, double a) {
  auto h = [&](double P) { return w * (P - r) + a - gamma / (beta + P); };
  double lo = -beta + 1e-15, hi = 1e6;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Unbounded box except a lower bound of 0 on the log coordinate.
Box log_box(Index dim, Index log_index) {
  Box box = Box::unbounded(dim);
  box.lo[log_index] = 0.0;
  return box;
}

}  // namespace

TEST(Objective, QuadraticUnconstrainedStationarity) {
  const auto f = LocalObjective::quadratic(vec({1.0}), vec({0.0}));
  EXPECT_DOUBLE_EQ(f.minimize(vec({2.0}))[0], -2.0);
}

TEST(Objective, QuadraticClampsToBox) {
  const auto f = LocalObjective::quadratic(vec({1.0}), vec({2.0}), Box{vec({0.0}), vec({1.0})});
  EXPECT_DOUBLE_EQ(f.minimize(vec({0.0}))[0], 1.0);
}

TEST(Objective, QuadraticLogRootMatchesHandValue) {
  // 10(P − 1)(0.1 + P) = 2 has the positive root (9 + √201)/20.
  const double expected = (9.0 + std::sqrt(201.0)) / 20.0;
  EXPECT_NEAR(quadratic_log_root(10.0, 1.0, 2.0, 0.1, 0.0), expected, 1e-14);
  EXPECT_NEAR(expected, 1.15887, 1e-5);
  EXPECT_NEAR(bisect_log_root(10.0, 1.0, 2.0, 0.1, 0.0), expected, 1e-12);
}

TEST(Objective, QuadraticLogRootAgreesWithBisectionAcrossPrices) {
  for (double a : {-50.0, -3.0, -0.5, 0.0, 0.3, 7.0, 40.0, 1e3}) {
    for (double r : {0.0, 0.5, 2.0}) {
      const double root = quadratic_log_root(10.0, r, 2.0, 0.1, a);
      EXPECT_NEAR(root, bisect_log_root(10.0, r, 2.0, 0.1, a), 1e-10 * std::max(1.0, std::abs(root)))
          << "a = " << a << ", r = " << r;
    }
  }
}

TEST(Objective, QuadraticLogMinimizeClampsToPowerBox) {
  const auto f = LocalObjective::quadratic_log(vec({2.0, 10.0}), vec({0.0, 1.0}), 2.0, 0.1, 1,
                                               Box{vec({-1.0, 0.0}), vec({1.0, 1.1})});
  const Vector z = f.minimize(vec({0.0, 0.0}));
  EXPECT_DOUBLE_EQ(z[0], 0.0);
  EXPECT_DOUBLE_EQ(z[1], 1.1);  // 1.15887 clamped to the upper bound
}

TEST(Objective, ValueIsInfiniteOutsideLogDomain) {
  const auto f = LocalObjective::quadratic_log(vec({1.0}), vec({0.0}), 1.0, 0.1, 0, log_box(1, 0));
  EXPECT_TRUE(std::isinf(f.value(vec({-0.2}))));
  EXPECT_TRUE(std::isfinite(f.value(vec({0.0}))));
}

TEST(Objective, GradientMatchesFiniteDifference) {
  const auto f = LocalObjective::quadratic_log(vec({3.0, 10.0}), vec({0.2, 1.0}), 2.0, 0.1, 1, log_box(2, 1));
  const Vector z = vec({0.4, 0.7});
  const Vector g = f.gradient(z);
  for (Index k = 0; k < 2; ++k) {
    Vector up = z, down = z;
    up[k] += 1e-6;
    down[k] -= 1e-6;
    EXPECT_NEAR(g[k], (f.value(up) - f.value(down)) / 2e-6, 1e-6);
  }
}

TEST(Objective, SigmaIsSmallestWeight) {
  EXPECT_DOUBLE_EQ(LocalObjective::quadratic(vec({4.0, 2.0, 3.0}), vec({0, 0, 0})).sigma(), 2.0);
  EXPECT_DOUBLE_EQ(LocalObjective::quadratic_log(vec({2.0, 10.0}), vec({0, 0}), 2.0, 0.1, 1, log_box(2, 1)).sigma(), 2.0);
}

TEST(Objective, RejectsInvalidParameters) {
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  EXPECT_EQ(code([] { LocalObjective::quadratic(vec({0.0}), vec({0.0})); }), ErrorCode::kNonPositiveStrongConvexity);
  EXPECT_EQ(code([] { LocalObjective::quadratic(vec({1.0}), vec({0.0}), Box{vec({1.0}), vec({0.0})}); }),
            ErrorCode::kInvalidObjective);
  EXPECT_EQ(code([] { LocalObjective::quadratic(vec({1.0, 1.0}), vec({0.0})); }), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code([] { LocalObjective::quadratic_log(vec({1.0}), vec({0.0}), -1.0, 0.1, 0, log_box(1, 0)); }),
            ErrorCode::kInvalidObjective);
  EXPECT_EQ(code([] { LocalObjective::quadratic_log(vec({1.0}), vec({0.0}), 1.0, 0.1, 3, log_box(1, 0)); }),
            ErrorCode::kInvalidObjective);
  // Unbounded below on the log coordinate is rejected.
  EXPECT_EQ(code([] { LocalObjective::quadratic_log(vec({1.0}), vec({0.0}), 1.0, 0.1, 0); }),
            ErrorCode::kInvalidObjective);
}

TEST(Objective, SeparableCallbackMatchesProjectedGradient) {
  // f(z) = ½·2 z² + exp(z): strongly convex with σ = 2.
  ScalarTerm term;
  term.value = [](double z) { return z * z + std::exp(z); };
  term.derivative = [](double z) { return 2.0 * z + std::exp(z); };
  term.sigma = 2.0;
  const auto f = LocalObjective::separable({term}, Box{vec({-3.0}), vec({3.0})});
  for (double price : {-5.0, -1.0, 0.0, 2.0, 30.0}) {
    const double z = f.minimize(vec({price}))[0];
    const double brute = testsupport::projected_gradient_1d(
        [&](double t) { return 2.0 * t + std::exp(t) + price; }, -3.0, 3.0, 2.0 + std::exp(3.0), 0.0);
    EXPECT_NEAR(z, brute, 1e-10) << "price " << price;
  }
}
