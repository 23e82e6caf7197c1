#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "dualdecomp/types.hpp"

namespace dualdecomp {

/// Coordinate-wise box. Infinite bounds are encoded as +/-kInf.
struct Box {
  Vector lo;
  Vector hi;

  static Box unbounded(Index dim);
  bool contains(const Vector& z) const;
  Vector clamp(Vector z) const;
};

/// 0.5 * sum_k w_k (z_k - ref_k)^2
struct QuadraticCost {
  Vector weights;
  Vector reference;
};

/// 0.5 * sum_k w_k (z_k - ref_k)^2 - gamma * log(beta + z_{log_index})
struct QuadraticLogCost {
  Vector weights;
  Vector reference;
  double gamma = 0.0;
  double beta = 0.0;
  Index log_index = 0;
};

/// One coordinate of a separable objective. `second_derivative` may be left
/// empty, in which case the inner solver falls back to bisection steps.
struct ScalarTerm {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::function<double(double)> second_derivative;
  double sigma = 0.0;
};

struct SeparableScalarCost {
  std::vector<ScalarTerm> terms;
};

/// Strongly convex local cost f_i together with its box Z_i.
class LocalObjective {
 public:
  using Kind = std::variant<QuadraticCost, QuadraticLogCost, SeparableScalarCost>;

  static LocalObjective quadratic(Vector weights, Vector reference, std::optional<Box> box = {});
  static LocalObjective quadratic_log(Vector weights, Vector reference, double gamma, double beta,
                                      Index log_index, std::optional<Box> box = {});
  static LocalObjective separable(std::vector<ScalarTerm> terms, std::optional<Box> box = {});

  Index dimension() const { return box_.lo.size(); }
  double sigma() const { return sigma_; }
  std::optional<double> lipschitz() const { return lipschitz_; }
  const Box& box() const { return box_; }
  const Kind& kind() const { return kind_; }

  /// Overrides the gradient Lipschitz constant; must be >= sigma.
  void declare_lipschitz(double value);

  /// f_i(z); +inf outside the domain of the log term.
  double value(const Vector& z) const;
  Vector gradient(const Vector& z) const;

  /// argmin_{z in box} f_i(z) + <price, z>.
  Vector minimize(const Vector& price) const;

 private:
  LocalObjective(Kind kind, Box box);

  Kind kind_;
  Box box_;
  double sigma_ = 0.0;
  std::optional<double> lipschitz_;
};

/// Positive root of w (P - ref)(beta + P) + a (beta + P) - gamma = 0, i.e. the
/// stationary point of 0.5 w (P - ref)^2 - gamma log(beta + P) + a P on
/// (-beta, inf). Throws NoRootInDomain if the root is not above -beta.
double quadratic_log_root(double weight, double reference, double gamma, double beta, double price);

}  // namespace dualdecomp
