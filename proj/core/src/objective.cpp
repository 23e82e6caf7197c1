#include "dualdecomp/objective.hpp"

#include <algorithm>
#include <cmath>

#include "dualdecomp/error.hpp"

namespace dualdecomp {

namespace {

constexpr double kScalarTolerance = 1e-12;
constexpr int kScalarMaxIterations = 200;

double clamp_scalar(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

void require_positive(const Vector& weights, const char* what) {
  for (Index k = 0; k < weights.size(); ++k) {
    if (!(weights[k] > 0.0)) {
      throw Error(ErrorCode::kNonPositiveStrongConvexity,
                  std::string(what) + " weight " + std::to_string(k) + " must be positive");
    }
  }
}

Box resolve_box(std::optional<Box> box, Index dim) {
  if (!box) return Box::unbounded(dim);
  if (box->lo.size() != dim || box->hi.size() != dim) {
    throw Error(ErrorCode::kDimensionMismatch, "box dimension does not match objective");
  }
  for (Index k = 0; k < dim; ++k) {
    if (std::isnan(box->lo[k]) || std::isnan(box->hi[k]) || box->lo[k] > box->hi[k]) {
      throw Error(ErrorCode::kInvalidObjective, "box bound lo > hi at coordinate " + std::to_string(k));
    }
  }
  return *box;
}

// Minimizes term(t) + price * t over [lo, hi] by safeguarded Newton.
double minimize_scalar(const ScalarTerm& term, double price, double lo, double hi) {
  auto slope = [&](double t) { return term.derivative(t) + price; };

  double t0 = clamp_scalar(0.0, lo, hi);
  double g0 = slope(t0);
  if (g0 == 0.0) return t0;

  // Strong convexity bounds the distance to the stationary point by |g0| / sigma.
  double a, b;
  if (g0 > 0.0) {
    b = t0;
    a = std::max(lo, t0 - g0 / term.sigma);
    if (slope(a) >= 0.0) return a;
  } else {
    a = t0;
    b = std::min(hi, t0 - g0 / term.sigma);
    if (slope(b) <= 0.0) return b;
  }

  double t = 0.5 * (a + b);
  for (int it = 0; it < kScalarMaxIterations; ++it) {
    const double g = slope(t);
    if (g == 0.0) return t;
    if (g < 0.0) a = t; else b = t;
    if (b - a <= kScalarTolerance * std::max(1.0, std::abs(t))) return 0.5 * (a + b);

    double next = 0.5 * (a + b);
    if (term.second_derivative) {
      const double h = term.second_derivative(t);
      if (h > 0.0) {
        const double newton = t - g / h;
        if (newton > a && newton < b) next = newton;
      }
    }
    if (std::abs(next - t) <= 0.25 * kScalarTolerance * std::max(1.0, std::abs(t))) return next;
    t = next;
  }
  throw Error(ErrorCode::kNonConvergence, "scalar inner solve exceeded 200 iterations");
}

}  // namespace

Box Box::unbounded(Index dim) { return Box{Vector::Constant(dim, -kInf), Vector::Constant(dim, kInf)}; }

bool Box::contains(const Vector& z) const {
  return z.size() == lo.size() && (z.array() >= lo.array()).all() && (z.array() <= hi.array()).all();
}

Vector Box::clamp(Vector z) const { return z.cwiseMax(lo).cwiseMin(hi); }

double quadratic_log_root(double weight, double reference, double gamma, double beta, double price) {
  // weight * P^2 + (weight*beta - weight*reference + price) * P + (price*beta - weight*reference*beta - gamma) = 0
  const double a = weight;
  const double b = weight * beta - weight * reference + price;
  const double c = price * beta - weight * reference * beta - gamma;
  const double disc = b * b - 4.0 * a * c;
  if (!(disc >= 0.0)) throw Error(ErrorCode::kNoRootInDomain, "negative discriminant");
  const double sq = std::sqrt(disc);
  // larger root, computed without cancellation
  const double root = b > 0.0 ? (2.0 * c) / (-b - sq) : (-b + sq) / (2.0 * a);
  if (!(root > -beta)) throw Error(ErrorCode::kNoRootInDomain, "root does not exceed -beta");
  return root;
}

LocalObjective::LocalObjective(Kind kind, Box box) : kind_(std::move(kind)), box_(std::move(box)) {}

LocalObjective LocalObjective::quadratic(Vector weights, Vector reference, std::optional<Box> box) {
  if (weights.size() != reference.size() || weights.size() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "quadratic weights/reference size mismatch");
  }
  require_positive(weights, "quadratic");
  const Index dim = weights.size();
  LocalObjective obj(QuadraticCost{weights, reference}, resolve_box(std::move(box), dim));
  obj.sigma_ = weights.minCoeff();
  obj.lipschitz_ = weights.maxCoeff();
  return obj;
}

LocalObjective LocalObjective::quadratic_log(Vector weights, Vector reference, double gamma, double beta,
                                             Index log_index, std::optional<Box> box) {
  if (weights.size() != reference.size() || weights.size() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "quadratic-log weights/reference size mismatch");
  }
  require_positive(weights, "quadratic-log");
  if (log_index < 0 || log_index >= weights.size()) {
    throw Error(ErrorCode::kInvalidObjective, "log index out of range");
  }
  if (!(gamma > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorCode::kInvalidObjective, "quadratic-log requires gamma > 0 and beta > 0");
  }
  const Index dim = weights.size();
  Box resolved = resolve_box(std::move(box), dim);
  if (!(resolved.lo[log_index] >= -0.5 * beta)) {
    throw Error(ErrorCode::kInvalidObjective, "box must keep beta + P >= beta / 2 on the log coordinate");
  }
  LocalObjective obj(QuadraticLogCost{weights, reference, gamma, beta, log_index}, std::move(resolved));
  obj.sigma_ = weights.minCoeff();
  const double shifted = beta + obj.box_.lo[log_index];
  double lip = weights.maxCoeff();
  lip = std::max(lip, weights[log_index] + gamma / (shifted * shifted));
  obj.lipschitz_ = lip;
  return obj;
}

LocalObjective LocalObjective::separable(std::vector<ScalarTerm> terms, std::optional<Box> box) {
  if (terms.empty()) throw Error(ErrorCode::kDimensionMismatch, "separable objective has no terms");
  double sigma = kInf;
  for (const ScalarTerm& term : terms) {
    if (!term.value || !term.derivative) {
      throw Error(ErrorCode::kInvalidObjective, "scalar term needs value and derivative callbacks");
    }
    if (!(term.sigma > 0.0)) throw Error(ErrorCode::kNonPositiveStrongConvexity, "scalar term sigma must be positive");
    sigma = std::min(sigma, term.sigma);
  }
  const Index dim = static_cast<Index>(terms.size());
  LocalObjective obj(SeparableScalarCost{std::move(terms)}, resolve_box(std::move(box), dim));
  obj.sigma_ = sigma;
  return obj;
}

void LocalObjective::declare_lipschitz(double value) {
  if (!(value >= sigma_)) throw Error(ErrorCode::kInvalidObjective, "Lipschitz constant must be >= sigma");
  lipschitz_ = value;
}

double LocalObjective::value(const Vector& z) const {
  return std::visit(
      [&](const auto& cost) -> double {
        using T = std::decay_t<decltype(cost)>;
        if constexpr (std::is_same_v<T, QuadraticCost>) {
          return 0.5 * (cost.weights.array() * (z - cost.reference).array().square()).sum();
        } else if constexpr (std::is_same_v<T, QuadraticLogCost>) {
          const double arg = cost.beta + z[cost.log_index];
          if (!(arg > 0.0)) return kInf;
          return 0.5 * (cost.weights.array() * (z - cost.reference).array().square()).sum() -
                 cost.gamma * std::log(arg);
        } else {
          double total = 0.0;
          for (std::size_t k = 0; k < cost.terms.size(); ++k) total += cost.terms[k].value(z[static_cast<Index>(k)]);
          return total;
        }
      },
      kind_);
}

Vector LocalObjective::gradient(const Vector& z) const {
  return std::visit(
      [&](const auto& cost) -> Vector {
        using T = std::decay_t<decltype(cost)>;
        if constexpr (std::is_same_v<T, QuadraticCost>) {
          return cost.weights.cwiseProduct(z - cost.reference);
        } else if constexpr (std::is_same_v<T, QuadraticLogCost>) {
          Vector grad = cost.weights.cwiseProduct(z - cost.reference);
          grad[cost.log_index] -= cost.gamma / (cost.beta + z[cost.log_index]);
          return grad;
        } else {
          Vector grad(z.size());
          for (std::size_t k = 0; k < cost.terms.size(); ++k) {
            grad[static_cast<Index>(k)] = cost.terms[k].derivative(z[static_cast<Index>(k)]);
          }
          return grad;
        }
      },
      kind_);
}

Vector LocalObjective::minimize(const Vector& price) const {
  if (price.size() != dimension()) throw Error(ErrorCode::kDimensionMismatch, "price size does not match agent");
  return std::visit(
      [&](const auto& cost) -> Vector {
        using T = std::decay_t<decltype(cost)>;
        Vector z(price.size());
        if constexpr (std::is_same_v<T, QuadraticCost>) {
          for (Index k = 0; k < z.size(); ++k) {
            z[k] = clamp_scalar(cost.reference[k] - price[k] / cost.weights[k], box_.lo[k], box_.hi[k]);
          }
        } else if constexpr (std::is_same_v<T, QuadraticLogCost>) {
          for (Index k = 0; k < z.size(); ++k) {
            const double raw = k == cost.log_index
                                   ? quadratic_log_root(cost.weights[k], cost.reference[k], cost.gamma, cost.beta, price[k])
                                   : cost.reference[k] - price[k] / cost.weights[k];
            z[k] = clamp_scalar(raw, box_.lo[k], box_.hi[k]);
          }
        } else {
          for (Index k = 0; k < z.size(); ++k) {
            z[k] = minimize_scalar(cost.terms[static_cast<std::size_t>(k)], price[k], box_.lo[k], box_.hi[k]);
          }
        }
        return z;
      },
      kind_);
}

}  // namespace dualdecomp
