#include "dualdecomp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>

#include "dualdecomp/error.hpp"

namespace dualdecomp {

namespace {

constexpr double kPowerTolerance = 1e-8;
constexpr int kPowerMaxIterations = 10000;

Vector multiply_GtG(const ProblemInstance& instance, const Vector& x) {
  const ConstraintResidual gx = multiply_G(instance, x);
  return apply_G_transpose(instance, DualPoint(gx.eq, gx.ineq));
}

}  // namespace

double WeightMatrix::norm(const Vector& x) const { return std::sqrt((diag.array() * x.array().square()).sum()); }

double WeightMatrix::inverse_norm(const Vector& x) const {
  return std::sqrt((x.array().square() / diag.array()).sum());
}

WeightMatrix WeightMatrix::scalar(const ProblemInstance& instance, double value) {
  WeightMatrix w;
  w.block.assign(static_cast<std::size_t>(instance.num_blocks()), value);
  w.diag = Vector::Constant(instance.p() + instance.q(), value);
  return w;
}

double local_lipschitz(const ProblemInstance& instance, int i) {
  if (i < 0 || i >= instance.num_agents()) throw Error(ErrorCode::kInvalidArgument, "agent index out of range");
  // ‖S‖² = λ_max(SᵀS) where S stacks the neighbour blocks; SᵀS is only n_i × n_i.
  const Index ni = instance.agent_dim(i);
  Matrix gram = Matrix::Zero(ni, ni);
  for (int j : instance.structure().agent_neighbors(i)) {
    const CouplingBlock& blk = instance.block(j, i);
    gram.noalias() += blk.eq.transpose() * blk.eq;
    gram.noalias() += blk.ineq.transpose() * blk.ineq;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double top = std::max(0.0, eig.eigenvalues().maxCoeff());
  return top / instance.objective(i).sigma();
}

double global_lipschitz(const ProblemInstance& instance) {
  const Index n = instance.n();
  if (n == 0 || instance.p() + instance.q() == 0) return 0.0;
  // The all-ones direction lies in the kernel of a graph Laplacian, so the
  // start vector is tilted by a fixed, deterministic ramp.
  Vector x(n);
  for (Index k = 0; k < n; ++k) x[k] = 1.0 + 0.5 * std::sin(1.0 + static_cast<double>(k));
  x.normalize();
  double estimate = 0.0;
  for (int it = 0; it < kPowerMaxIterations; ++it) {
    Vector y = multiply_GtG(instance, x);
    const double next = x.dot(y);
    const double ynorm = y.norm();
    if (ynorm == 0.0) return 0.0;
    x = y / ynorm;
    if (it > 0 && std::abs(next - estimate) <= kPowerTolerance * std::abs(next)) {
      return next / instance.sigma_f();
    }
    estimate = next;
  }
  throw Error(ErrorCode::kPowerIterationStall, "power iteration did not settle within 10000 iterations");
}

LipschitzProfile lipschitz_profile(const ProblemInstance& instance, bool with_global) {
  LipschitzProfile profile;
  profile.sigma_f = instance.sigma_f();
  profile.agent.reserve(static_cast<std::size_t>(instance.num_agents()));
  for (int i = 0; i < instance.num_agents(); ++i) profile.agent.push_back(local_lipschitz(instance, i));
  if (with_global) profile.global = global_lipschitz(instance);
  return profile;
}

WeightMatrix weight_matrix(const ProblemInstance& instance, const LipschitzProfile& profile) {
  if (static_cast<int>(profile.agent.size()) != instance.num_agents()) {
    throw Error(ErrorCode::kDimensionMismatch, "profile does not cover every agent");
  }
  WeightMatrix w;
  w.block.resize(static_cast<std::size_t>(instance.num_blocks()));
  w.diag.resize(instance.p() + instance.q());
  for (int j = 0; j < instance.num_blocks(); ++j) {
    double sum = 0.0;
    for (int i : instance.structure().block_neighbors(j)) sum += profile.agent[static_cast<std::size_t>(i)];
    if (!(sum > 0.0)) {
      throw Error(ErrorCode::kEmptyBlockNeighborhood,
                  "block " + std::to_string(j) + " has no neighbour with positive Lipschitz constant");
    }
    w.block[static_cast<std::size_t>(j)] = sum;
    w.diag.segment(instance.eq_offset(j), instance.eq_rows(j)).setConstant(sum);
    w.diag.segment(instance.p() + instance.ineq_offset(j), instance.ineq_rows(j)).setConstant(sum);
  }
  return w;
}

Vector inner_solve(const ProblemInstance& instance, int i, const Vector& price_i) {
  if (i < 0 || i >= instance.num_agents()) throw Error(ErrorCode::kInvalidArgument, "agent index out of range");
  return instance.objective(i).minimize(price_i);
}

void project_dual_inplace(Vector& values, Index p) {
  auto mu = values.tail(values.size() - p);
  mu = mu.cwiseMax(0.0);
}

DualPoint project_dual(DualPoint lambda) {
  project_dual_inplace(lambda.values(), lambda.p());
  return lambda;
}

double safe_dot(const Vector& a, const Vector& b) {
  double total = 0.0;
  for (Index k = 0; k < a.size(); ++k) {
    if (a[k] == 0.0 || b[k] == 0.0) continue;
    total += a[k] * b[k];
  }
  return total;
}

int inner_solve_threads() {
  const char* env = std::getenv("DUALDECOMP_THREADS");
  if (env == nullptr) return 1;
  char* end = nullptr;
  const long value = std::strtol(env, &end, 10);
  if (end == env || value < 1) return 1;
  return static_cast<int>(std::min<long>(value, 256));
}

DualEvaluation dual_value_grad(const ProblemInstance& instance, const DualPoint& lambda_in) {
  if (lambda_in.p() != instance.p() || lambda_in.q() != instance.q()) {
    throw Error(ErrorCode::kDimensionMismatch, "multiplier has wrong shape");
  }
  const DualPoint lambda = project_dual(lambda_in);
  const int M = instance.num_agents();

  DualEvaluation out;
  out.z.resize(instance.n());
  auto solve_range = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      out.z.segment(instance.agent_offset(i), instance.agent_dim(i)) =
          inner_solve(instance, i, agent_price(instance, i, lambda));
    }
  };

  const int threads = std::min(inner_solve_threads(), M);
  if (threads <= 1) {
    solve_range(0, M);
  } else {
    // Each agent writes a disjoint slice, so the result is independent of scheduling.
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(threads));
    const int chunk = (M + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(M, begin + chunk);
      pool.emplace_back([&, t, begin, end] {
        try {
          solve_range(begin, end);
        } catch (...) {
          failures[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }

  const ConstraintResidual r = apply_G(instance, out.z);
  out.gradient.resize(instance.p() + instance.q());
  out.gradient.head(instance.p()) = r.eq;
  out.gradient.tail(instance.q()) = r.ineq;
  out.value = instance.objective_value(out.z) + safe_dot(lambda.values(), out.gradient);
  return out;
}

}  // namespace dualdecomp
