#pragma once

#include <string>

#include "dualdecomp/model.hpp"
#include "dualdecomp/oracle.hpp"

namespace dualdecomp {

struct ReferenceOptions {
  /// Stop once ‖∇⁺d(λ)‖_W falls below this value.
  double gradmap_tolerance = 1e-11;
  long max_evaluations = 2000000;
  /// Threshold separating "active" from "zero" in the complementarity check.
  double complementarity_tolerance = 1e-7;
};

/// High-accuracy dual solution used for stopping rules and certificates.
struct ReferenceSolution {
  double fstar = 0.0;  ///< d(λ*), a lower bound on f* that is tight to round-off at convergence
  Vector zstar;        ///< z(λ*)
  DualPoint lambda_star;
  double gradmap_norm = 0.0;  ///< ‖∇⁺d(λ*)‖_W achieved
  double primal_gap = 0.0;    ///< |f(z*) − d(λ*)|
  double feasibility = 0.0;   ///< ‖[G z* − g]_D‖_{W⁻¹}
  long evaluations = 0;
  int restarts = 0;
  bool converged = false;
  /// Every inequality has μ_l > tol or a residual below −tol, so Λ* is a singleton
  /// when G restricted to active rows has full row rank.
  bool strictly_complementary = false;
  std::string method = "restarted-dfg";
};

/// Accelerated dual ascent restarted whenever the step direction turns
/// against the previous progress (the prox centre moves to the latest λ̂).
/// Converges linearly on the instances shipped here and needs no external solver.
ReferenceSolution reference_solve(const ProblemInstance& instance, const ReferenceOptions& options = {});
ReferenceSolution reference_solve(const ProblemInstance& instance, const WeightMatrix& metric,
                                  const ReferenceOptions& options = {});

}  // namespace dualdecomp
