#include "dualdecomp/reference.hpp"

#include <cmath>

#include "dualdecomp/algorithms.hpp"
#include "dualdecomp/error.hpp"

namespace dualdecomp {

ReferenceSolution reference_solve(const ProblemInstance& instance, const ReferenceOptions& options) {
  return reference_solve(instance, weight_matrix(instance, lipschitz_profile(instance, false)), options);
}

ReferenceSolution reference_solve(const ProblemInstance& instance, const WeightMatrix& metric,
                                  const ReferenceOptions& options) {
  ReferenceSolution out;
  DualPoint center = instance.zero_dual();
  DualPoint best_lambda = center;
  double best_gradmap = kInf;
  long used = 0;

  while (used < options.max_evaluations) {
    DfgIterator it(instance, metric, center);
    Vector previous_hat;
    bool restarted = false;
    while (used < options.max_evaluations) {
      it.step();
      ++used;
      if (it.gradient_map_norm() < best_gradmap) {
        best_gradmap = it.gradient_map_norm();
        best_lambda = it.lambda();
      }
      if (it.gradient_map_norm() <= options.gradmap_tolerance) {
        out.converged = true;
        break;
      }
      const Vector& hat = it.lambda_hat().values();
      if (previous_hat.size() > 0) {
        const Vector direction = metric.diag.cwiseProduct(hat - it.lambda().values());
        if (direction.dot(hat - previous_hat) < 0.0) {
          center = it.lambda_hat();
          ++out.restarts;
          restarted = true;
          break;
        }
      }
      previous_hat = hat;
    }
    if (out.converged || !restarted) break;
  }

  const DualEvaluation eval = dual_value_grad(instance, best_lambda);
  out.lambda_star = best_lambda;
  out.zstar = eval.z;
  out.fstar = eval.value;
  out.gradmap_norm = best_gradmap;
  out.evaluations = used;
  const double fz = instance.objective_value(eval.z);
  out.primal_gap = std::abs(fz - eval.value);

  Vector residual = eval.gradient;
  out.feasibility = projected_residual_norm(residual, instance.p(), metric);

  bool strict = true;
  const double tol = options.complementarity_tolerance;
  const auto mu = best_lambda.mu();
  for (Index l = 0; l < instance.q(); ++l) {
    const double slack = residual[instance.p() + l];
    if (!(mu[l] > tol) && !(slack < -tol)) {
      strict = false;
      break;
    }
  }
  out.strictly_complementary = strict;
  return out;
}

}  // namespace dualdecomp
