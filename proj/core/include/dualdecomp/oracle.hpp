#pragma once

#include <vector>

#include "dualdecomp/model.hpp"

namespace dualdecomp {

/// Dual Lipschitz constants: one per agent plus the global ‖G‖²/σ_f.
struct LipschitzProfile {
  std::vector<double> agent;  ///< L_{d_i}
  double global = 0.0;        ///< L_d, zero when not computed
  double sigma_f = 0.0;
};

/// Diagonal step metric. `block[j]` is the scalar w_j; `diag` expands it over
/// the stacked (ν, μ) coordinates so that ‖λ‖²_W = Σ_j w_j ‖λ_j‖².
struct WeightMatrix {
  std::vector<double> block;
  Vector diag;

  double norm(const Vector& x) const;          ///< ‖x‖_W
  double inverse_norm(const Vector& x) const;  ///< ‖x‖_{W⁻¹}
  /// Scalar metric L·I on the same coordinates (centralized steps).
  static WeightMatrix scalar(const ProblemInstance& instance, double value);
};

/// Squared spectral norm of the stacked neighbour blocks of agent i over σ_i.
double local_lipschitz(const ProblemInstance& instance, int i);

/// Per-agent constants; the global L_d is included when `with_global` is set.
LipschitzProfile lipschitz_profile(const ProblemInstance& instance, bool with_global = true);

/// w_j = Σ_{i∈N̄_j} L_{d_i}.
WeightMatrix weight_matrix(const ProblemInstance& instance, const LipschitzProfile& profile);

/// ‖G‖²/σ_f by power iteration on GᵀG.
double global_lipschitz(const ProblemInstance& instance);

/// argmin over Z_i of f_i(z_i) + <price_i, z_i>.
Vector inner_solve(const ProblemInstance& instance, int i, const Vector& price_i);

struct DualEvaluation {
  double value = 0.0;  ///< d(λ)
  Vector gradient;     ///< (A z − b, C z − c) stacked
  Vector z;            ///< z(λ)
};

/// Projects λ onto D first, then evaluates d, ∇d and z(λ).
DualEvaluation dual_value_grad(const ProblemInstance& instance, const DualPoint& lambda);

/// ν untouched, μ clipped at zero.
DualPoint project_dual(DualPoint lambda);
/// Same projection on a stacked vector whose first `p` entries are ν.
void project_dual_inplace(Vector& values, Index p);

/// Inner product that treats 0·∞ as 0, so infinite right-hand sides with
/// zero multipliers do not poison the dual value.
double safe_dot(const Vector& a, const Vector& b);

/// Number of worker threads for inner solves, from DUALDECOMP_THREADS (default 1).
int inner_solve_threads();

}  // namespace dualdecomp
