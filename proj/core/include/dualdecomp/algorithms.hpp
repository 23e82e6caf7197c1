#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "dualdecomp/model.hpp"
#include "dualdecomp/oracle.hpp"

namespace dualdecomp {

enum class Method { kDfg, kHdfg, kDg };
enum class StepMode { kDistributed, kCentralized };
enum class Termination { kConverged, kMaxIters };

std::string_view to_string(Method method);
std::string_view to_string(StepMode mode);
std::string_view to_string(Termination termination);
Method parse_method(std::string_view text);
StepMode parse_step_mode(std::string_view text);

struct SolverConfig {
  Method method = Method::kDfg;
  StepMode step_mode = StepMode::kDistributed;
  double eps = 0.01;
  long max_iters = 300000;
  /// First H-DFG phase length; each unsuccessful round doubles it.
  long hdfg_phase_length = 1;
  long trace_stride = 1;
  bool record_trace = true;
  /// Also evaluate d(λ̂^k) for DFG records. Costs one extra oracle call per
  /// recorded iteration and is not counted in `iterations`.
  bool evaluate_lambda_hat = false;
  /// Refuse to run without f* instead of falling back to the duality-gap test.
  bool require_reference = false;
};

/// Step metric for a run: the distributed W or L_d·I.
WeightMatrix step_metric(const ProblemInstance& instance, const LipschitzProfile& profile, StepMode mode);

/// One DFG iteration per call. `center` is the prox centre λ⁰ (zero unless
/// the method is being restarted).
class DfgIterator {
 public:
  DfgIterator(const ProblemInstance& instance, WeightMatrix metric, std::optional<DualPoint> center = {});

  /// Evaluates at λ^k, forms λ̂^k, S^k, λ^{k+1} and the running average ẑ^k.
  void step();

  long k() const { return k_; }  ///< index of the last evaluated iterate, -1 before the first step
  const DualPoint& lambda() const { return lambda_; }            ///< λ^k
  const DualPoint& lambda_hat() const { return lambda_hat_; }    ///< λ̂^k
  const DualPoint& next_lambda() const { return next_; }         ///< λ^{k+1}
  const DualEvaluation& evaluation() const { return eval_; }     ///< at λ^k
  const Vector& z_average() const { return z_avg_; }             ///< ẑ^k
  const Vector& accumulator() const { return S_; }               ///< S^k
  const WeightMatrix& metric() const { return metric_; }
  /// ‖λ̂^k − λ^k‖_W, the gradient-map norm at λ^k.
  double gradient_map_norm() const { return gradmap_; }

 private:
  const ProblemInstance* instance_;
  WeightMatrix metric_;
  DualPoint center_;
  DualPoint lambda_;
  DualPoint lambda_hat_;
  DualPoint next_;
  DualEvaluation eval_;
  Vector S_;
  Vector z_avg_;
  double gradmap_ = 0.0;
  long k_ = -1;
};

/// Weighted projected gradient ascent λ^{k+1} = [λ^k + W⁻¹∇d(λ^k)]_D.
class DgIterator {
 public:
  DgIterator(const ProblemInstance& instance, WeightMatrix metric, std::optional<DualPoint> start = {});

  void step();

  long k() const { return k_; }
  const DualPoint& lambda() const { return lambda_; }     ///< λ^k (evaluated)
  const DualPoint& next_lambda() const { return next_; }  ///< λ^{k+1}
  const DualEvaluation& evaluation() const { return eval_; }
  const WeightMatrix& metric() const { return metric_; }
  /// ‖λ^{k+1} − λ^k‖_W.
  double step_norm() const { return step_norm_; }

 private:
  const ProblemInstance* instance_;
  WeightMatrix metric_;
  DualPoint lambda_;
  DualPoint next_;
  DualEvaluation eval_;
  double step_norm_ = 0.0;
  long k_ = -1;
};

/// The hybrid scheme for a fixed phase length k: k+1 DFG evaluations, then
/// k+1 gradient steps started from λ̂^k. One oracle call per step().
class HdfgIterator {
 public:
  HdfgIterator(const ProblemInstance& instance, WeightMatrix metric, long k);

  void step();
  bool done() const { return evaluations_ == 2 * k_ + 2; }

  long phase_length() const { return k_; }
  long evaluations() const { return evaluations_; }
  int phase() const { return evaluations_ <= k_ + 1 && !in_phase2_ ? 1 : 2; }
  /// Index j of the last evaluated iterate.
  long j() const;

  const DualPoint& lambda() const;  ///< last evaluated λ^j
  const DualEvaluation& evaluation() const;
  const DualPoint& next_lambda() const;

  /// λ̂^k from phase 1 (valid once phase 2 has started).
  const DualPoint& lambda_hat_k() const { return lambda_hat_k_; }

  /// Running argmin over the phase-2 steps taken so far.
  bool has_kstar() const { return kstar_ >= 0; }
  long kstar() const { return kstar_; }
  double kstar_sq_norm() const { return kstar_sq_norm_; }
  const DualPoint& lambda_kstar() const { return lambda_kstar_; }
  const Vector& z_kstar() const { return z_kstar_; }
  double d_kstar() const { return d_kstar_; }

  const DfgIterator& phase1() const { return dfg_; }
  const DgIterator& phase2() const { return *dg_; }

 private:
  const ProblemInstance* instance_;
  WeightMatrix metric_;
  long k_;
  long evaluations_ = 0;
  bool in_phase2_ = false;
  DfgIterator dfg_;
  std::optional<DgIterator> dg_;
  DualPoint lambda_hat_k_;
  long kstar_ = -1;
  double kstar_sq_norm_ = 0.0;
  DualPoint lambda_kstar_;
  Vector z_kstar_;
  double d_kstar_ = 0.0;
};

struct HdfgResult {
  long k = 0;
  long kstar = 0;
  DualPoint lambda_kstar;
  Vector z_kstar;
  double d_kstar = 0.0;
  DualPoint lambda_hat_k;
  double d_lambda_hat_k = 0.0;
  std::vector<double> phase2_sq_norms;     ///< ‖λ^j − λ^{j+1}‖²_W, j = k..2k
  std::vector<double> phase2_dual_values;  ///< d(λ^j), j = k..2k
  DualPoint lambda_end;                    ///< λ^{2k+1}
  long evaluations = 0;
};

/// Runs the hybrid scheme once with phase length k >= 1.
HdfgResult hdfg_run(const ProblemInstance& instance, const WeightMatrix& metric, long k);

/// Smallest index of the minimum entry (ties go to the earliest).
std::size_t argmin_first(const std::vector<double>& values);

struct TraceRecord {
  long k = 0;               ///< oracle evaluations so far minus one
  int phase = 0;            ///< H-DFG phase (0 for the other methods)
  double dual_value = 0.0;  ///< d at the evaluated multiplier
  double dual_value_hat = kNaN;  ///< d(λ̂^k) when requested
  double primal_value = 0.0;     ///< f at the candidate primal point
  double feasibility = 0.0;      ///< ‖[G z − g]_D‖_{W⁻¹} at the candidate, distributed W
  double gradmap = 0.0;          ///< ‖[λ + W⁻¹∇d]_D − λ‖ in the step metric
  double dist_to_ref = kNaN;     ///< ‖candidate − z*‖ when a reference point is supplied

  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
};

struct SolverTrace {
  std::vector<TraceRecord> records;
};

struct SolveResult {
  Termination termination = Termination::kMaxIters;
  long iterations = 0;  ///< dual gradient evaluations used
  Vector z;             ///< candidate primal point at exit
  DualPoint lambda;     ///< multiplier matching the candidate
  double primal_value = 0.0;
  double dual_value = 0.0;  ///< best d seen
  double feasibility = 0.0;
  SolverTrace trace;
};

struct ReferencePoint {
  double fstar = 0.0;
  std::optional<Vector> zstar;
};

/// Iterates the configured method until
///   |f(z) − f*| / |f*| <= ε  and  ‖[G z − g]_D‖_{W⁻¹} <= ε
/// or the evaluation budget is spent. Without a reference, |f(z) − d| / |d|
/// replaces the suboptimality test (d is the best dual value seen).
SolveResult solve(const ProblemInstance& instance, const SolverConfig& config,
                  const std::optional<ReferencePoint>& reference);

/// Overload that reuses a precomputed Lipschitz profile.
SolveResult solve(const ProblemInstance& instance, const LipschitzProfile& profile, const SolverConfig& config,
                  const std::optional<ReferencePoint>& reference);

/// ‖[r]_D‖_{W⁻¹} for a stacked residual r (ν part kept, μ part clipped).
double projected_residual_norm(const Vector& residual, Index p, const WeightMatrix& metric);

}  // namespace dualdecomp
