#include "dualdecomp/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dualdecomp/error.hpp"

namespace dualdecomp {

namespace {

DualPoint zero_like(const ProblemInstance& instance) { return instance.zero_dual(); }

DualPoint with_values(const ProblemInstance& instance, Vector values) {
  DualPoint out = instance.zero_dual();
  out.values() = std::move(values);
  return out;
}

void check_metric(const ProblemInstance& instance, const WeightMatrix& metric) {
  if (metric.diag.size() != instance.p() + instance.q()) {
    throw Error(ErrorCode::kDimensionMismatch, "step metric does not match the multiplier space");
  }
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kDfg: return "dfg";
    case Method::kHdfg: return "hdfg";
    case Method::kDg: return "dg";
  }
  return "?";
}

std::string_view to_string(StepMode mode) {
  return mode == StepMode::kDistributed ? "distributed" : "centralized";
}

std::string_view to_string(Termination termination) {
  return termination == Termination::kConverged ? "Converged" : "MaxIters";
}

Method parse_method(std::string_view text) {
  if (text == "dfg") return Method::kDfg;
  if (text == "hdfg") return Method::kHdfg;
  if (text == "dg") return Method::kDg;
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + std::string(text) + "'");
}

StepMode parse_step_mode(std::string_view text) {
  if (text == "distributed") return StepMode::kDistributed;
  if (text == "centralized") return StepMode::kCentralized;
  throw Error(ErrorCode::kInvalidArgument, "unknown step mode '" + std::string(text) + "'");
}

WeightMatrix step_metric(const ProblemInstance& instance, const LipschitzProfile& profile, StepMode mode) {
  if (mode == StepMode::kDistributed) return weight_matrix(instance, profile);
  if (!(profile.global > 0.0)) throw Error(ErrorCode::kInvalidArgument, "centralized steps need L_d > 0");
  return WeightMatrix::scalar(instance, profile.global);
}

double projected_residual_norm(const Vector& residual, Index p, const WeightMatrix& metric) {
  double total = 0.0;
  for (Index k = 0; k < residual.size(); ++k) {
    const double r = k < p ? residual[k] : std::max(residual[k], 0.0);
    if (r != 0.0) total += r * r / metric.diag[k];
  }
  return std::sqrt(total);
}

std::size_t argmin_first(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] < values[best]) best = k;
  }
  return best;
}

// ---------------------------------------------------------------------------

DfgIterator::DfgIterator(const ProblemInstance& instance, WeightMatrix metric, std::optional<DualPoint> center)
    : instance_(&instance), metric_(std::move(metric)), center_(center ? *center : zero_like(instance)) {
  check_metric(instance, metric_);
  if (center_.p() != instance.p() || center_.q() != instance.q()) {
    throw Error(ErrorCode::kDimensionMismatch, "prox centre has wrong shape");
  }
  center_ = project_dual(center_);
  lambda_ = center_;
  next_ = center_;
  S_ = Vector::Zero(center_.size());
}

void DfgIterator::step() {
  lambda_ = next_;
  ++k_;
  const double k = static_cast<double>(k_);
  const Index p = instance_->p();
  eval_ = dual_value_grad(*instance_, lambda_);
  const Vector& grad = eval_.gradient;

  Vector hat = lambda_.values() + grad.cwiseQuotient(metric_.diag);
  project_dual_inplace(hat, p);
  gradmap_ = metric_.norm(hat - lambda_.values());

  S_ += (k + 1.0) / 2.0 * grad;
  Vector tail = center_.values() + S_.cwiseQuotient(metric_.diag);
  project_dual_inplace(tail, p);
  Vector next = (k + 1.0) / (k + 3.0) * hat + 2.0 / (k + 3.0) * tail;

  if (k_ == 0) {
    z_avg_ = eval_.z;
  } else {
    z_avg_ = k / (k + 2.0) * z_avg_ + 2.0 / (k + 2.0) * eval_.z;
  }
  lambda_hat_ = with_values(*instance_, std::move(hat));
  next_ = with_values(*instance_, std::move(next));
}

DgIterator::DgIterator(const ProblemInstance& instance, WeightMatrix metric, std::optional<DualPoint> start)
    : instance_(&instance), metric_(std::move(metric)) {
  check_metric(instance, metric_);
  next_ = start ? project_dual(*start) : zero_like(instance);
  if (next_.p() != instance.p() || next_.q() != instance.q()) {
    throw Error(ErrorCode::kDimensionMismatch, "start point has wrong shape");
  }
  lambda_ = next_;
}

void DgIterator::step() {
  lambda_ = next_;
  ++k_;
  eval_ = dual_value_grad(*instance_, lambda_);
  Vector next = lambda_.values() + eval_.gradient.cwiseQuotient(metric_.diag);
  project_dual_inplace(next, instance_->p());
  step_norm_ = metric_.norm(next - lambda_.values());
  next_ = with_values(*instance_, std::move(next));
}

HdfgIterator::HdfgIterator(const ProblemInstance& instance, WeightMatrix metric, long k)
    : instance_(&instance), metric_(metric), k_(k), dfg_(instance, std::move(metric)) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "H-DFG phase length must be >= 1");
}

long HdfgIterator::j() const { return in_phase2_ ? k_ + dg_->k() : dfg_.k(); }

const DualPoint& HdfgIterator::lambda() const { return in_phase2_ ? dg_->lambda() : dfg_.lambda(); }

const DualEvaluation& HdfgIterator::evaluation() const { return in_phase2_ ? dg_->evaluation() : dfg_.evaluation(); }

const DualPoint& HdfgIterator::next_lambda() const {
  return in_phase2_ ? dg_->next_lambda() : dfg_.next_lambda();
}

void HdfgIterator::step() {
  if (done()) throw Error(ErrorCode::kInvalidArgument, "H-DFG run already finished");
  if (evaluations_ < k_ + 1) {
    dfg_.step();
    ++evaluations_;
    return;
  }
  if (!in_phase2_) {
    // Phase switch: λ^k := λ̂^k.
    lambda_hat_k_ = dfg_.lambda_hat();
    dg_.emplace(*instance_, metric_, lambda_hat_k_);
    in_phase2_ = true;
  }
  dg_->step();
  ++evaluations_;
  const double sq = dg_->step_norm() * dg_->step_norm();
  if (kstar_ < 0 || sq < kstar_sq_norm_) {
    kstar_ = k_ + dg_->k();
    kstar_sq_norm_ = sq;
    lambda_kstar_ = dg_->lambda();
    z_kstar_ = dg_->evaluation().z;
    d_kstar_ = dg_->evaluation().value;
  }
}

HdfgResult hdfg_run(const ProblemInstance& instance, const WeightMatrix& metric, long k) {
  HdfgIterator it(instance, metric, k);
  HdfgResult out;
  out.k = k;
  while (!it.done()) {
    it.step();
    if (it.phase() == 2) {
      const double norm = it.phase2().step_norm();
      out.phase2_sq_norms.push_back(norm * norm);
      out.phase2_dual_values.push_back(it.evaluation().value);
    }
  }
  out.kstar = it.kstar();
  out.lambda_kstar = it.lambda_kstar();
  out.z_kstar = it.z_kstar();
  out.d_kstar = it.d_kstar();
  out.lambda_hat_k = it.lambda_hat_k();
  out.d_lambda_hat_k = out.phase2_dual_values.front();
  out.lambda_end = it.next_lambda();
  out.evaluations = it.evaluations();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

class StopRule {
 public:
  StopRule(const ProblemInstance& instance, const WeightMatrix& stop_metric, double eps,
           const std::optional<ReferencePoint>& reference)
      : instance_(instance), metric_(stop_metric), eps_(eps), reference_(reference) {}

  struct Check {
    double primal_value;
    double feasibility;
    bool met;
  };

  Check evaluate(const Vector& z, double best_dual) const {
    const ConstraintResidual r = apply_G(instance_, z);
    Vector stacked(instance_.p() + instance_.q());
    stacked.head(instance_.p()) = r.eq;
    stacked.tail(instance_.q()) = r.ineq;
    const double feas = projected_residual_norm(stacked, instance_.p(), metric_);
    const double fz = instance_.objective_value(z);
    double gap;
    if (reference_) {
      gap = std::abs(fz - reference_->fstar) / std::abs(reference_->fstar);
    } else {
      gap = std::abs(fz - best_dual) / std::abs(best_dual);
    }
    return Check{fz, feas, gap <= eps_ && feas <= eps_};
  }

 private:
  const ProblemInstance& instance_;
  const WeightMatrix& metric_;
  double eps_;
  const std::optional<ReferencePoint>& reference_;
};

class Recorder {
 public:
  Recorder(const SolverConfig& config, const std::optional<ReferencePoint>& reference, SolverTrace& trace)
      : config_(config), reference_(reference), trace_(trace) {}

  bool wants(long k) const { return config_.record_trace && k % std::max(1L, config_.trace_stride) == 0; }

  void add(TraceRecord rec, const Vector& candidate) {
    if (reference_ && reference_->zstar) rec.dist_to_ref = (candidate - *reference_->zstar).norm();
    trace_.records.push_back(rec);
  }

 private:
  const SolverConfig& config_;
  const std::optional<ReferencePoint>& reference_;
  SolverTrace& trace_;
};

void finish(SolveResult& out, Termination termination, long iterations, const Vector& z, const DualPoint& lambda,
            double fz, double best_dual, double feas) {
  out.termination = termination;
  out.iterations = iterations;
  out.z = z;
  out.lambda = lambda;
  out.primal_value = fz;
  out.dual_value = best_dual;
  out.feasibility = feas;
}

SolveResult run_dfg(const ProblemInstance& instance, const WeightMatrix& step, const StopRule& stop,
                    const SolverConfig& config, const std::optional<ReferencePoint>& reference) {
  SolveResult out;
  Recorder rec(config, reference, out.trace);
  DfgIterator it(instance, step);
  double best = -kInf;
  for (long n = 1; n <= config.max_iters; ++n) {
    it.step();
    best = std::max(best, it.evaluation().value);
    const auto check = stop.evaluate(it.z_average(), best);
    if (rec.wants(it.k())) {
      TraceRecord r;
      r.k = it.k();
      r.dual_value = it.evaluation().value;
      if (config.evaluate_lambda_hat) r.dual_value_hat = dual_value_grad(instance, it.lambda_hat()).value;
      r.primal_value = check.primal_value;
      r.feasibility = check.feasibility;
      r.gradmap = it.gradient_map_norm();
      rec.add(r, it.z_average());
    }
    if (check.met || n == config.max_iters) {
      finish(out, check.met ? Termination::kConverged : Termination::kMaxIters, n, it.z_average(), it.lambda_hat(),
             check.primal_value, best, check.feasibility);
      return out;
    }
  }
  return out;
}

SolveResult run_dg(const ProblemInstance& instance, const WeightMatrix& step, const StopRule& stop,
                   const SolverConfig& config, const std::optional<ReferencePoint>& reference) {
  SolveResult out;
  Recorder rec(config, reference, out.trace);
  DgIterator it(instance, step);
  double best = -kInf;
  for (long n = 1; n <= config.max_iters; ++n) {
    it.step();
    best = std::max(best, it.evaluation().value);
    const auto check = stop.evaluate(it.evaluation().z, best);
    if (rec.wants(it.k())) {
      TraceRecord r;
      r.k = it.k();
      r.dual_value = it.evaluation().value;
      r.primal_value = check.primal_value;
      r.feasibility = check.feasibility;
      r.gradmap = it.step_norm();
      rec.add(r, it.evaluation().z);
    }
    if (check.met || n == config.max_iters) {
      finish(out, check.met ? Termination::kConverged : Termination::kMaxIters, n, it.evaluation().z, it.lambda(),
             check.primal_value, best, check.feasibility);
      return out;
    }
  }
  return out;
}

// Doubling rounds, each restarted from λ⁰ = 0. Inside phase 2 the candidate
// z^{k*} (running argmin) is tested after every step.
SolveResult run_hdfg(const ProblemInstance& instance, const WeightMatrix& step, const StopRule& stop,
                     const SolverConfig& config, const std::optional<ReferencePoint>& reference) {
  if (config.hdfg_phase_length < 1) throw Error(ErrorCode::kInvalidArgument, "H-DFG phase length must be >= 1");
  SolveResult out;
  Recorder rec(config, reference, out.trace);
  long used = 0;
  double best = -kInf;
  for (long k = config.hdfg_phase_length;; k *= 2) {
    HdfgIterator it(instance, step, k);
    while (!it.done()) {
      it.step();
      ++used;
      best = std::max(best, it.evaluation().value);
      const bool phase2 = it.phase() == 2;
      const Vector& candidate = phase2 ? it.z_kstar() : it.phase1().z_average();
      const auto check = stop.evaluate(candidate, best);
      if (rec.wants(used - 1)) {
        TraceRecord r;
        r.k = used - 1;
        r.phase = it.phase();
        r.dual_value = it.evaluation().value;
        r.primal_value = check.primal_value;
        r.feasibility = check.feasibility;
        r.gradmap = phase2 ? it.phase2().step_norm() : it.phase1().gradient_map_norm();
        rec.add(r, candidate);
      }
      const bool met = phase2 && check.met;
      if (met || used == config.max_iters) {
        finish(out, met ? Termination::kConverged : Termination::kMaxIters, used, candidate,
               phase2 ? it.lambda_kstar() : it.lambda(), check.primal_value, best, check.feasibility);
        return out;
      }
    }
  }
}

}  // namespace

SolveResult solve(const ProblemInstance& instance, const LipschitzProfile& profile, const SolverConfig& config,
                  const std::optional<ReferencePoint>& reference) {
  if (!(config.eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be positive");
  if (config.max_iters < 1) throw Error(ErrorCode::kInvalidArgument, "max_iters must be >= 1");
  if (config.require_reference && !reference) {
    throw Error(ErrorCode::kMissingReference, "relative suboptimality stop needs f*");
  }
  if (reference && reference->fstar == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "relative suboptimality is undefined for f* = 0");
  }
  const WeightMatrix distributed = weight_matrix(instance, profile);
  const WeightMatrix step = config.step_mode == StepMode::kDistributed ? distributed
                                                                       : step_metric(instance, profile, config.step_mode);
  const StopRule stop(instance, distributed, config.eps, reference);
  switch (config.method) {
    case Method::kDfg: return run_dfg(instance, step, stop, config, reference);
    case Method::kDg: return run_dg(instance, step, stop, config, reference);
    case Method::kHdfg: return run_hdfg(instance, step, stop, config, reference);
  }
  return {};
}

SolveResult solve(const ProblemInstance& instance, const SolverConfig& config,
                  const std::optional<ReferencePoint>& reference) {
  const bool need_global = config.step_mode == StepMode::kCentralized;
  return solve(instance, lipschitz_profile(instance, need_global), config, reference);
}

}  // namespace dualdecomp
