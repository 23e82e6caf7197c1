// Numerical checks of the lemmas and convergence certificates on one instance.
// Every check is an inequality evaluated along an actual run (or on random dual
// samples) with a small slack for floating-point error.

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "commands.hpp"
#include "dualdecomp/certificates.hpp"
#include "dualdecomp/oracle.hpp"
#include "dualdecomp/reference.hpp"
#include "dualdecomp/simnet.hpp"

namespace dualdecomp::cli {

namespace {

// Slack for value inequalities: kValueSlack·(1 + |scale|).
constexpr double kValueSlack = 1e-9;
// Slack for norm inequalities: relative plus a tiny absolute floor.
constexpr double kNormSlack = 1e-9;
constexpr double kNormFloor = 1e-12;
// Weight shrink used by --corrupt-w.
constexpr double kCorruptShrink = 1e-3;

struct Tally {
  std::string name;
  long checked = 0;
  long violated = 0;
  double worst = -std::numeric_limits<double>::infinity();  // largest lhs - rhs
  long worst_at = -1;

  void add(double lhs, double rhs, double slack, long at) {
    ++checked;
    const double excess = lhs - rhs;
    if (excess > worst) {
      worst = excess;
      worst_at = at;
    }
    if (excess > slack) ++violated;
  }

  Check finish() const {
    Check c{name, violated == 0 && checked > 0, ""};
    c.detail = fmt::format("{} checked, {} violated, worst excess {:.3g} at {}", checked, violated, worst, worst_at);
    return c;
  }
};

double value_slack(double scale) { return kValueSlack * (1.0 + std::abs(scale)); }
double norm_slack(double bound) { return kNormSlack * std::abs(bound) + kNormFloor; }

// Σ (a_t − b_t)·x_t over coordinates where x_t ≠ 0, so that rows with an
// infinite right-hand side (and therefore zero multipliers) drop out.
double masked_difference_dot(const Vector& a, const Vector& b, const Vector& x) {
  double s = 0.0;
  for (Index t = 0; t < x.size(); ++t) {
    if (x[t] != 0.0) s += (a[t] - b[t]) * x[t];
  }
  return s;
}

WeightMatrix corrupted(const ProblemInstance& inst, WeightMatrix W) {
  const int j = 0;
  W.block[j] *= kCorruptShrink;
  for (Index t = 0; t < inst.eq_rows(j); ++t) W.diag[inst.eq_offset(j) + t] *= kCorruptShrink;
  for (Index t = 0; t < inst.ineq_rows(j); ++t) W.diag[inst.p() + inst.ineq_offset(j) + t] *= kCorruptShrink;
  return W;
}

std::vector<DualPoint> dual_samples(const ProblemInstance& inst, const DualPoint& center, int count) {
  std::mt19937_64 rng(20140521);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> exponent(-3.0, 0.0);
  const Vector c = inst.coupling().c;
  const double scale = 1.0 + center.values().cwiseAbs().maxCoeff();
  std::vector<DualPoint> out;
  out.reserve(count);
  for (int s = 0; s < count; ++s) {
    DualPoint lambda = center;
    const double radius = scale * std::pow(10.0, exponent(rng));
    for (Index t = 0; t < lambda.size(); ++t) lambda.values()[t] += radius * normal(rng);
    project_dual_inplace(lambda.values(), inst.p());
    for (Index t = 0; t < c.size(); ++t) {
      if (std::isinf(c[t])) lambda.values()[inst.p() + t] = 0.0;
    }
    out.push_back(std::move(lambda));
  }
  return out;
}

}  // namespace

std::vector<Check> run_invariant_suite(const ProblemInstance& inst, const SuiteOptions& options) {
  std::vector<Check> checks;
  const LipschitzProfile profile = lipschitz_profile(inst, true);
  const WeightMatrix clean = weight_matrix(inst, profile);
  const WeightMatrix W = options.corrupt_w ? corrupted(inst, clean) : clean;

  const ReferenceSolution ref = reference_solve(inst, clean);
  const double fstar = ref.fstar;
  const Vector& zstar = ref.zstar;
  const double R = estimate_R(W, ref.lambda_star);
  const double sigma = inst.sigma_f();
  checks.push_back({"reference", ref.converged,
                    fmt::format("f* = {}, gradmap {:.3g}, R = {:.6g}{}", format_number(fstar), ref.gradmap_norm, R,
                                ref.strictly_complementary ? "" : " (lower estimate)")});

  // Descent lemma and concavity, the primal distance bound and the gradient / gradient-map
  // inequality on random pairs of dual points.
  {
    Tally descent{"dual.descent"};
    Tally concave{"dual.concavity"};
    Tally distance{"dual.primal_distance"};
    Tally gradmap{"lemma.gradient_vs_gradient_map"};
    const auto samples = dual_samples(inst, ref.lambda_star, options.samples);
    std::vector<DualEvaluation> evals;
    evals.reserve(samples.size());
    for (const DualPoint& s : samples) evals.push_back(dual_value_grad(inst, s));
    for (std::size_t s = 0; s + 1 < samples.size(); s += 2) {
      const Vector delta = samples[s].values() - samples[s + 1].values();
      const DualEvaluation& a = evals[s];
      const DualEvaluation& b = evals[s + 1];
      const double linear = b.value + safe_dot(b.gradient, delta);
      const double quad = 0.5 * std::pow(W.norm(delta), 2);
      descent.add(linear - quad, a.value, value_slack(a.value) + kValueSlack * quad, static_cast<long>(s));
      concave.add(a.value, linear, value_slack(a.value), static_cast<long>(s));

      const double lhs = masked_difference_dot(b.gradient, a.gradient, delta);
      const Vector gm = gradient_map(inst, W, samples[s]) - gradient_map(inst, W, samples[s + 1]);
      const double rhs = 2.0 * W.norm(gm) * W.norm(delta);
      gradmap.add(lhs, rhs, norm_slack(rhs) + value_slack(0.0), static_cast<long>(s));
    }
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const double lhs = 0.5 * sigma * (evals[s].z - zstar).squaredNorm();
      distance.add(lhs, fstar - evals[s].value, value_slack(fstar), static_cast<long>(s));
    }
    for (const Tally* t : {&descent, &concave, &distance, &gradmap}) checks.push_back(t->finish());
  }

  // Averaged primal point of the fast scheme.
  {
    Tally dual{"dfg.dual_gap"};
    Tally feas{"dfg.feasibility"};
    Tally lower{"dfg.primal_lower"};
    Tally upper{"dfg.primal_upper"};
    Tally dist{"dfg.distance"};
    DfgIterator it(inst, W);
    for (long k = 0; k < options.dfg_iterations; ++k) {
      it.step();
      BoundInputs in;
      in.k = k;
      in.R = R;
      in.sigma_f = sigma;
      const TheoremBounds b = theoretical_bounds(in);
      const double d_hat = dual_value_grad(inst, it.lambda_hat()).value;
      const Vector& zh = it.z_average();
      const double f = inst.objective_value(zh);
      const double fv = feasibility_violation(inst, W, zh);
      dual.add(fstar - d_hat, b.dfg_dual, value_slack(fstar), k);
      feas.add(fv, b.dfg_feasibility, norm_slack(b.dfg_feasibility), k);
      lower.add(b.dfg_primal_lower, f - fstar, value_slack(fstar), k);
      upper.add(f, d_hat, value_slack(fstar), k);
      const double bd = b.dfg_distance;
      dist.add((zh - zstar).norm(), bd, norm_slack(bd) + std::sqrt(value_slack(fstar) / sigma), k);
    }
    for (const Tally* t : {&dual, &feas, &lower, &upper, &dist}) checks.push_back(t->finish());
  }

  // Last iterate of the hybrid scheme for a few phase lengths.
  {
    Tally ascent{"hdfg.phase2_ascent"};
    Tally dual{"hdfg.dual_gap"};
    Tally direction{"hdfg.feasibility_vs_step"};
    Tally feas{"hdfg.feasibility"};
    Tally lower{"hdfg.primal_lower"};
    Tally dist{"hdfg.distance"};
    for (long k : options.hdfg_lengths) {
      const HdfgResult h = hdfg_run(inst, W, k);
      for (std::size_t j = 0; j + 1 < h.phase2_dual_values.size(); ++j) {
        const double gain = h.phase2_dual_values[j + 1] - h.phase2_dual_values[j];
        ascent.add(0.5 * h.phase2_sq_norms[j], gain, value_slack(h.phase2_dual_values[j]), k);
      }
      BoundInputs in;
      in.k = k;
      in.R = R;
      in.sigma_f = sigma;
      const TheoremBounds b = theoretical_bounds(in);
      const double f = inst.objective_value(h.z_kstar);
      const double fv = feasibility_violation(inst, W, h.z_kstar);
      const double step = std::sqrt(h.phase2_sq_norms[static_cast<std::size_t>(h.kstar - k)]);
      dual.add(fstar - h.d_kstar, b.hdfg_dual, value_slack(fstar), k);
      direction.add(fv, step, norm_slack(step), k);
      feas.add(fv, b.hdfg_feasibility, norm_slack(b.hdfg_feasibility), k);
      lower.add(b.hdfg_primal_lower, f - fstar, value_slack(fstar), k);
      dist.add((h.z_kstar - zstar).norm(), b.hdfg_distance,
               norm_slack(b.hdfg_distance) + std::sqrt(value_slack(fstar) / sigma), k);
    }
    for (const Tally* t : {&ascent, &dual, &direction, &feas, &lower, &dist}) checks.push_back(t->finish());
  }

  // Plain gradient scheme: ascent, gradient map identity and the linear-rate
  // certificates with κ measured along the run.
  {
    Tally ascent{"dg.ascent"};
    Tally identity{"dg.gradient_map_equals_step"};
    Tally dual{"dg.dual_contraction"};
    Tally feas{"dg.feasibility"};
    Tally lower{"dg.primal_lower"};
    Tally dist{"dg.distance"};

    struct Sample {
      double d;
      double fv;
      double f;
      double dist;
    };
    std::vector<Sample> run;
    run.reserve(static_cast<std::size_t>(options.dg_iterations));
    const double d0 = dual_value_grad(inst, inst.zero_dual()).value;
    const double lambda_floor = 1e-8 * (1.0 + W.norm(ref.lambda_star.values()));
    double kappa = 0.0;
    DgIterator it(inst, W);
    double previous = -std::numeric_limits<double>::infinity();
    for (long k = 0; k < options.dg_iterations; ++k) {
      it.step();
      const DualEvaluation& e = it.evaluation();
      if (k > 0) ascent.add(previous, e.value, value_slack(e.value), k);
      previous = e.value + 0.5 * it.step_norm() * it.step_norm();
      if (k % 97 == 0) {
        const double gm = W.norm(gradient_map(inst, W, it.lambda()));
        identity.add(std::abs(gm - it.step_norm()), 0.0, norm_slack(gm), k);
      }
      if (it.step_norm() > lambda_floor) {
        kappa = std::max(kappa, W.norm(it.lambda().values() - ref.lambda_star.values()) / it.step_norm());
      }
      run.push_back({e.value, feasibility_violation(inst, W, e.z), inst.objective_value(e.z), (e.z - zstar).norm()});
    }
    BoundInputs in;
    in.R = R;
    in.sigma_f = sigma;
    in.d0 = d0;
    in.fstar = fstar;
    in.kappa = kappa;
    for (long k = 0; k + 1 < static_cast<long>(run.size()); ++k) {
      in.k = k;
      const TheoremBounds b = theoretical_bounds(in);
      const Sample& s = run[static_cast<std::size_t>(k)];
      dual.add(fstar - run[static_cast<std::size_t>(k + 1)].d, *b.dg_dual, value_slack(fstar), k);
      if (k >= 1) {
        feas.add(s.fv, *b.dg_feasibility, norm_slack(*b.dg_feasibility) + std::sqrt(2.0 * value_slack(fstar)), k);
        lower.add(*b.dg_primal_lower, s.f - fstar, value_slack(fstar), k);
      }
      dist.add(s.dist, *b.dg_distance, norm_slack(*b.dg_distance) + std::sqrt(2.0 * value_slack(fstar) / sigma), k);
    }
    for (Tally* t : {&dual, &feas, &lower, &dist}) t->name += fmt::format(" [kappa {:.4g}]", kappa);
    for (const Tally* t : {&ascent, &identity, &dual, &feas, &lower, &dist}) checks.push_back(t->finish());
  }

  // Message-passing simulator against the centralized iterators.
  {
    struct Case {
      Method method;
      StepMode steps;
    };
    for (const Case& c : {Case{Method::kDfg, StepMode::kDistributed}, Case{Method::kDfg, StepMode::kCentralized},
                          Case{Method::kHdfg, StepMode::kDistributed}, Case{Method::kDg, StepMode::kDistributed}}) {
      EquivalenceOptions eo;
      eo.method = c.method;
      eo.step_mode = c.steps;
      eo.iterations = options.equivalence_rounds;
      if (options.corrupt_w) eo.corrupt_block = 0;
      const EquivalenceReport rep = verify_equivalence(inst, profile, eo);
      Check check{fmt::format("simnet.{}.{}", to_string(c.method), to_string(c.steps)), rep.pass && rep.locality_ok,
                  fmt::format("max deviation lambda {:.3g} z {:.3g}", rep.max_lambda_deviation, rep.max_z_deviation)};
      if (rep.first_divergent_iteration) check.detail += fmt::format(", diverges at {}", *rep.first_divergent_iteration);
      checks.push_back(std::move(check));
    }
  }
  return checks;
}

}  // namespace dualdecomp::cli
