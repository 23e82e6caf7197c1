#include <gtest/gtest.h>

#include "dualdecomp/algorithms.hpp"
#include "dualdecomp/apps.hpp"
#include "dualdecomp/builtin.hpp"
#include "dualdecomp/certificates.hpp"
#include "dualdecomp/error.hpp"
#include "dualdecomp/reference.hpp"
#include "support.hpp"

using namespace dualdecomp;

namespace {

WeightMatrix distributed_W(const ProblemInstance& inst) { return weight_matrix(inst, lipschitz_profile(inst, false)); }

}  // namespace

TEST(Dfg, FirstStepOnScalarInstance) {
  const ProblemInstance inst = builtin::scalar_equality();
  DfgIterator it(inst, distributed_W(inst));
  it.step();
  EXPECT_EQ(it.k(), 0);
  EXPECT_DOUBLE_EQ(it.evaluation().gradient[0], -1.0);
  EXPECT_DOUBLE_EQ(it.lambda_hat().nu()[0], -1.0);
  EXPECT_DOUBLE_EQ(dual_value_grad(inst, it.lambda_hat()).value, 0.5);
  // λ¹ = (1/3)λ̂⁰ + (2/3)·W⁻¹S⁰ with S⁰ = −½, so λ¹ = −2/3 and z¹ = 2/3.
  EXPECT_NEAR(it.next_lambda().nu()[0], -2.0 / 3.0, 1e-15);
  it.step();
  EXPECT_NEAR(it.evaluation().z[0], 2.0 / 3.0, 1e-15);
  // ẑ¹ = (1/3)·z⁰ + (2/3)·z¹ = 4/9.
  EXPECT_NEAR(it.z_average()[0], 4.0 / 9.0, 1e-15);
}

TEST(Dfg, AveragingWeightsMatchClosedForm) {
  const ProblemInstance inst = testsupport::random_instance(11, {5, 4, true});
  DfgIterator it(inst, distributed_W(inst));
  std::vector<Vector> zs;
  for (long k = 0; k < 12; ++k) {
    it.step();
    zs.push_back(it.evaluation().z);
    Vector expected = Vector::Zero(inst.n());
    const double denom = static_cast<double>((k + 1) * (k + 2));
    for (long s = 0; s <= k; ++s) expected += 2.0 * static_cast<double>(s + 1) / denom * zs[static_cast<std::size_t>(s)];
    EXPECT_LE((it.z_average() - expected).lpNorm<Eigen::Infinity>(), 1e-13) << "k = " << k;
  }
}

TEST(Dfg, IteratesStayInDualCone) {
  const ProblemInstance inst = testsupport::random_instance(12, {5, 4, true});
  DfgIterator it(inst, distributed_W(inst));
  for (int k = 0; k < 200; ++k) {
    it.step();
    EXPECT_GE(it.next_lambda().mu().minCoeff(), 0.0);
    EXPECT_GE(it.lambda_hat().mu().minCoeff(), 0.0);
  }
}

TEST(Hdfg, ArgminPrefersEarliestIndex) {
  EXPECT_EQ(argmin_first({4.0, 1.0, 2.0}), 1u);
  EXPECT_EQ(argmin_first({3.0, 1.0, 1.0}), 1u);
  EXPECT_EQ(argmin_first({0.0}), 0u);
}

TEST(Hdfg, RunStructure) {
  const ProblemInstance inst = testsupport::random_instance(5, {5, 4, true});
  const WeightMatrix W = distributed_W(inst);
  for (long k : {1L, 4L, 9L}) {
    const HdfgResult h = hdfg_run(inst, W, k);
    EXPECT_EQ(h.evaluations, 2 * k + 2);
    ASSERT_EQ(h.phase2_sq_norms.size(), static_cast<std::size_t>(k + 1));
    ASSERT_EQ(h.phase2_dual_values.size(), static_cast<std::size_t>(k + 1));
    EXPECT_EQ(h.kstar, k + static_cast<long>(argmin_first(h.phase2_sq_norms)));
    EXPECT_EQ(h.d_lambda_hat_k, h.phase2_dual_values.front());
    EXPECT_EQ(h.d_kstar, h.phase2_dual_values[static_cast<std::size_t>(h.kstar - k)]);

    // Phase 1 is exactly k+1 accelerated evaluations.
    DfgIterator dfg(inst, W);
    for (long j = 0; j <= k; ++j) dfg.step();
    EXPECT_EQ(h.lambda_hat_k.values(), dfg.lambda_hat().values());

    // Phase-2 ascent: d(λ^{j+1}) ≥ d(λ^j) + ½‖λ^j − λ^{j+1}‖²_W.
    for (std::size_t j = 0; j + 1 < h.phase2_dual_values.size(); ++j) {
      EXPECT_GE(h.phase2_dual_values[j + 1] - h.phase2_dual_values[j] - 0.5 * h.phase2_sq_norms[j],
                -1e-10 * (1.0 + std::abs(h.phase2_dual_values[j])));
    }
  }
}

TEST(Hdfg, IteratorAgreesWithRun) {
  const ProblemInstance inst = testsupport::random_instance(6, {4, 3, true});
  const WeightMatrix W = distributed_W(inst);
  const long k = 6;
  HdfgIterator it(inst, W, k);
  while (!it.done()) it.step();
  const HdfgResult h = hdfg_run(inst, W, k);
  EXPECT_EQ(it.kstar(), h.kstar);
  EXPECT_EQ(it.z_kstar(), h.z_kstar);
  EXPECT_EQ(it.lambda_kstar().values(), h.lambda_kstar.values());
}

TEST(Dg, FirstStepReachesInequalityOptimum) {
  const ProblemInstance inst = builtin::scalar_inequality();
  DgIterator it(inst, distributed_W(inst));
  it.step();
  EXPECT_DOUBLE_EQ(it.next_lambda().mu()[0], 1.0);
}

TEST(Dg, AscentAndGradientMapIdentity) {
  const ProblemInstance inst = testsupport::random_instance(21, {5, 4, true});
  const WeightMatrix W = distributed_W(inst);
  DgIterator it(inst, W);
  double previous = -kInf;
  for (int k = 0; k < 300; ++k) {
    it.step();
    const double d = it.evaluation().value;
    EXPECT_GE(d, previous - 1e-12 * (1.0 + std::abs(d)));
    previous = d + 0.5 * it.step_norm() * it.step_norm();
    EXPECT_NEAR(W.norm(gradient_map(inst, W, it.lambda())), it.step_norm(), 1e-12 * (1.0 + it.step_norm()));
  }
}

TEST(Solve, ScalarInstanceConvergesQuickly) {
  const ProblemInstance inst = builtin::scalar_equality();
  SolverConfig config;
  config.method = Method::kDfg;
  const SolveResult r = solve(inst, config, ReferencePoint{0.5, std::nullopt});
  EXPECT_EQ(r.termination, Termination::kConverged);
  // Hand iteration of the averaged point ẑ^k = Σ 2(s+1)/((k+1)(k+2)) z^s gives
  // ẑ^27 = 1 − 1/203, the first iterate with |ẑ − 1| <= 0.01.
  EXPECT_EQ(r.iterations, 28);
}

TEST(Solve, EveryMethodSolvesTheBuiltinInstances) {
  for (const auto& named : builtin::all()) {
    const ReferenceSolution ref = reference_solve(named.instance);
    ASSERT_TRUE(ref.converged) << named.name;
    for (Method m : {Method::kDfg, Method::kHdfg, Method::kDg}) {
      for (StepMode s : {StepMode::kDistributed, StepMode::kCentralized}) {
        SolverConfig config;
        config.method = m;
        config.step_mode = s;
        config.record_trace = false;
        const SolveResult r = solve(named.instance, config, ReferencePoint{ref.fstar, ref.zstar});
        EXPECT_EQ(r.termination, Termination::kConverged) << named.name << " " << to_string(m) << " " << to_string(s);
        EXPECT_LE(std::abs(r.primal_value - ref.fstar), 0.01 * std::abs(ref.fstar) * (1.0 + 1e-12));
      }
    }
  }
}

TEST(Solve, ReferenceIsRequiredWhenAsked) {
  const ProblemInstance inst = builtin::scalar_equality();
  SolverConfig config;
  config.require_reference = true;
  try {
    solve(inst, config, std::nullopt);
    FAIL() << "expected MissingReference";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingReference);
  }
  EXPECT_THROW(solve(inst, SolverConfig{}, ReferencePoint{0.0, std::nullopt}), Error);
}

TEST(Solve, DualityGapStopWithoutReference) {
  const ProblemInstance inst = builtin::num_two_source();
  SolverConfig config;
  const SolveResult r = solve(inst, config, std::nullopt);
  EXPECT_EQ(r.termination, Termination::kConverged);
  EXPECT_LE(std::abs(r.primal_value - r.dual_value), 0.01 * std::abs(r.dual_value));
}

TEST(Solve, MaxItersIsReported) {
  const ProblemInstance inst = build_dcopf(load_matpower(testsupport::data_path("cases/case9.m"))).instance;
  SolverConfig config;
  config.method = Method::kDg;
  config.max_iters = 10;
  config.eps = 1e-9;
  const SolveResult r = solve(inst, config, ReferencePoint{1.2295614048592463, std::nullopt});
  EXPECT_EQ(r.termination, Termination::kMaxIters);
  EXPECT_EQ(r.iterations, 10);
}

TEST(Solve, RunsAreDeterministicAndStrideIsHonoured) {
  const ProblemInstance inst = testsupport::random_instance(31, {5, 4, true});
  const ReferenceSolution ref = reference_solve(inst);
  SolverConfig config;
  config.trace_stride = 7;
  config.eps = 1e-4;
  const SolveResult a = solve(inst, config, ReferencePoint{ref.fstar, ref.zstar});
  const SolveResult b = solve(inst, config, ReferencePoint{ref.fstar, ref.zstar});
  ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
  for (std::size_t t = 0; t < a.trace.records.size(); ++t) {
    EXPECT_EQ(a.trace.records[t].k % 7, 0);
    EXPECT_EQ(a.trace.records[t].dual_value, b.trace.records[t].dual_value);
    EXPECT_EQ(a.trace.records[t].primal_value, b.trace.records[t].primal_value);
  }
  EXPECT_EQ(a.z, b.z);
}

TEST(Solve, CentralizedRunsMeasureFeasibilityInDistributedMetric) {
  const ProblemInstance inst = testsupport::random_instance(41, {5, 4, true});
  const ReferenceSolution ref = reference_solve(inst);
  SolverConfig config;
  config.step_mode = StepMode::kCentralized;
  config.eps = 1e-3;
  const SolveResult r = solve(inst, config, ReferencePoint{ref.fstar, ref.zstar});
  EXPECT_NEAR(r.feasibility, feasibility_violation(inst, distributed_W(inst), r.z), 1e-15);
}

TEST(Solve, Case9DfgIterationWindow) {
  const ProblemInstance inst = build_dcopf(load_matpower(testsupport::data_path("cases/case9.m"))).instance;
  const ReferenceSolution ref = reference_solve(inst);
  SolverConfig config;
  config.record_trace = false;
  const SolveResult r = solve(inst, config, ReferencePoint{ref.fstar, ref.zstar});
  EXPECT_EQ(r.termination, Termination::kConverged);
  EXPECT_GE(r.iterations, 900);
  EXPECT_LE(r.iterations, 22500);
}
