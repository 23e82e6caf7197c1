#include <string>

#include <benchmark/benchmark.h>

#include "dualdecomp/algorithms.hpp"
#include "dualdecomp/apps.hpp"
#include "dualdecomp/oracle.hpp"
#include "dualdecomp/simnet.hpp"

using namespace dualdecomp;

namespace {

const char* const kCases[] = {"case9.m", "case30.m", "case118.m"};

const ProblemInstance& instance(int which) {
  static const ProblemInstance cached[] = {
      build_dcopf(load_matpower(std::string(DUALDECOMP_DATA_DIR) + "/cases/" + kCases[0])).instance,
      build_dcopf(load_matpower(std::string(DUALDECOMP_DATA_DIR) + "/cases/" + kCases[1])).instance,
      build_dcopf(load_matpower(std::string(DUALDECOMP_DATA_DIR) + "/cases/" + kCases[2])).instance,
  };
  return cached[which];
}

void BM_DualValueGrad(benchmark::State& state) {
  const ProblemInstance& inst = instance(static_cast<int>(state.range(0)));
  DualPoint lambda = inst.zero_dual();
  for (Index t = 0; t < lambda.size(); ++t) lambda.values()[t] = 0.01 * static_cast<double>(t % 7);
  for (auto _ : state) benchmark::DoNotOptimize(dual_value_grad(inst, lambda));
  state.SetLabel(kCases[state.range(0)]);
}

void BM_DfgStep(benchmark::State& state) {
  const ProblemInstance& inst = instance(static_cast<int>(state.range(0)));
  DfgIterator it(inst, weight_matrix(inst, lipschitz_profile(inst, false)));
  for (auto _ : state) {
    it.step();
    benchmark::DoNotOptimize(it.z_average().data());
  }
  state.SetLabel(kCases[state.range(0)]);
}

void BM_DgStep(benchmark::State& state) {
  const ProblemInstance& inst = instance(static_cast<int>(state.range(0)));
  DgIterator it(inst, weight_matrix(inst, lipschitz_profile(inst, false)));
  for (auto _ : state) {
    it.step();
    benchmark::DoNotOptimize(it.lambda().values().data());
  }
  state.SetLabel(kCases[state.range(0)]);
}

// One primal half-round plus one dual half-round of the message-passing simulator.
void BM_SimnetIteration(benchmark::State& state) {
  const ProblemInstance& inst = instance(static_cast<int>(state.range(0)));
  Network net(inst, weight_matrix(inst, lipschitz_profile(inst, false)).block);
  for (auto _ : state) {
    net.run_round(RoundKind::kPrimal);
    net.run_round(RoundKind::kDualGradient);
  }
  state.SetLabel(kCases[state.range(0)]);
}

void BM_LipschitzProfile(benchmark::State& state) {
  const ProblemInstance& inst = instance(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lipschitz_profile(inst, true));
  state.SetLabel(kCases[state.range(0)]);
}

}  // namespace

BENCHMARK(BM_DualValueGrad)->DenseRange(0, 2);
BENCHMARK(BM_DfgStep)->DenseRange(0, 2);
BENCHMARK(BM_DgStep)->DenseRange(0, 2);
BENCHMARK(BM_SimnetIteration)->DenseRange(0, 2);
BENCHMARK(BM_LipschitzProfile)->DenseRange(0, 2);

BENCHMARK_MAIN();
