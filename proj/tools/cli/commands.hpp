#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dualdecomp/algorithms.hpp"
#include "dualdecomp/apps.hpp"
#include "dualdecomp/model.hpp"

namespace dualdecomp::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitMaxIters = 2;
inline constexpr int kExitCertificateViolation = 3;

/// A problem read from disk: MATPOWER `.m` files go through the DC-OPF
/// builder, anything else is read as the JSON problem format.
struct LoadedProblem {
  ProblemInstance instance;
  std::string source;
  std::string builder;         ///< "dcopf" or "json"
  std::string builder_config;  ///< JSON echo of the builder parameters
};

LoadedProblem load_problem_source(const std::string& path, const std::optional<std::string>& config_path);

struct SolveArgs {
  std::string problem;
  std::optional<std::string> config;
  Method method = Method::kDfg;
  StepMode steps = StepMode::kDistributed;
  double eps = 0.01;
  long max_iters = 300000;
  long hdfg_k = 1;
  long trace_stride = 1;
  std::string fstar = "auto";  ///< a number or "auto"
  std::optional<double> kappa;
  std::optional<std::string> trace;
  std::optional<std::string> report;
};

struct BenchArgs {
  std::vector<std::string> cases;
  std::optional<std::string> config;
  double eps = 0.01;
  long max_iters = 300000;
  std::optional<std::string> out;
};

struct VerifyArgs {
  std::optional<std::string> problem;
  std::optional<std::string> config;
  bool builtin = false;
  bool corrupt_w = false;
  long iterations = 2000;
};

struct BuildArgs {
  std::string input;
  std::optional<std::string> config;
  std::optional<std::string> out;
};

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);
int cmd_build(const BuildArgs& args, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches.
int run(int argc, char** argv);

// Invariant suite shared by `verify`.
struct Check {
  std::string name;
  bool ok = true;
  std::string detail;
};

struct SuiteOptions {
  long dfg_iterations = 2000;
  std::vector<long> hdfg_lengths{8, 32, 128};
  long dg_iterations = 2000;
  int samples = 200;
  long equivalence_rounds = 100;
  bool corrupt_w = false;
};

std::vector<Check> run_invariant_suite(const ProblemInstance& instance, const SuiteOptions& options);

}  // namespace dualdecomp::cli
