#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "dualdecomp/builtin.hpp"
#include "dualdecomp/certificates.hpp"
#include "dualdecomp/error.hpp"
#include "dualdecomp/oracle.hpp"
#include "dualdecomp/problem_io.hpp"
#include "dualdecomp/reference.hpp"

namespace dualdecomp::cli {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path);
  out << content;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json num(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

json reference_json(const ReferenceSolution& ref) {
  return {{"method", ref.method},
          {"fstar", num(ref.fstar)},
          {"gradmap_norm", num(ref.gradmap_norm)},
          {"primal_dual_gap", num(ref.primal_gap)},
          {"feasibility", num(ref.feasibility)},
          {"evaluations", ref.evaluations},
          {"restarts", ref.restarts},
          {"converged", ref.converged},
          {"strictly_complementary", ref.strictly_complementary}};
}

}  // namespace

LoadedProblem load_problem_source(const std::string& path, const std::optional<std::string>& config_path) {
  LoadedProblem out{ProblemInstance{}, path, "", ""};
  if (ends_with(path, ".m")) {
    const DcopfParams params = config_path ? DcopfParams::from_json(read_file(*config_path)) : DcopfParams{};
    out.instance = build_dcopf(load_matpower(path), params).instance;
    out.builder = "dcopf";
    out.builder_config = params.to_json();
  } else {
    if (config_path) throw Error(ErrorCode::kInvalidArgument, "--config applies to MATPOWER cases only");
    out.instance = load_problem(path);
    out.builder = "json";
    out.builder_config = "{}";
  }
  return out;
}

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const auto started = std::chrono::steady_clock::now();
    const LoadedProblem problem = load_problem_source(args.problem, args.config);
    const ProblemInstance& inst = problem.instance;
    const LipschitzProfile profile = lipschitz_profile(inst, args.steps == StepMode::kCentralized);
    const WeightMatrix W = weight_matrix(inst, profile);

    std::optional<ReferenceSolution> ref;
    ReferencePoint point;
    if (args.fstar == "auto") {
      ref = reference_solve(inst, W);
      point.fstar = ref->fstar;
      point.zstar = ref->zstar;
    } else {
      std::size_t used = 0;
      try {
        point.fstar = std::stod(args.fstar, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != args.fstar.size()) {
        throw Error(ErrorCode::kInvalidArgument, "--fstar expects a number or 'auto'");
      }
    }

    SolverConfig config;
    config.method = args.method;
    config.step_mode = args.steps;
    config.eps = args.eps;
    config.max_iters = args.max_iters;
    config.hdfg_phase_length = args.hdfg_k;
    config.trace_stride = args.trace_stride;
    config.record_trace = args.trace.has_value() || args.report.has_value();
    config.require_reference = true;
    const SolveResult result = solve(inst, profile, config, point);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    out << fmt::format("{} {} {}: {} after {} iterations (f = {}, feas = {})\n", problem.source,
                       to_string(args.method), to_string(args.steps), to_string(result.termination),
                       result.iterations, format_number(result.primal_value), format_number(result.feasibility));

    if (args.trace || args.report) {
      ReportContext ctx;
      ctx.method = args.method;
      ctx.fstar = point.fstar;
      ctx.sigma_f = inst.sigma_f();
      ctx.d0 = dual_value_grad(inst, inst.zero_dual()).value;
      ctx.kappa_hat = args.kappa;
      if (ref) {
        ctx.R = estimate_R(step_metric(inst, profile, args.steps), ref->lambda_star);
        ctx.R_approximate = !ref->strictly_complementary;
      } else {
        ctx.R = std::numeric_limits<double>::quiet_NaN();
        ctx.R_approximate = true;
      }
      const CertificateReport report = build_report(result.trace, ctx);
      if (args.trace) write_file(*args.trace, report_csv(report));
      if (args.report) {
        json manifest;
        manifest["problem"] = {{"source", problem.source},
                               {"builder", problem.builder},
                               {"builder_config", json::parse(problem.builder_config)}};
        manifest["config"] = {{"method", std::string(to_string(args.method))},
                              {"steps", std::string(to_string(args.steps))},
                              {"eps", args.eps},
                              {"max_iters", args.max_iters},
                              {"hdfg_k", args.hdfg_k},
                              {"trace_stride", args.trace_stride},
                              {"fstar", args.fstar},
                              {"kappa", args.kappa ? json(*args.kappa) : json(nullptr)}};
        manifest["reference"] = ref ? reference_json(*ref) : json{{"method", "user"}, {"fstar", num(point.fstar)}};
        manifest["outputs"] = {{"trace", args.trace ? json(*args.trace) : json(nullptr)},
                               {"report", *args.report}};
        manifest["wall_time_s"] = wall;
        manifest["iterations"] = result.iterations;
        json doc;
        doc["manifest"] = manifest;
        doc["result"] = {{"termination", std::string(to_string(result.termination))},
                         {"iterations", result.iterations},
                         {"primal_value", num(result.primal_value)},
                         {"dual_value", num(result.dual_value)},
                         {"feasibility", num(result.feasibility)},
                         {"z", std::vector<double>(result.z.data(), result.z.data() + result.z.size())},
                         {"lambda", std::vector<double>(result.lambda.values().data(),
                                                        result.lambda.values().data() + result.lambda.size())}};
        doc["certificates"] = json::parse(report_json(report));
        write_file(*args.report, doc.dump(2) + "\n");
      }
    }
    return result.termination == Termination::kConverged ? kExitOk : kExitMaxIters;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err) {
  if (args.cases.empty()) {
    err << "error: bench needs at least one case file\n";
    return kExitError;
  }
  struct Column {
    const char* name;
    Method method;
    StepMode steps;
  };
  const Column columns[] = {{"DFG", Method::kDfg, StepMode::kDistributed},
                            {"CFG", Method::kDfg, StepMode::kCentralized},
                            {"H-DFG", Method::kHdfg, StepMode::kDistributed},
                            {"H-CFG", Method::kHdfg, StepMode::kCentralized},
                            {"DG", Method::kDg, StepMode::kDistributed},
                            {"CG", Method::kDg, StepMode::kCentralized}};
  std::string table = "case";
  for (const Column& c : columns) table += std::string(",") + c.name;
  table += "\n";
  for (const std::string& path : args.cases) {
    std::string row = path;
    try {
      const LoadedProblem problem = load_problem_source(path, args.config);
      const LipschitzProfile profile = lipschitz_profile(problem.instance, true);
      const ReferenceSolution ref = reference_solve(problem.instance, weight_matrix(problem.instance, profile));
      const ReferencePoint point{ref.fstar, std::nullopt};
      for (const Column& c : columns) {
        SolverConfig config;
        config.method = c.method;
        config.step_mode = c.steps;
        config.eps = args.eps;
        config.max_iters = args.max_iters;
        config.record_trace = false;
        try {
          const SolveResult r = solve(problem.instance, profile, config, point);
          row += r.termination == Termination::kConverged ? fmt::format(",{}", r.iterations) : std::string(",*");
        } catch (const std::exception& e) {
          err << path << " " << c.name << ": " << e.what() << "\n";
          row += ",error";
        }
      }
    } catch (const std::exception& e) {
      err << path << ": " << e.what() << "\n";
      for (std::size_t k = 0; k < std::size(columns); ++k) row += ",error";
    }
    table += row + "\n";
    err << row << "\n";
  }
  try {
    if (args.out) write_file(*args.out, table);
    else out << table;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  try {
    std::vector<std::pair<std::string, ProblemInstance>> targets;
    if (args.builtin) {
      for (auto& named : builtin::all()) targets.emplace_back(named.name, std::move(named.instance));
    }
    if (args.problem) {
      targets.emplace_back(*args.problem, load_problem_source(*args.problem, args.config).instance);
    }
    if (targets.empty()) {
      err << "error: verify needs a problem file or --builtin\n";
      return kExitError;
    }
    SuiteOptions options;
    options.dfg_iterations = args.iterations;
    options.dg_iterations = args.iterations;
    options.corrupt_w = args.corrupt_w;
    bool all_ok = true;
    for (const auto& [name, instance] : targets) {
      for (const Check& c : run_invariant_suite(instance, options)) {
        out << (c.ok ? "ok   " : "FAIL ") << name << " " << c.name;
        if (!c.detail.empty()) out << " (" << c.detail << ")";
        out << "\n";
        all_ok = all_ok && c.ok;
      }
    }
    return all_ok ? kExitOk : kExitCertificateViolation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_build(const BuildArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const LoadedProblem problem = load_problem_source(args.input, args.config);
    const std::string text = problem_to_json(problem.instance);
    if (args.out) write_file(*args.out, text);
    else out << text;
    const ProblemInstance& inst = problem.instance;
    err << fmt::format("n = {}, p = {}, q = {}, agents = {}, blocks = {}\n", inst.n(), inst.p(), inst.q(),
                       inst.num_agents(), inst.num_blocks());
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Distributed dual (fast) gradient solvers with convergence certificates"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  std::string method = "dfg";
  std::string steps = "distributed";
  auto* solve_cmd = app.add_subcommand("solve", "Solve one problem and optionally write a certificate trace");
  solve_cmd->add_option("problem", solve_args.problem, "MATPOWER .m case or JSON problem")->required();
  solve_cmd->add_option("--config", solve_args.config, "DC-OPF builder config (JSON)");
  solve_cmd->add_option("--method", method, "dfg, hdfg or dg")->check(CLI::IsMember({"dfg", "hdfg", "dg"}));
  solve_cmd->add_option("--steps", steps, "distributed or centralized")
      ->check(CLI::IsMember({"distributed", "centralized"}));
  solve_cmd->add_option("--eps", solve_args.eps, "accuracy of the stopping rule");
  solve_cmd->add_option("--max-iters", solve_args.max_iters, "oracle evaluation budget");
  solve_cmd->add_option("--hdfg-k", solve_args.hdfg_k, "first H-DFG phase length (doubled each round)");
  solve_cmd->add_option("--stride", solve_args.trace_stride, "record every n-th iteration");
  solve_cmd->add_option("--fstar", solve_args.fstar, "optimal value, or 'auto' for a reference solve");
  solve_cmd->add_option("--kappa", solve_args.kappa, "error-bound constant for the DG bounds");
  solve_cmd->add_option("--trace", solve_args.trace, "per-iteration CSV");
  solve_cmd->add_option("--report", solve_args.report, "JSON report with run manifest");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Iteration counts of all six method/step combinations");
  bench_cmd->add_option("cases", bench_args.cases, "MATPOWER case files");
  bench_cmd->add_option("--config", bench_args.config, "DC-OPF builder config (JSON)");
  bench_cmd->add_option("--eps", bench_args.eps, "accuracy of the stopping rule");
  bench_cmd->add_option("--max-iters", bench_args.max_iters, "evaluation budget per run ('*' when exceeded)");
  bench_cmd->add_option("--out", bench_args.out, "CSV output (stdout when omitted)");

  VerifyArgs verify_args;
  auto* verify_cmd = app.add_subcommand("verify", "Check the convergence certificates and lemmas numerically");
  verify_cmd->add_option("problem", verify_args.problem, "MATPOWER .m case or JSON problem");
  verify_cmd->add_option("--config", verify_args.config, "DC-OPF builder config (JSON)");
  verify_cmd->add_flag("--builtin", verify_args.builtin, "run the built-in analytic instances");
  verify_cmd->add_flag("--corrupt-w", verify_args.corrupt_w, "debug: shrink one block weight to provoke failures");
  verify_cmd->add_option("--iters", verify_args.iterations, "iterations of the DFG and DG runs");

  BuildArgs build_args;
  auto* build_cmd = app.add_subcommand("build", "Convert a MATPOWER case to the JSON problem format");
  build_cmd->add_option("input", build_args.input, "MATPOWER .m case")->required();
  build_cmd->add_option("--config", build_args.config, "DC-OPF builder config (JSON)");
  build_cmd->add_option("--out", build_args.out, "output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  if (*solve_cmd) {
    solve_args.method = parse_method(method);
    solve_args.steps = parse_step_mode(steps);
    return cmd_solve(solve_args, std::cout, std::cerr);
  }
  if (*bench_cmd) return cmd_bench(bench_args, std::cout, std::cerr);
  if (*verify_cmd) return cmd_verify(verify_args, std::cout, std::cerr);
  if (*build_cmd) return cmd_build(build_args, std::cout, std::cerr);
  return kExitError;
}

}  // namespace dualdecomp::cli
