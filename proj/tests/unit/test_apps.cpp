#include <random>

#include <gtest/gtest.h>

#include "dualdecomp/apps.hpp"
#include "dualdecomp/builtin.hpp"
#include "dualdecomp/error.hpp"
#include "dualdecomp/oracle.hpp"
#include "dualdecomp/reference.hpp"
#include "support.hpp"

using namespace dualdecomp;

namespace {

template <class Fn>
ErrorCode error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

const char* kTinyCase = R"(function mpc = tiny
mpc.version = '2';
mpc.baseMVA = 100;
% bus_i type Pd Qd
mpc.bus = [
  1 3 0 0;
  2 1 50 0;
];
mpc.gen = [
  1 0 0 0 0 1 100 1 200 0;
];
mpc.branch = [
  1 2 0.01 0.5 0 60 0 0;
];
)";

struct TableRow {
  const char* file;
  std::size_t buses, generators, branches;
  Index n, p, q;
};

// Published counts (buses, generators, branches, n, p, q) for the IEEE cases in data/cases.
const TableRow kPublishedSizes[] = {
    {"case9.m", 9, 3, 9, 12, 9, 18},       {"case14.m", 14, 5, 20, 19, 14, 40},
    {"case30.m", 30, 6, 41, 36, 30, 82},   {"case39.m", 39, 10, 46, 49, 39, 92},
    {"case57.m", 57, 7, 80, 64, 57, 160},  {"case118.m", 118, 54, 186, 172, 118, 372},
};

}  // namespace

TEST(Matpower, TinyCaseInPerUnit) {
  const PowerSystemCase grid = parse_matpower(kTinyCase);
  EXPECT_EQ(grid.name, "tiny");
  ASSERT_EQ(grid.buses.size(), 2u);
  EXPECT_DOUBLE_EQ(grid.buses[1].load, 0.5);
  ASSERT_EQ(grid.generators.size(), 1u);
  EXPECT_DOUBLE_EQ(grid.generators[0].pmax, 2.0);
  ASSERT_EQ(grid.branches.size(), 1u);
  EXPECT_DOUBLE_EQ(grid.branches[0].reactance, 0.5);
  EXPECT_DOUBLE_EQ(grid.branches[0].rate, 0.6);
}

TEST(Matpower, ParseErrors) {
  std::string ragged = kTinyCase;
  ragged.replace(ragged.find("2 1 50 0;"), 9, "2 1 50;");
  EXPECT_EQ(error_code([&] { parse_matpower(ragged); }), ErrorCode::kMalformedMatrix);

  std::string unknown = kTinyCase;
  unknown.replace(unknown.find("1 2 0.01"), 8, "1 7 0.01");
  EXPECT_EQ(error_code([&] { parse_matpower(unknown); }), ErrorCode::kUnknownBusReference);

  std::string negative = kTinyCase;
  negative.replace(negative.find("0.01 0.5"), 8, "0.01 -0.5");
  EXPECT_EQ(error_code([&] { parse_matpower(negative); }), ErrorCode::kNonPositiveReactance);

  EXPECT_EQ(error_code([] { parse_matpower("mpc.baseMVA = 100;"); }), ErrorCode::kMalformedMatrix);
  EXPECT_EQ(error_code([] { load_matpower(testsupport::data_path("cases/case300.m")); }),
            ErrorCode::kNonPositiveReactance);
}

TEST(Matpower, UnlimitedRateBecomesInfinite) {
  std::string text = kTinyCase;
  text.replace(text.find("0 60 0 0"), 8, "0 0 0 0");
  EXPECT_TRUE(std::isinf(parse_matpower(text).branches[0].rate));
}

TEST(Dcopf, CountsMatchPublishedSizes) {
  for (const TableRow& row : kPublishedSizes) {
    const PowerSystemCase grid = load_matpower(testsupport::data_path(std::string("cases/") + row.file));
    EXPECT_EQ(grid.buses.size(), row.buses) << row.file;
    EXPECT_EQ(grid.generators.size(), row.generators) << row.file;
    EXPECT_EQ(grid.branches.size(), row.branches) << row.file;
    const DcopfModel model = build_dcopf(grid);
    EXPECT_EQ(model.instance.n(), row.n) << row.file;
    EXPECT_EQ(model.instance.p(), row.p) << row.file;
    EXPECT_EQ(model.instance.q(), row.q) << row.file;
  }
}

TEST(Dcopf, TwoBusModelByHand) {
  const DcopfModel model = build_dcopf(builtin::two_bus_case());
  const ProblemInstance& inst = model.instance;
  EXPECT_EQ(inst.n(), 3);
  EXPECT_EQ(inst.p(), 2);
  EXPECT_EQ(inst.q(), 2);
  // Susceptance 1/x = 2: balance rows [2θ1 − 2θ2 − P1, −2θ1 + 2θ2] = [0, −0.5],
  // flow rows ±2(θ1 − θ2) ≤ 0.6.
  Matrix expected(4, 3);
  expected << 2, -1, -2,  //
      -2, 0, 2,           //
      2, 0, -2,           //
      -2, 0, 2;
  EXPECT_EQ(testsupport::assemble_G(inst), expected);
  Vector g(4);
  g << 0.0, -0.5, 0.6, 0.6;
  EXPECT_EQ(testsupport::stacked_rhs(inst), g);
  // The reference solution dispatches exactly the load.
  const ReferenceSolution ref = reference_solve(inst);
  EXPECT_NEAR(ref.zstar[1], 0.5, 1e-8);
}

TEST(Dcopf, ClosedFormExamples) {
  DcopfBusData bus;
  bus.bus = 0;
  bus.has_generator = true;
  bus.q = 2.0;
  bus.p = 10.0;
  bus.gamma = 2.0;
  bus.beta = 0.1;
  bus.theta_ref = 0.1;
  bus.pref = 1.0;
  bus.theta_min = -0.5;
  bus.theta_max = 0.5;
  bus.pmin = 0.0;
  bus.pmax = 5.0;
  bus.laplacian = {{0, 1.0}};
  const Vector nu = Vector::Zero(1);
  const Vector mu = Vector::Zero(0);
  const DcopfLocalSolution zero = dcopf_inner_closed_form(bus, nu, mu);
  EXPECT_DOUBLE_EQ(zero.theta, 0.1);
  ASSERT_TRUE(zero.power.has_value());
  EXPECT_NEAR(*zero.power, (9.0 + std::sqrt(201.0)) / 20.0, 1e-14);

  // A large positive ν pushes θ below its lower bound.
  const DcopfLocalSolution low = dcopf_inner_closed_form(bus, Vector::Constant(1, 100.0), mu);
  EXPECT_DOUBLE_EQ(low.theta, -0.5);

  bus.pmax = 1.1;
  EXPECT_DOUBLE_EQ(*dcopf_inner_closed_form(bus, nu, mu).power, 1.1);
}

TEST(Dcopf, ClosedFormAgreesWithInnerSolveAndBruteForce) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> exponent(-2.0, 2.0);
  for (const char* file : {"case9.m", "case14.m"}) {
    const DcopfModel model = build_dcopf(load_matpower(testsupport::data_path(std::string("cases/") + file)));
    const ProblemInstance& inst = model.instance;
    for (int trial = 0; trial < 100; ++trial) {
      const double scale = std::pow(10.0, exponent(rng));
      DualPoint lambda = inst.zero_dual();
      for (Index t = 0; t < lambda.size(); ++t) lambda.values()[t] = scale * normal(rng);
      project_dual_inplace(lambda.values(), inst.p());
      const Vector nu = lambda.nu();
      const Vector mu = lambda.mu();
      for (std::size_t i = 0; i < model.buses.size(); ++i) {
        const DcopfBusData& bus = model.buses[i];
        const DcopfLocalSolution closed = dcopf_inner_closed_form(bus, nu, mu);
        const Vector generic = inner_solve(inst, static_cast<int>(i), agent_price(inst, static_cast<int>(i), lambda));
        const auto [theta, power] = testsupport::brute_force_bus(bus, nu, mu);
        EXPECT_NEAR(closed.theta, generic[0], 1e-8);
        EXPECT_NEAR(closed.theta, theta, 1e-8);
        if (bus.has_generator) {
          ASSERT_EQ(generic.size(), 2);
          EXPECT_NEAR(*closed.power, generic[1], 1e-8);
          EXPECT_NEAR(*closed.power, power, 1e-8);
        }
      }
    }
  }
}

TEST(Dcopf, ParamsRoundTripThroughJson) {
  DcopfParams params;
  params.q = 3.0;
  params.pref = 0.25;
  params.theta_ref_overrides = {{4, 0.05}};
  const DcopfParams back = DcopfParams::from_json(params.to_json());
  EXPECT_EQ(back.q, 3.0);
  ASSERT_TRUE(back.pref.has_value());
  EXPECT_EQ(*back.pref, 0.25);
  ASSERT_EQ(back.theta_ref_overrides.size(), 1u);
  EXPECT_EQ(back.theta_ref_overrides[0].first, 4);
  EXPECT_THROW(DcopfParams::from_json("{not json"), Error);
}

TEST(Num, EmptyRouteIsRejected) {
  EXPECT_EQ(error_code([] { build_num(Vector::Ones(1), {{0}, {}}, {NumUtility{}, NumUtility{}}); }),
            ErrorCode::kEmptyRoute);
}

TEST(Num, QuadraticToyHasHandSolution) {
  // min Σ ½(z_i − 1)² s.t. z_1 + z_2 ≤ 1: z* = (½, ½), μ* = ½, f* = ¼.
  const ProblemInstance inst = builtin::num_quadratic();
  const ReferenceSolution ref = reference_solve(inst);
  EXPECT_NEAR(ref.fstar, 0.25, 1e-12);
  EXPECT_NEAR(ref.zstar[0], 0.5, 1e-10);
  EXPECT_NEAR(ref.zstar[1], 0.5, 1e-10);
  EXPECT_NEAR(ref.lambda_star.mu()[0], 0.5, 1e-10);
}

TEST(Num, TwoSourceToyIsCongested) {
  const ProblemInstance inst = builtin::num_two_source();
  const ReferenceSolution ref = reference_solve(inst);
  EXPECT_NEAR(ref.zstar.sum(), 1.0, 1e-9);
  EXPECT_GT(ref.lambda_star.mu()[0], 0.0);
  // Stationarity of each source: σ_i(z_i − 1) − γ/(β + z_i) + μ = 0 on the interior.
  const double sig[2] = {1.0, 3.0};
  for (int i = 0; i < 2; ++i) {
    const double z = ref.zstar[i];
    EXPECT_NEAR(sig[i] * (z - 1.0) - 0.5 / (0.1 + z) + ref.lambda_star.mu()[0], 0.0, 1e-8);
  }
}
