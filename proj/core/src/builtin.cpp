#include "dualdecomp/builtin.hpp"

namespace dualdecomp::builtin {

namespace {

ProblemInstance scalar(double reference, bool inequality) {
  BlockCoupling coupling;
  coupling.eq_rows = {inequality ? 0 : 1};
  coupling.ineq_rows = {inequality ? 1 : 0};
  const Matrix one = Matrix::Ones(1, 1);
  const Matrix none = Matrix::Zero(0, 1);
  coupling.blocks[{0, 0}] = inequality ? CouplingBlock{none, one} : CouplingBlock{one, none};
  coupling.b = inequality ? Vector(0) : Vector::Ones(1);
  coupling.c = inequality ? Vector::Ones(1) : Vector(0);
  std::vector<LocalObjective> objectives{
      LocalObjective::quadratic(Vector::Ones(1), Vector::Constant(1, reference))};
  return build_problem(BipartiteStructure(1, 1, {{0, 0}}), std::move(coupling), std::move(objectives));
}

}  // namespace

ProblemInstance scalar_equality() { return scalar(0.0, false); }

ProblemInstance scalar_inequality() { return scalar(2.0, true); }

ProblemInstance num_quadratic() {
  return build_num(Vector::Ones(1), {{0}, {0}}, {NumUtility{1.0, 1.0, 0.0, 0.1}, NumUtility{1.0, 1.0, 0.0, 0.1}});
}

ProblemInstance num_two_source() {
  return build_num(Vector::Ones(1), {{0}, {0}}, {NumUtility{1.0, 1.0, 0.5, 0.1}, NumUtility{3.0, 1.0, 0.5, 0.1}});
}

PowerSystemCase two_bus_case() {
  PowerSystemCase grid;
  grid.name = "two_bus";
  grid.base_mva = 100.0;
  grid.buses = {Bus{1, 0.0}, Bus{2, 0.5}};
  grid.generators = {Generator{1, 0.0, 2.0}};
  grid.branches = {Branch{1, 2, 0.5, 0.6}};
  return grid;
}

std::vector<Named> all() {
  std::vector<Named> out;
  out.push_back({"scalar_equality", scalar_equality()});
  out.push_back({"scalar_inequality", scalar_inequality()});
  out.push_back({"num_quadratic", num_quadratic()});
  out.push_back({"num_two_source", num_two_source()});
  out.push_back({"dcopf_two_bus", build_dcopf(two_bus_case()).instance});
  return out;
}

}  // namespace dualdecomp::builtin
