#include <string>

#include "dualdecomp/apps.hpp"
#include "dualdecomp/error.hpp"

namespace dualdecomp {

ProblemInstance build_num(const Vector& capacities, const std::vector<std::vector<int>>& routes,
                          const std::vector<NumUtility>& utilities) {
  const int M = static_cast<int>(routes.size());
  const int links = static_cast<int>(capacities.size());
  if (static_cast<int>(utilities.size()) != M) {
    throw Error(ErrorCode::kDimensionMismatch, "one utility per source is required");
  }
  std::vector<std::pair<int, int>> edges;
  BlockCoupling coupling;
  coupling.eq_rows.assign(static_cast<std::size_t>(links), 0);
  coupling.ineq_rows.assign(static_cast<std::size_t>(links), 1);
  coupling.b = Vector(0);
  coupling.c = capacities;
  std::vector<LocalObjective> objectives;
  for (int i = 0; i < M; ++i) {
    const auto& route = routes[static_cast<std::size_t>(i)];
    if (route.empty()) throw Error(ErrorCode::kEmptyRoute, "source " + std::to_string(i) + " uses no link");
    for (int j : route) {
      if (j < 0 || j >= links) throw Error(ErrorCode::kDimensionMismatch, "route references unknown link");
      edges.emplace_back(j, i);
      coupling.blocks[{j, i}] = CouplingBlock{Matrix::Zero(0, 1), Matrix::Ones(1, 1)};
    }
    const NumUtility& u = utilities[static_cast<std::size_t>(i)];
    if (!(u.rate_cap > 0.0)) throw Error(ErrorCode::kInvalidObjective, "rate cap must be positive");
    const Box box{Vector::Zero(1), Vector::Constant(1, u.rate_cap)};
    if (u.gamma == 0.0) {
      objectives.push_back(LocalObjective::quadratic(Vector::Constant(1, u.sigma), Vector::Constant(1, u.rate_cap), box));
    } else {
      objectives.push_back(LocalObjective::quadratic_log(Vector::Constant(1, u.sigma), Vector::Constant(1, u.rate_cap),
                                                         u.gamma, u.beta, 0, box));
    }
  }
  return build_problem(BipartiteStructure(M, links, std::move(edges)), std::move(coupling), std::move(objectives));
}

}  // namespace dualdecomp
