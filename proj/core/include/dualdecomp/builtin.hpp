#pragma once

#include <string>
#include <vector>

#include "dualdecomp/apps.hpp"
#include "dualdecomp/model.hpp"

namespace dualdecomp {

/// Small instances with known solutions, used by `verify --builtin` and the tests.
namespace builtin {

/// min ½z² s.t. z = 1. Dual d(ν) = −½ν² − ν, ν* = −1, f* = ½.
ProblemInstance scalar_equality();

/// min ½(z − 2)² s.t. z <= 1. Dual d(μ) = μ − ½μ², μ* = 1, f* = ½.
ProblemInstance scalar_inequality();

/// Two sources on one unit-capacity link with ½(z_i − 1)² costs on [0, 1].
/// z* = (½, ½), μ* = ½, f* = ¼.
ProblemInstance num_quadratic();

/// Two sources on one unit-capacity link with heterogeneous log utilities
/// (σ = 1 and 3, γ = ½, β = 0.1, R = 1). The link is congested at the optimum.
ProblemInstance num_two_source();

/// Two buses joined by one branch (x = 0.5, limit 0.6 pu); a generator on
/// bus 1 with [0, 2] pu serves a 0.5 pu load on bus 2.
PowerSystemCase two_bus_case();

struct Named {
  std::string name;
  ProblemInstance instance;
};

/// Every instance above (the two-bus case built with default costs).
std::vector<Named> all();

}  // namespace builtin

}  // namespace dualdecomp
