#pragma once

#include <limits>

#include <Eigen/Core>

namespace dualdecomp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace dualdecomp
