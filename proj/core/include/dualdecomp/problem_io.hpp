#pragma once

#include <string>
#include <string_view>

#include "dualdecomp/model.hpp"

namespace dualdecomp {

/// JSON problem format (see docs/problem_format.md). Infinite numbers are
/// written as the strings "inf" and "-inf". Objectives built from callbacks
/// cannot be serialized.
ProblemInstance problem_from_json(std::string_view text);
std::string problem_to_json(const ProblemInstance& instance);

ProblemInstance load_problem(const std::string& path);
void save_problem(const ProblemInstance& instance, const std::string& path);

}  // namespace dualdecomp
