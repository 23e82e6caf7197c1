#include "dualdecomp/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dualdecomp/error.hpp"

namespace dualdecomp {

namespace {

using nlohmann::json;

json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) throw Error(ErrorCode::kInvalidArgument, "cannot serialize NaN");
  return v > 0 ? "inf" : "-inf";
}

double read_number(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw Error(ErrorCode::kParseError, "expected a number, got " + v.dump());
}

json vector_json(const Vector& x) {
  json out = json::array();
  for (Index k = 0; k < x.size(); ++k) out.push_back(number(x[k]));
  return out;
}

Vector read_vector(const json& v) {
  if (!v.is_array()) throw Error(ErrorCode::kParseError, "expected an array");
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) out[static_cast<Index>(k)] = read_number(v[k]);
  return out;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) out.push_back(number(m(r, c)));
  }
  return out;
}

Matrix read_matrix(const json& v, Index rows, Index cols) {
  const Vector flat = read_vector(v);
  if (flat.size() != rows * cols) {
    throw Error(ErrorCode::kDimensionMismatch, "block has " + std::to_string(flat.size()) + " entries, expected " +
                                                   std::to_string(rows * cols));
  }
  Matrix out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) out(r, c) = flat[r * cols + c];
  }
  return out;
}

LocalObjective read_objective(const json& o) {
  const std::string type = o.at("type").get<std::string>();
  const Vector q = read_vector(o.at("q"));
  const Vector ref = o.contains("ref") ? read_vector(o.at("ref")) : Vector::Zero(q.size());
  std::optional<Box> box;
  if (o.contains("lo") || o.contains("hi")) {
    Box b = Box::unbounded(q.size());
    if (o.contains("lo")) b.lo = read_vector(o.at("lo"));
    if (o.contains("hi")) b.hi = read_vector(o.at("hi"));
    box = b;
  }
  LocalObjective obj = [&] {
    if (type == "quadratic") return LocalObjective::quadratic(q, ref, box);
    if (type == "quadratic_log") {
      return LocalObjective::quadratic_log(q, ref, read_number(o.at("gamma")), read_number(o.at("beta")),
                                           o.value("log_index", Index{0}), box);
    }
    throw Error(ErrorCode::kParseError, "unknown objective type '" + type + "'");
  }();
  if (o.contains("lipschitz") && !o.at("lipschitz").is_null()) obj.declare_lipschitz(read_number(o.at("lipschitz")));
  return obj;
}

json objective_json(const LocalObjective& obj) {
  json o;
  std::visit(
      [&](const auto& cost) {
        using T = std::decay_t<decltype(cost)>;
        if constexpr (std::is_same_v<T, QuadraticCost>) {
          o["type"] = "quadratic";
          o["q"] = vector_json(cost.weights);
          o["ref"] = vector_json(cost.reference);
        } else if constexpr (std::is_same_v<T, QuadraticLogCost>) {
          o["type"] = "quadratic_log";
          o["q"] = vector_json(cost.weights);
          o["ref"] = vector_json(cost.reference);
          o["gamma"] = number(cost.gamma);
          o["beta"] = number(cost.beta);
          o["log_index"] = cost.log_index;
        } else {
          throw Error(ErrorCode::kInvalidArgument, "callback objectives have no JSON form");
        }
      },
      obj.kind());
  o["lo"] = vector_json(obj.box().lo);
  o["hi"] = vector_json(obj.box().hi);
  return o;
}

}  // namespace

ProblemInstance problem_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  try {
    const json& s = doc.at("structure");
    const int M = s.at("M").get<int>();
    const int Mbar = s.at("Mbar").get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : s.at("incidence")) {
      if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::kParseError, "incidence entries are [j, i] pairs");
      edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    BlockCoupling coupling;
    coupling.eq_rows = s.at("eq_rows").get<std::vector<int>>();
    coupling.ineq_rows = s.at("ineq_rows").get<std::vector<int>>();
    if (static_cast<int>(coupling.eq_rows.size()) != Mbar || static_cast<int>(coupling.ineq_rows.size()) != Mbar) {
      throw Error(ErrorCode::kDimensionMismatch, "eq_rows/ineq_rows must list every block");
    }

    std::vector<LocalObjective> objectives;
    for (const auto& o : doc.at("objectives")) objectives.push_back(read_objective(o));
    if (static_cast<int>(objectives.size()) != M) throw Error(ErrorCode::kDimensionMismatch, "objective count != M");

    for (const auto& blk : doc.at("blocks")) {
      const int j = blk.at("j").get<int>();
      const int i = blk.at("i").get<int>();
      if (j < 0 || j >= Mbar || i < 0 || i >= M) throw Error(ErrorCode::kDimensionMismatch, "block index out of range");
      const Index ni = objectives[static_cast<std::size_t>(i)].dimension();
      CouplingBlock cb;
      cb.eq = blk.contains("A") ? read_matrix(blk.at("A"), coupling.eq_rows[static_cast<std::size_t>(j)], ni)
                                : Matrix::Zero(coupling.eq_rows[static_cast<std::size_t>(j)], ni);
      cb.ineq = blk.contains("C") ? read_matrix(blk.at("C"), coupling.ineq_rows[static_cast<std::size_t>(j)], ni)
                                  : Matrix::Zero(coupling.ineq_rows[static_cast<std::size_t>(j)], ni);
      if (!coupling.blocks.emplace(std::pair{j, i}, std::move(cb)).second) {
        throw Error(ErrorCode::kParseError, "duplicate block entry");
      }
    }
    const json& rhs = doc.at("rhs");
    coupling.b = rhs.contains("b") ? read_vector(rhs.at("b")) : Vector(0);
    coupling.c = rhs.contains("c") ? read_vector(rhs.at("c")) : Vector(0);
    return build_problem(BipartiteStructure(M, Mbar, std::move(edges)), std::move(coupling), std::move(objectives));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

std::string problem_to_json(const ProblemInstance& instance) {
  json doc;
  json incidence = json::array();
  for (const auto& [j, i] : instance.structure().edges()) incidence.push_back({j, i});
  doc["structure"] = {{"M", instance.num_agents()},
                      {"Mbar", instance.num_blocks()},
                      {"incidence", incidence},
                      {"eq_rows", instance.coupling().eq_rows},
                      {"ineq_rows", instance.coupling().ineq_rows}};
  json blocks = json::array();
  for (const auto& [key, blk] : instance.coupling().blocks) {
    blocks.push_back({{"j", key.first}, {"i", key.second}, {"A", matrix_json(blk.eq)}, {"C", matrix_json(blk.ineq)}});
  }
  doc["blocks"] = blocks;
  doc["rhs"] = {{"b", vector_json(instance.coupling().b)}, {"c", vector_json(instance.coupling().c)}};
  json objectives = json::array();
  for (const LocalObjective& obj : instance.objectives()) {
    json o = objective_json(obj);
    if (obj.lipschitz()) o["lipschitz"] = number(*obj.lipschitz());
    objectives.push_back(std::move(o));
  }
  doc["objectives"] = objectives;
  return doc.dump(1) + "\n";
}

ProblemInstance load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return problem_from_json(buffer.str());
}

void save_problem(const ProblemInstance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path);
  out << problem_to_json(instance);
}

}  // namespace dualdecomp
