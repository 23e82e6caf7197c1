#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include "dualdecomp/apps.hpp"
#include "dualdecomp/error.hpp"

namespace dualdecomp {

namespace {

std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_comment = false;
  for (char ch : text) {
    if (ch == '\n') in_comment = false;
    else if (ch == '%') in_comment = true;
    if (!in_comment) out.push_back(ch);
  }
  return out;
}

using Rows = std::vector<std::vector<double>>;

Rows read_matrix(const std::string& text, const std::string& name, std::size_t min_columns) {
  const std::regex head("mpc\\." + name + "\\s*=\\s*\\[");
  std::smatch m;
  if (!std::regex_search(text, m, head)) throw Error(ErrorCode::kMalformedMatrix, "mpc." + name + " not found");
  const std::size_t begin = static_cast<std::size_t>(m.position(0) + m.length(0));
  const std::size_t end = text.find(']', begin);
  if (end == std::string::npos) throw Error(ErrorCode::kMalformedMatrix, "mpc." + name + " is not closed");
  const std::string body = text.substr(begin, end - begin);

  Rows rows;
  std::vector<double> row;
  auto flush = [&] {
    if (row.empty()) return;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::kMalformedMatrix, "mpc." + name + " row " + std::to_string(rows.size() + 1) + " has " +
                                                   std::to_string(row.size()) + " columns, expected " +
                                                   std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
    row.clear();
  };
  std::string token;
  auto take_token = [&] {
    if (token.empty()) return;
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw Error(ErrorCode::kMalformedMatrix, "bad number '" + token + "' in mpc." + name);
    row.push_back(value);
    token.clear();
  };
  for (char ch : body) {
    if (ch == ';' || ch == '\n' || ch == '\r') {
      take_token();
      flush();
    } else if (ch == ' ' || ch == '\t' || ch == ',') {
      take_token();
    } else {
      token.push_back(ch);
    }
  }
  take_token();
  flush();
  if (rows.empty()) throw Error(ErrorCode::kMalformedMatrix, "mpc." + name + " is empty");
  if (rows.front().size() < min_columns) {
    throw Error(ErrorCode::kMalformedMatrix, "mpc." + name + " needs at least " + std::to_string(min_columns) + " columns");
  }
  return rows;
}

int as_id(double v, const std::string& what) {
  if (v != std::floor(v)) throw Error(ErrorCode::kMalformedMatrix, what + " is not an integer");
  return static_cast<int>(v);
}

}  // namespace

int PowerSystemCase::bus_index(int id) const {
  for (std::size_t k = 0; k < buses.size(); ++k) {
    if (buses[k].id == id) return static_cast<int>(k);
  }
  throw Error(ErrorCode::kUnknownBusReference, "bus " + std::to_string(id) + " is not declared");
}

PowerSystemCase parse_matpower(std::string_view raw) {
  const std::string text = strip_comments(raw);
  PowerSystemCase out;

  const std::regex base("mpc\\.baseMVA\\s*=\\s*([-+0-9.eE]+)");
  std::smatch m;
  if (std::regex_search(text, m, base)) out.base_mva = std::stod(m[1].str());
  if (!(out.base_mva > 0.0)) throw Error(ErrorCode::kMalformedMatrix, "baseMVA must be positive");
  const std::regex fn("function\\s+mpc\\s*=\\s*([A-Za-z0-9_]+)");
  if (std::regex_search(text, m, fn)) out.name = m[1].str();

  for (const auto& r : read_matrix(text, "bus", 3)) {
    out.buses.push_back(Bus{as_id(r[0], "BUS_I"), r[2] / out.base_mva});
  }
  for (std::size_t a = 0; a < out.buses.size(); ++a) {
    for (std::size_t b = a + 1; b < out.buses.size(); ++b) {
      if (out.buses[a].id == out.buses[b].id) {
        throw Error(ErrorCode::kMalformedMatrix, "bus " + std::to_string(out.buses[a].id) + " declared twice");
      }
    }
  }
  for (const auto& r : read_matrix(text, "gen", 10)) {
    Generator g{as_id(r[0], "GEN_BUS"), r[9] / out.base_mva, r[8] / out.base_mva};
    out.bus_index(g.bus);
    if (g.pmin > g.pmax) throw Error(ErrorCode::kMalformedMatrix, "generator with PMIN > PMAX");
    out.generators.push_back(g);
  }
  for (const auto& r : read_matrix(text, "branch", 6)) {
    Branch br{as_id(r[0], "F_BUS"), as_id(r[1], "T_BUS"), r[3], r[5] == 0.0 ? kInf : r[5] / out.base_mva};
    out.bus_index(br.from);
    out.bus_index(br.to);
    if (!(br.reactance > 0.0)) {
      throw Error(ErrorCode::kNonPositiveReactance, "branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                                                        " has x <= 0");
    }
    if (br.from == br.to) throw Error(ErrorCode::kMalformedMatrix, "branch connects a bus to itself");
    if (!(br.rate > 0.0)) throw Error(ErrorCode::kMalformedMatrix, "negative RATE_A");
    out.branches.push_back(br);
  }
  return out;
}

PowerSystemCase load_matpower(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  PowerSystemCase out = parse_matpower(buffer.str());
  if (out.name.empty()) {
    const auto slash = path.find_last_of('/');
    std::string stem = path.substr(slash == std::string::npos ? 0 : slash + 1);
    const auto dot = stem.rfind('.');
    out.name = dot == std::string::npos ? stem : stem.substr(0, dot);
  }
  return out;
}

}  // namespace dualdecomp
