#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "dualdecomp/apps.hpp"
#include "dualdecomp/error.hpp"

namespace dualdecomp {

DcopfParams DcopfParams::from_json(std::string_view text) {
  DcopfParams out;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("builder config: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kParseError, "builder config must be an object");
  auto read = [&](const char* key, double& field) {
    if (doc.contains(key)) field = doc.at(key).get<double>();
  };
  try {
    read("q", out.q);
    read("p", out.p);
    read("gamma", out.gamma);
    read("beta", out.beta);
    read("theta_ref", out.theta_ref);
    read("theta_min", out.theta_min);
    read("theta_max", out.theta_max);
    if (doc.contains("pref") && !doc.at("pref").is_null()) {
      const auto& v = doc.at("pref");
      if (v.is_string()) {
        if (v.get<std::string>() != "midpoint") throw Error(ErrorCode::kParseError, "pref must be a number or \"midpoint\"");
      } else {
        out.pref = v.get<double>();
      }
    }
    if (doc.contains("theta_ref_overrides")) {
      for (const auto& [key, value] : doc.at("theta_ref_overrides").items()) {
        out.theta_ref_overrides.emplace_back(std::stoi(key), value.get<double>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("builder config: ") + e.what());
  }
  return out;
}

std::string DcopfParams::to_json() const {
  nlohmann::json doc;
  doc["q"] = q;
  doc["p"] = p;
  doc["gamma"] = gamma;
  doc["beta"] = beta;
  doc["theta_ref"] = theta_ref;
  doc["theta_min"] = theta_min;
  doc["theta_max"] = theta_max;
  doc["pref"] = pref ? nlohmann::json(*pref) : nlohmann::json("midpoint");
  nlohmann::json overrides = nlohmann::json::object();
  for (const auto& [bus, value] : theta_ref_overrides) overrides[std::to_string(bus)] = value;
  doc["theta_ref_overrides"] = overrides;
  return doc.dump();
}

DcopfModel build_dcopf(const PowerSystemCase& grid, const DcopfParams& params) {
  if (!(params.q > 0.0) || !(params.p > 0.0) || !(params.gamma > 0.0) || !(params.beta > 0.0)) {
    throw Error(ErrorCode::kInvalidObjective, "q, p, gamma and beta must be positive");
  }
  if (!(params.theta_min <= params.theta_max)) throw Error(ErrorCode::kInvalidObjective, "empty angle box");

  const int M = static_cast<int>(grid.buses.size());
  const int L = static_cast<int>(grid.branches.size());
  DcopfModel model;
  model.buses.resize(static_cast<std::size_t>(M));

  // Generators are aggregated per bus.
  std::map<int, std::pair<double, double>> gen_box;
  for (const Generator& g : grid.generators) {
    auto [it, fresh] = gen_box.try_emplace(grid.bus_index(g.bus), g.pmin, g.pmax);
    if (!fresh) {
      it->second.first += g.pmin;
      it->second.second += g.pmax;
    }
  }
  model.num_generators = static_cast<int>(gen_box.size());

  // Weighted Laplacian with susceptance weights, kept per row for sparsity.
  std::vector<std::map<int, double>> lap(static_cast<std::size_t>(M));
  std::vector<double> susceptance(static_cast<std::size_t>(L));
  std::vector<std::pair<int, int>> ends(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    const Branch& br = grid.branches[static_cast<std::size_t>(l)];
    const int f = grid.bus_index(br.from);
    const int t = grid.bus_index(br.to);
    const double b = 1.0 / br.reactance;
    susceptance[static_cast<std::size_t>(l)] = b;
    ends[static_cast<std::size_t>(l)] = {f, t};
    lap[static_cast<std::size_t>(f)][f] += b;
    lap[static_cast<std::size_t>(t)][t] += b;
    lap[static_cast<std::size_t>(f)][t] -= b;
    lap[static_cast<std::size_t>(t)][f] -= b;
  }

  std::vector<std::pair<int, int>> edges;
  BlockCoupling coupling;
  coupling.eq_rows.assign(static_cast<std::size_t>(M + L), 0);
  coupling.ineq_rows.assign(static_cast<std::size_t>(M + L), 0);
  coupling.b = Vector(M);
  coupling.c = Vector(2 * L);
  auto dim = [&](int i) { return gen_box.count(i) ? 2 : 1; };

  for (int j = 0; j < M; ++j) {
    coupling.eq_rows[static_cast<std::size_t>(j)] = 1;
    coupling.b[j] = -grid.buses[static_cast<std::size_t>(j)].load;
    // Row j couples bus j with its adjacent buses; the own entry is present even for isolated buses.
    lap[static_cast<std::size_t>(j)].try_emplace(j, 0.0);
    for (const auto& [i, value] : lap[static_cast<std::size_t>(j)]) {
      edges.emplace_back(j, i);
      Matrix eq = Matrix::Zero(1, dim(i));
      eq(0, 0) = value;
      if (i == j && gen_box.count(i)) eq(0, 1) = -1.0;
      coupling.blocks[{j, i}] = CouplingBlock{eq, Matrix::Zero(0, dim(i))};
    }
  }
  for (int l = 0; l < L; ++l) {
    const int j = M + l;
    const auto [f, t] = ends[static_cast<std::size_t>(l)];
    const double b = susceptance[static_cast<std::size_t>(l)];
    coupling.ineq_rows[static_cast<std::size_t>(j)] = 2;
    const double rate = grid.branches[static_cast<std::size_t>(l)].rate;
    coupling.c[2 * l] = rate;
    coupling.c[2 * l + 1] = rate;
    for (const auto& [i, sign] : {std::pair{f, 1.0}, std::pair{t, -1.0}}) {
      edges.emplace_back(j, i);
      Matrix ineq = Matrix::Zero(2, dim(i));
      ineq(0, 0) = sign * b;
      ineq(1, 0) = -sign * b;
      coupling.blocks[{j, i}] = CouplingBlock{Matrix::Zero(0, dim(i)), ineq};
    }
  }

  std::map<int, double> theta_override;
  for (const auto& [id, value] : params.theta_ref_overrides) theta_override[grid.bus_index(id)] = value;

  std::vector<LocalObjective> objectives;
  objectives.reserve(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    DcopfBusData& bus = model.buses[static_cast<std::size_t>(i)];
    bus.bus = i;
    bus.q = params.q;
    bus.theta_ref = theta_override.count(i) ? theta_override[i] : params.theta_ref;
    bus.theta_min = params.theta_min;
    bus.theta_max = params.theta_max;
    // symmetric, so row i also lists the rows in which θ_i appears
    for (const auto& [row, value] : lap[static_cast<std::size_t>(i)]) bus.laplacian.emplace_back(row, value);
    for (int l = 0; l < L; ++l) {
      const auto [f, t] = ends[static_cast<std::size_t>(l)];
      if (f == i) bus.branches.emplace_back(l, susceptance[static_cast<std::size_t>(l)]);
      if (t == i) bus.branches.emplace_back(l, -susceptance[static_cast<std::size_t>(l)]);
    }
    auto gen = gen_box.find(i);
    if (gen == gen_box.end()) {
      objectives.push_back(LocalObjective::quadratic(Vector::Constant(1, params.q), Vector::Constant(1, bus.theta_ref),
                                                     Box{Vector::Constant(1, params.theta_min),
                                                         Vector::Constant(1, params.theta_max)}));
      continue;
    }
    bus.has_generator = true;
    bus.p = params.p;
    bus.gamma = params.gamma;
    bus.beta = params.beta;
    bus.pmin = gen->second.first;
    bus.pmax = gen->second.second;
    bus.pref = params.pref ? *params.pref : 0.5 * (bus.pmin + bus.pmax);
    Vector weights(2), reference(2), lo(2), hi(2);
    weights << params.q, params.p;
    reference << bus.theta_ref, bus.pref;
    lo << params.theta_min, bus.pmin;
    hi << params.theta_max, bus.pmax;
    objectives.push_back(
        LocalObjective::quadratic_log(weights, reference, params.gamma, params.beta, 1, Box{lo, hi}));
  }

  model.instance = build_problem(BipartiteStructure(M, M + L, std::move(edges)), std::move(coupling),
                                 std::move(objectives));
  return model;
}

DcopfLocalSolution dcopf_inner_closed_form(const DcopfBusData& bus, const Vector& nu, const Vector& mu) {
  double theta_price = 0.0;
  for (const auto& [row, entry] : bus.laplacian) theta_price += entry * nu[row];
  for (const auto& [l, signed_b] : bus.branches) theta_price += signed_b * (mu[2 * l] - mu[2 * l + 1]);

  DcopfLocalSolution out;
  out.theta = std::clamp(bus.theta_ref - theta_price / bus.q, bus.theta_min, bus.theta_max);
  if (bus.has_generator) {
    // p(P − P^ref) + a − γ/(β + P) = 0 with a = −ν_i, multiplied through by (β + P).
    const double a = -nu[bus.bus];
    const double qa = bus.p;
    const double qb = bus.p * bus.beta - bus.p * bus.pref + a;
    const double qc = a * bus.beta - bus.p * bus.pref * bus.beta - bus.gamma;
    const double sq = std::sqrt(qb * qb - 4.0 * qa * qc);
    // cancellation-free form of the larger root; neither branch can divide by zero
    const double root = qb > 0.0 ? 2.0 * qc / (-qb - sq) : (-qb + sq) / (2.0 * qa);
    if (!(root > -bus.beta)) throw Error(ErrorCode::kNoRootInDomain, "generator stationarity root below -beta");
    out.power = std::clamp(root, bus.pmin, bus.pmax);
  }
  return out;
}

}  // namespace dualdecomp
