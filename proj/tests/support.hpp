#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls the library's own assembly or inner solvers, so agreement
// with the library is evidence rather than a tautology.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dualdecomp/apps.hpp"
#include "dualdecomp/model.hpp"

namespace testsupport {

using dualdecomp::Index;
using dualdecomp::Matrix;
using dualdecomp::Vector;

inline std::string data_path(const std::string& name) { return std::string(DUALDECOMP_DATA_DIR) + "/" + name; }

/// Dense [A; C] assembled directly from the stored blocks, with agent and row
/// offsets recomputed from the raw dimensions.
inline Matrix assemble_G(const dualdecomp::ProblemInstance& inst) {
  const auto& cp = inst.coupling();
  const int M = inst.num_agents();
  const int J = inst.num_blocks();
  std::vector<Index> col(M + 1, 0);
  for (int i = 0; i < M; ++i) col[i + 1] = col[i] + inst.objective(i).dimension();
  std::vector<Index> eq(J + 1, 0), in(J + 1, 0);
  for (int j = 0; j < J; ++j) {
    eq[j + 1] = eq[j] + cp.eq_rows[j];
    in[j + 1] = in[j] + cp.ineq_rows[j];
  }
  Matrix G = Matrix::Zero(eq[J] + in[J], col[M]);
  for (const auto& [key, block] : cp.blocks) {
    const auto [j, i] = key;
    if (block.eq.size() > 0) G.block(eq[j], col[i], block.eq.rows(), block.eq.cols()) = block.eq;
    if (block.ineq.size() > 0) G.block(eq[J] + in[j], col[i], block.ineq.rows(), block.ineq.cols()) = block.ineq;
  }
  return G;
}

inline Vector stacked_rhs(const dualdecomp::ProblemInstance& inst) {
  Vector g(inst.p() + inst.q());
  g << inst.coupling().b, inst.coupling().c;
  return g;
}

/// Random feasible instance with diagonal quadratic costs and boxes.
struct RandomSpec {
  int agents = 4;
  int blocks = 3;
  bool boxes = true;
};

inline dualdecomp::ProblemInstance random_instance(unsigned seed, RandomSpec spec = {}) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_int_distribution<int> rows(0, 2);
  std::bernoulli_distribution coin(0.5);

  std::vector<int> n(spec.agents);
  for (int& d : n) d = dim(rng);
  std::vector<std::pair<int, int>> edges;
  for (int j = 0; j < spec.blocks; ++j) {
    for (int i = 0; i < spec.agents; ++i) {
      if (coin(rng)) edges.emplace_back(j, i);
    }
  }
  // Every agent and every block gets at least one edge.
  for (int i = 0; i < spec.agents; ++i) edges.emplace_back(i % spec.blocks, i);
  for (int j = 0; j < spec.blocks; ++j) edges.emplace_back(j, j % spec.agents);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  dualdecomp::BlockCoupling cp;
  for (int j = 0; j < spec.blocks; ++j) {
    int p = rows(rng), q = rows(rng);
    if (p + q == 0) p = 1;
    cp.eq_rows.push_back(p);
    cp.ineq_rows.push_back(q);
  }

  std::vector<dualdecomp::LocalObjective> objectives;
  std::vector<Vector> z0;
  for (int i = 0; i < spec.agents; ++i) {
    Vector w(n[i]), ref(n[i]);
    for (int k = 0; k < n[i]; ++k) {
      w[k] = 0.5 + 1.25 * (unit(rng) + 1.0);
      ref[k] = 2.0 * unit(rng);
    }
    dualdecomp::Box box{Vector::Constant(n[i], -2.0), Vector::Constant(n[i], 2.0)};
    if (!spec.boxes) box = dualdecomp::Box::unbounded(n[i]);
    objectives.push_back(dualdecomp::LocalObjective::quadratic(w, ref, box));
    Vector z(n[i]);
    for (int k = 0; k < n[i]; ++k) z[k] = 0.9 * unit(rng);
    z0.push_back(z);
  }

  Index P = 0, Q = 0;
  for (int j = 0; j < spec.blocks; ++j) {
    P += cp.eq_rows[j];
    Q += cp.ineq_rows[j];
  }
  cp.b = Vector::Zero(P);
  cp.c = Vector::Zero(Q);
  std::vector<Index> eq(spec.blocks + 1, 0), in(spec.blocks + 1, 0);
  for (int j = 0; j < spec.blocks; ++j) {
    eq[j + 1] = eq[j] + cp.eq_rows[j];
    in[j + 1] = in[j] + cp.ineq_rows[j];
  }
  for (const auto& [j, i] : edges) {
    dualdecomp::CouplingBlock block{Matrix(cp.eq_rows[j], n[i]), Matrix(cp.ineq_rows[j], n[i])};
    for (Index r = 0; r < block.eq.rows(); ++r)
      for (Index c = 0; c < n[i]; ++c) block.eq(r, c) = unit(rng);
    for (Index r = 0; r < block.ineq.rows(); ++r)
      for (Index c = 0; c < n[i]; ++c) block.ineq(r, c) = unit(rng);
    cp.b.segment(eq[j], cp.eq_rows[j]) += block.eq * z0[i];
    cp.c.segment(in[j], cp.ineq_rows[j]) += block.ineq * z0[i];
    cp.blocks[{j, i}] = std::move(block);
  }
  for (Index t = 0; t < Q; ++t) cp.c[t] += 0.5 * (unit(rng) + 1.0);
  return dualdecomp::build_problem(dualdecomp::BipartiteStructure(spec.agents, spec.blocks, edges), std::move(cp),
                                   std::move(objectives));
}

/// Dual value, gradient and minimizer for diagonal-quadratic instances
/// computed from the dense matrix: z = clamp(ref − Gᵀλ / w).
struct DenseDual {
  double value;
  Vector gradient;
  Vector z;
};

inline DenseDual dense_quadratic_dual(const dualdecomp::ProblemInstance& inst, const Vector& lambda) {
  const Matrix G = assemble_G(inst);
  const Vector g = stacked_rhs(inst);
  const Vector price = G.transpose() * lambda;
  Vector z(G.cols());
  double f = 0.0;
  Index off = 0;
  for (int i = 0; i < inst.num_agents(); ++i) {
    const auto& obj = inst.objective(i);
    const auto& cost = std::get<dualdecomp::QuadraticCost>(obj.kind());
    for (Index k = 0; k < obj.dimension(); ++k) {
      const double w = cost.weights[k];
      const double r = cost.reference[k];
      const double v = std::clamp(r - price[off + k] / w, obj.box().lo[k], obj.box().hi[k]);
      z[off + k] = v;
      f += 0.5 * w * (v - r) * (v - r);
    }
    off += obj.dimension();
  }
  const Vector gradient = G * z - g;
  return {f + lambda.dot(gradient), gradient, z};
}

/// Projected gradient on a one-dimensional convex function with derivative
/// `dphi`, step 1/L, until the iterate stops moving by more than `tol`.
template <class Derivative>
double projected_gradient_1d(Derivative dphi, double lo, double hi, double L, double start, double tol = 1e-13,
                             long max_iter = 2000000) {
  double x = std::clamp(start, lo, hi);
  for (long it = 0; it < max_iter; ++it) {
    const double next = std::clamp(x - dphi(x) / L, lo, hi);
    if (std::abs(next - x) <= tol) return next;
    x = next;
  }
  return x;
}

/// Prices (θ-price, P-price) seen by one bus, written in network terms:
/// Laplacian column against ν plus signed susceptance against μ_up − μ_down.
inline std::pair<double, double> bus_prices(const dualdecomp::DcopfBusData& bus, const Vector& nu, const Vector& mu) {
  double theta_price = 0.0;
  for (const auto& [row, entry] : bus.laplacian) theta_price += entry * nu[row];
  for (const auto& [l, s] : bus.branches) theta_price += s * (mu[2 * l] - mu[2 * l + 1]);
  return {theta_price, -nu[bus.bus]};
}

/// Brute-force local DC-OPF solve by projected gradient on each coordinate.
inline std::pair<double, double> brute_force_bus(const dualdecomp::DcopfBusData& bus, const Vector& nu,
                                                 const Vector& mu, double tol = 1e-14) {
  const auto [a_theta, a_power] = bus_prices(bus, nu, mu);
  const double q = bus.q, tr = bus.theta_ref;
  const double theta = projected_gradient_1d([&](double t) { return q * (t - tr) + a_theta; }, bus.theta_min,
                                             bus.theta_max, q, tr, tol);
  double power = 0.0;
  if (bus.has_generator) {
    const double p = bus.p, pr = bus.pref, g = bus.gamma, b = bus.beta;
    const double L = p + g / ((b + bus.pmin) * (b + bus.pmin));
    power = projected_gradient_1d([&](double x) { return p * (x - pr) - g / (b + x) + a_power; }, bus.pmin,
                                  bus.pmax, L, 0.5 * (bus.pmin + bus.pmax), tol);
  }
  return {theta, power};
}

}  // namespace testsupport
