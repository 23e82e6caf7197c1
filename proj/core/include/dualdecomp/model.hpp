#pragma once

#include <map>
#include <utility>
#include <vector>

#include "dualdecomp/objective.hpp"
#include "dualdecomp/types.hpp"

namespace dualdecomp {

/// Bipartite agent / constraint-block graph. Edges are stored as (j, i)
/// pairs: constraint block j is coupled to agent i.
class BipartiteStructure {
 public:
  BipartiteStructure() = default;
  BipartiteStructure(int num_agents, int num_blocks, std::vector<std::pair<int, int>> edges);

  int num_agents() const { return num_agents_; }
  int num_blocks() const { return num_blocks_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  /// N_i, ascending.
  const std::vector<int>& agent_neighbors(int i) const { return agent_neighbors_.at(i); }
  /// N̄_j, ascending.
  const std::vector<int>& block_neighbors(int j) const { return block_neighbors_.at(j); }
  bool connected(int j, int i) const;

 private:
  int num_agents_ = 0;
  int num_blocks_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> agent_neighbors_;
  std::vector<std::vector<int>> block_neighbors_;
};

/// Dense A_ji (p_j x n_i) and C_ji (q_j x n_i) for one edge.
struct CouplingBlock {
  Matrix eq;
  Matrix ineq;
};

struct BlockCoupling {
  std::vector<int> eq_rows;    ///< p_j per constraint block
  std::vector<int> ineq_rows;  ///< q_j per constraint block
  std::map<std::pair<int, int>, CouplingBlock> blocks;  ///< keyed by (j, i)
  Vector b;
  Vector c;
};

/// Multiplier pair λ = (ν, μ) stored stacked; ν occupies the first p entries.
class DualPoint {
 public:
  DualPoint() = default;
  DualPoint(Index p, Index q) : values_(Vector::Zero(p + q)), p_(p) {}
  DualPoint(Vector nu, const Vector& mu);

  Index p() const { return p_; }
  Index q() const { return values_.size() - p_; }
  Index size() const { return values_.size(); }

  auto nu() { return values_.head(p_); }
  auto nu() const { return values_.head(p_); }
  auto mu() { return values_.tail(values_.size() - p_); }
  auto mu() const { return values_.tail(values_.size() - p_); }

  Vector& values() { return values_; }
  const Vector& values() const { return values_; }

 private:
  Vector values_;
  Index p_ = 0;
};

/// Validated instance of the linearly coupled separable problem
///   min sum_i f_i(z_i)  s.t.  A z = b,  C z <= c,  z_i in Z_i.
/// Immutable after build_problem.
class ProblemInstance {
 public:
  const BipartiteStructure& structure() const { return structure_; }
  const BlockCoupling& coupling() const { return coupling_; }
  const std::vector<LocalObjective>& objectives() const { return objectives_; }
  const LocalObjective& objective(int i) const { return objectives_.at(i); }

  int num_agents() const { return structure_.num_agents(); }
  int num_blocks() const { return structure_.num_blocks(); }
  Index n() const { return n_; }
  Index p() const { return p_; }
  Index q() const { return q_; }
  double sigma_f() const { return sigma_f_; }

  Index agent_offset(int i) const { return agent_offset_[i]; }
  Index agent_dim(int i) const { return agent_offset_[i + 1] - agent_offset_[i]; }
  Index eq_offset(int j) const { return eq_offset_[j]; }
  Index eq_rows(int j) const { return eq_offset_[j + 1] - eq_offset_[j]; }
  Index ineq_offset(int j) const { return ineq_offset_[j]; }
  Index ineq_rows(int j) const { return ineq_offset_[j + 1] - ineq_offset_[j]; }

  const CouplingBlock& block(int j, int i) const;

  DualPoint zero_dual() const { return DualPoint(p_, q_); }

  /// Dense [A; C] for tests and small-instance diagnostics.
  Matrix dense_G() const;
  Vector g() const;

  /// f(z) = sum_i f_i(z_i).
  double objective_value(const Vector& z) const;

 private:
  friend ProblemInstance build_problem(BipartiteStructure, BlockCoupling, std::vector<LocalObjective>);

  BipartiteStructure structure_;
  BlockCoupling coupling_;
  std::vector<LocalObjective> objectives_;
  std::vector<Index> agent_offset_;
  std::vector<Index> eq_offset_;
  std::vector<Index> ineq_offset_;
  Index n_ = 0;
  Index p_ = 0;
  Index q_ = 0;
  double sigma_f_ = 0.0;
};

ProblemInstance build_problem(BipartiteStructure structure, BlockCoupling coupling,
                              std::vector<LocalObjective> objectives);

struct ConstraintResidual {
  Vector eq;    ///< A z - b
  Vector ineq;  ///< C z - c
};

/// A z - b and C z - c, block-sparse. Each block row is accumulated over its
/// neighbours in ascending agent order before the right-hand side is removed.
ConstraintResidual apply_G(const ProblemInstance& instance, const Vector& z);

/// A z and C z without the right-hand side.
ConstraintResidual multiply_G(const ProblemInstance& instance, const Vector& z);

/// Per-agent prices sum_{j in N_i} A_ji^T ν_j + C_ji^T μ_j, concatenated.
Vector apply_G_transpose(const ProblemInstance& instance, const DualPoint& lambda);

/// Price seen by agent i only.
Vector agent_price(const ProblemInstance& instance, int i, const DualPoint& lambda);

/// Product block j receives from agent i: (A_ji z_i, C_ji z_i).
struct BlockProduct {
  Vector eq;
  Vector ineq;
};
BlockProduct block_product(const CouplingBlock& block, const Vector& z_i);

/// Shared accumulation kernels so distributed and centralized paths round identically.
void accumulate_price(Vector& price, const CouplingBlock& block, const Eigen::Ref<const Vector>& nu_j,
                      const Eigen::Ref<const Vector>& mu_j);
void accumulate_product(Vector& eq_acc, Vector& ineq_acc, const BlockProduct& product);

}  // namespace dualdecomp
