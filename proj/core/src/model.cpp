#include "dualdecomp/model.hpp"

#include <algorithm>
#include <string>

#include "dualdecomp/error.hpp"

namespace dualdecomp {

namespace {

std::string edge_name(int j, int i) { return "(" + std::to_string(j) + ", " + std::to_string(i) + ")"; }

}  // namespace

BipartiteStructure::BipartiteStructure(int num_agents, int num_blocks, std::vector<std::pair<int, int>> edges)
    : num_agents_(num_agents), num_blocks_(num_blocks) {
  if (num_agents < 0 || num_blocks < 0) throw Error(ErrorCode::kDimensionMismatch, "negative graph size");
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  agent_neighbors_.resize(static_cast<std::size_t>(num_agents));
  block_neighbors_.resize(static_cast<std::size_t>(num_blocks));
  for (const auto& [j, i] : edges) {
    if (j < 0 || j >= num_blocks || i < 0 || i >= num_agents) {
      throw Error(ErrorCode::kDimensionMismatch, "incidence entry " + edge_name(j, i) + " out of range");
    }
    // edges are sorted by (j, i) so both lists come out ascending
    block_neighbors_[static_cast<std::size_t>(j)].push_back(i);
    agent_neighbors_[static_cast<std::size_t>(i)].push_back(j);
  }
  edges_ = std::move(edges);
}

bool BipartiteStructure::connected(int j, int i) const {
  if (j < 0 || j >= num_blocks_) return false;
  const auto& nb = block_neighbors_[static_cast<std::size_t>(j)];
  return std::binary_search(nb.begin(), nb.end(), i);
}

DualPoint::DualPoint(Vector nu, const Vector& mu) : values_(nu.size() + mu.size()), p_(nu.size()) {
  values_.head(p_) = nu;
  values_.tail(mu.size()) = mu;
}

const CouplingBlock& ProblemInstance::block(int j, int i) const {
  auto it = coupling_.blocks.find({j, i});
  if (it == coupling_.blocks.end()) {
    throw Error(ErrorCode::kBlockOutsideIncidence, "no block stored at " + edge_name(j, i));
  }
  return it->second;
}

Matrix ProblemInstance::dense_G() const {
  Matrix G = Matrix::Zero(p_ + q_, n_);
  for (const auto& [key, blk] : coupling_.blocks) {
    const auto [j, i] = key;
    G.block(eq_offset(j), agent_offset(i), blk.eq.rows(), blk.eq.cols()) = blk.eq;
    G.block(p_ + ineq_offset(j), agent_offset(i), blk.ineq.rows(), blk.ineq.cols()) = blk.ineq;
  }
  return G;
}

Vector ProblemInstance::g() const {
  Vector out(p_ + q_);
  out.head(p_) = coupling_.b;
  out.tail(q_) = coupling_.c;
  return out;
}

double ProblemInstance::objective_value(const Vector& z) const {
  if (z.size() != n_) throw Error(ErrorCode::kDimensionMismatch, "z has wrong length");
  double total = 0.0;
  for (int i = 0; i < num_agents(); ++i) total += objectives_[static_cast<std::size_t>(i)].value(z.segment(agent_offset(i), agent_dim(i)));
  return total;
}

ProblemInstance build_problem(BipartiteStructure structure, BlockCoupling coupling,
                              std::vector<LocalObjective> objectives) {
  const int M = structure.num_agents();
  const int Mbar = structure.num_blocks();
  if (static_cast<int>(objectives.size()) != M) {
    throw Error(ErrorCode::kDimensionMismatch, "expected " + std::to_string(M) + " objectives, got " +
                                                   std::to_string(objectives.size()));
  }
  if (static_cast<int>(coupling.eq_rows.size()) != Mbar || static_cast<int>(coupling.ineq_rows.size()) != Mbar) {
    throw Error(ErrorCode::kDimensionMismatch, "row counts must be given for every constraint block");
  }

  ProblemInstance inst;
  inst.agent_offset_.assign(static_cast<std::size_t>(M) + 1, 0);
  inst.eq_offset_.assign(static_cast<std::size_t>(Mbar) + 1, 0);
  inst.ineq_offset_.assign(static_cast<std::size_t>(Mbar) + 1, 0);
  double sigma_f = kInf;
  for (int i = 0; i < M; ++i) {
    const LocalObjective& obj = objectives[static_cast<std::size_t>(i)];
    if (!(obj.sigma() > 0.0)) {
      throw Error(ErrorCode::kNonPositiveStrongConvexity, "agent " + std::to_string(i) + " has sigma <= 0");
    }
    if (structure.agent_neighbors(i).empty()) {
      throw Error(ErrorCode::kDecoupledAgent, "agent " + std::to_string(i) + " has no constraint block");
    }
    sigma_f = std::min(sigma_f, obj.sigma());
    inst.agent_offset_[static_cast<std::size_t>(i) + 1] = inst.agent_offset_[static_cast<std::size_t>(i)] + obj.dimension();
  }
  for (int j = 0; j < Mbar; ++j) {
    const int pj = coupling.eq_rows[static_cast<std::size_t>(j)];
    const int qj = coupling.ineq_rows[static_cast<std::size_t>(j)];
    if (pj < 0 || qj < 0) throw Error(ErrorCode::kDimensionMismatch, "negative row count in block " + std::to_string(j));
    inst.eq_offset_[static_cast<std::size_t>(j) + 1] = inst.eq_offset_[static_cast<std::size_t>(j)] + pj;
    inst.ineq_offset_[static_cast<std::size_t>(j) + 1] = inst.ineq_offset_[static_cast<std::size_t>(j)] + qj;
  }
  inst.n_ = inst.agent_offset_.back();
  inst.p_ = inst.eq_offset_.back();
  inst.q_ = inst.ineq_offset_.back();

  if (coupling.b.size() != inst.p_) throw Error(ErrorCode::kDimensionMismatch, "b has wrong length");
  if (coupling.c.size() != inst.q_) throw Error(ErrorCode::kDimensionMismatch, "c has wrong length");

  for (auto& [key, blk] : coupling.blocks) {
    const auto [j, i] = key;
    if (!structure.connected(j, i)) {
      throw Error(ErrorCode::kBlockOutsideIncidence, "block stored at non-edge " + edge_name(j, i));
    }
    const Index ni = inst.agent_offset_[static_cast<std::size_t>(i) + 1] - inst.agent_offset_[static_cast<std::size_t>(i)];
    const Index pj = coupling.eq_rows[static_cast<std::size_t>(j)];
    const Index qj = coupling.ineq_rows[static_cast<std::size_t>(j)];
    // an empty matrix stands for a zero block of the right shape
    if (blk.eq.size() == 0) blk.eq = Matrix::Zero(pj, ni);
    if (blk.ineq.size() == 0) blk.ineq = Matrix::Zero(qj, ni);
    if (blk.eq.rows() != pj || blk.eq.cols() != ni || blk.ineq.rows() != qj || blk.ineq.cols() != ni) {
      throw Error(ErrorCode::kDimensionMismatch, "block " + edge_name(j, i) + " has wrong shape");
    }
  }
  // Edges without an explicit block are legal: they carry zero blocks.
  for (const auto& [j, i] : structure.edges()) {
    if (coupling.blocks.count({j, i}) == 0) {
      const Index ni = inst.agent_offset_[static_cast<std::size_t>(i) + 1] - inst.agent_offset_[static_cast<std::size_t>(i)];
      coupling.blocks[{j, i}] = CouplingBlock{Matrix::Zero(coupling.eq_rows[static_cast<std::size_t>(j)], ni),
                                              Matrix::Zero(coupling.ineq_rows[static_cast<std::size_t>(j)], ni)};
    }
  }

  inst.structure_ = std::move(structure);
  inst.coupling_ = std::move(coupling);
  inst.objectives_ = std::move(objectives);
  inst.sigma_f_ = M > 0 ? sigma_f : 0.0;
  return inst;
}

namespace {

// Plain loops rather than Eigen products: vectorized kernels may reorder a sum
// depending on pointer alignment, and the simulator must round identically.
Vector matvec(const Matrix& m, const Vector& x) {
  Vector out(m.rows());
  for (Index r = 0; r < m.rows(); ++r) {
    double acc = 0.0;
    for (Index c = 0; c < m.cols(); ++c) acc += m(r, c) * x[c];
    out[r] = acc;
  }
  return out;
}

void add_transposed(Vector& price, const Matrix& m, const Eigen::Ref<const Vector>& y) {
  for (Index c = 0; c < m.cols(); ++c) {
    double acc = 0.0;
    for (Index r = 0; r < m.rows(); ++r) acc += m(r, c) * y[r];
    price[c] += acc;
  }
}

}  // namespace

BlockProduct block_product(const CouplingBlock& block, const Vector& z_i) {
  return BlockProduct{matvec(block.eq, z_i), matvec(block.ineq, z_i)};
}

void accumulate_price(Vector& price, const CouplingBlock& block, const Eigen::Ref<const Vector>& nu_j,
                      const Eigen::Ref<const Vector>& mu_j) {
  add_transposed(price, block.eq, nu_j);
  add_transposed(price, block.ineq, mu_j);
}

void accumulate_product(Vector& eq_acc, Vector& ineq_acc, const BlockProduct& product) {
  eq_acc += product.eq;
  ineq_acc += product.ineq;
}

ConstraintResidual multiply_G(const ProblemInstance& instance, const Vector& z) {
  if (z.size() != instance.n()) throw Error(ErrorCode::kDimensionMismatch, "z has wrong length");
  ConstraintResidual out{Vector::Zero(instance.p()), Vector::Zero(instance.q())};
  for (int j = 0; j < instance.num_blocks(); ++j) {
    Vector eq = Vector::Zero(instance.eq_rows(j));
    Vector ineq = Vector::Zero(instance.ineq_rows(j));
    for (int i : instance.structure().block_neighbors(j)) {
      const Vector zi = z.segment(instance.agent_offset(i), instance.agent_dim(i));
      accumulate_product(eq, ineq, block_product(instance.block(j, i), zi));
    }
    out.eq.segment(instance.eq_offset(j), eq.size()) = eq;
    out.ineq.segment(instance.ineq_offset(j), ineq.size()) = ineq;
  }
  return out;
}

ConstraintResidual apply_G(const ProblemInstance& instance, const Vector& z) {
  ConstraintResidual r = multiply_G(instance, z);
  r.eq -= instance.coupling().b;
  r.ineq -= instance.coupling().c;
  return r;
}

Vector agent_price(const ProblemInstance& instance, int i, const DualPoint& lambda) {
  if (lambda.p() != instance.p() || lambda.q() != instance.q()) {
    throw Error(ErrorCode::kDimensionMismatch, "multiplier has wrong shape");
  }
  Vector price = Vector::Zero(instance.agent_dim(i));
  const auto nu = lambda.nu();
  const auto mu = lambda.mu();
  for (int j : instance.structure().agent_neighbors(i)) {
    accumulate_price(price, instance.block(j, i), nu.segment(instance.eq_offset(j), instance.eq_rows(j)),
                     mu.segment(instance.ineq_offset(j), instance.ineq_rows(j)));
  }
  return price;
}

Vector apply_G_transpose(const ProblemInstance& instance, const DualPoint& lambda) {
  Vector out(instance.n());
  for (int i = 0; i < instance.num_agents(); ++i) {
    out.segment(instance.agent_offset(i), instance.agent_dim(i)) = agent_price(instance, i, lambda);
  }
  return out;
}

}  // namespace dualdecomp
