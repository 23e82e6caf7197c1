#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dualdecomp/algorithms.hpp"
#include "dualdecomp/model.hpp"
#include "dualdecomp/oracle.hpp"

namespace dualdecomp {

enum class Direction { kBlockToAgent, kAgentToBlock };

/// One message on edge (block, agent). Block-to-agent messages carry λ_j;
/// agent-to-block messages carry A_ji z_i and C_ji z_i.
struct Message {
  long round = 0;
  int agent = 0;
  int block = 0;
  Direction direction = Direction::kBlockToAgent;
  Vector first;   ///< ν_j or A_ji z_i
  Vector second;  ///< μ_j or C_ji z_i
};

enum class RoundKind {
  kPrimal,            ///< agents solve and send products
  kDualFastGradient,  ///< blocks take the accelerated step
  kDualGradient,      ///< blocks take a projected gradient step
  kDualAccumulate,    ///< last accelerated evaluation: blocks move to λ̂ and switch to gradient steps
};

/// Holds z_i and copies of the blocks A_ji, C_ji for j in N_i only.
class AgentNode {
 public:
  AgentNode(int id, const LocalObjective& objective, std::map<int, CouplingBlock> blocks);
  int id() const { return id_; }
  const Vector& z() const { return z_; }
  /// Solves the local problem from one λ_j message per neighbour (ascending j)
  /// and returns the outgoing product messages.
  std::vector<Message> primal(const std::map<int, Message>& inbox, long round);

 private:
  int id_;
  const LocalObjective* objective_;
  std::map<int, CouplingBlock> blocks_;
  Vector z_;
};

/// Holds λ_j, λ̂_j, the accumulator S_j and the scalar w_j.
class ConstraintNode {
 public:
  ConstraintNode(int id, std::vector<int> neighbors, double weight, Vector b, Vector c);
  int id() const { return id_; }
  const Vector& lambda() const { return lambda_; }
  Index eq_rows() const { return b_.size(); }
  void reset();
  std::vector<Message> announce(long round) const;
  std::vector<Message> dual(RoundKind kind, const std::map<int, Message>& inbox, long round);

 private:
  int id_;
  std::vector<int> neighbors_;
  double weight_;
  Vector b_;
  Vector c_;
  Vector lambda_;
  Vector hat_;
  Vector S_;
  long k_ = 0;
};

/// Bulk-synchronous network built from one problem instance.
class Network {
 public:
  /// `block_weights[j]` is w_j (or L_d for centralized steps).
  Network(const ProblemInstance& instance, const std::vector<double>& block_weights);

  /// Executes one half-round; messages produced are delivered for the next one.
  void run_round(RoundKind kind);
  /// Puts λ = 0 everywhere and re-announces it (used between H-DFG rounds).
  void reset();

  /// Delivers an externally created message; rejects non-edges with ForeignEdge.
  void deliver(const Message& message);
  /// Removes a pending message, for fault-injection tests.
  void drop(int agent, int block);

  long round() const { return round_; }
  const std::vector<Message>& last_messages() const { return last_; }
  DualPoint lambda() const;
  Vector z() const;

  /// Optional JSON-lines message log: round, edge, direction, payload norm.
  void set_log(std::ostream* log) { log_ = log; }

 private:
  void post(std::vector<Message> messages);

  const ProblemInstance* instance_;
  std::vector<AgentNode> agents_;
  std::vector<ConstraintNode> blocks_;
  std::vector<std::map<int, Message>> agent_inbox_;  ///< keyed by block
  std::vector<std::map<int, Message>> block_inbox_;  ///< keyed by agent
  std::vector<Message> last_;
  std::ostream* log_ = nullptr;
  long round_ = 0;
};

struct EquivalenceOptions {
  Method method = Method::kDfg;
  StepMode step_mode = StepMode::kDistributed;
  long iterations = 100;
  double tolerance = 1e-12;
  /// Fault injection: scale w_j of this block in the simulator only.
  std::optional<int> corrupt_block;
  double corrupt_factor = 1.001;
  std::ostream* log = nullptr;
};

struct EquivalenceReport {
  bool pass = true;
  long iterations = 0;
  double max_lambda_deviation = 0.0;
  double max_z_deviation = 0.0;
  std::optional<long> first_divergent_iteration;
  std::vector<double> lambda_deviation;  ///< per iteration
  std::vector<double> z_deviation;       ///< per iteration
  bool locality_ok = true;               ///< every round used exactly the edge set
};

/// Runs the simulator and the centralized driver side by side.
EquivalenceReport verify_equivalence(const ProblemInstance& instance, const EquivalenceOptions& options);
EquivalenceReport verify_equivalence(const ProblemInstance& instance, const LipschitzProfile& profile,
                                     const EquivalenceOptions& options);

/// max_k |a_k − b_k| / max(|a_k|, |b_k|), zero where both agree exactly.
double max_relative_deviation(const Vector& a, const Vector& b);

}  // namespace dualdecomp
