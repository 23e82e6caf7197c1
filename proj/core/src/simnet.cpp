#include "dualdecomp/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include <fmt/format.h>

#include "dualdecomp/error.hpp"

namespace dualdecomp {

namespace {

std::string edge_text(int block, int agent) {
  return "(" + std::to_string(block) + ", " + std::to_string(agent) + ")";
}

}  // namespace

double max_relative_deviation(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return kInf;
  double worst = 0.0;
  for (Index k = 0; k < a.size(); ++k) {
    if (a[k] == b[k]) continue;
    const double scale = std::max(std::abs(a[k]), std::abs(b[k]));
    worst = std::max(worst, std::abs(a[k] - b[k]) / scale);
  }
  return worst;
}

// ---------------------------------------------------------------------------

AgentNode::AgentNode(int id, const LocalObjective& objective, std::map<int, CouplingBlock> blocks)
    : id_(id), objective_(&objective), blocks_(std::move(blocks)), z_(Vector::Zero(objective.dimension())) {}

std::vector<Message> AgentNode::primal(const std::map<int, Message>& inbox, long round) {
  Vector price = Vector::Zero(objective_->dimension());
  for (const auto& [j, blk] : blocks_) {
    auto it = inbox.find(j);
    if (it == inbox.end()) {
      throw Error(ErrorCode::kMissingMessage, "agent " + std::to_string(id_) + " has no multiplier from block " +
                                                  std::to_string(j));
    }
    accumulate_price(price, blk, it->second.first, it->second.second);
  }
  z_ = objective_->minimize(price);
  std::vector<Message> out;
  out.reserve(blocks_.size());
  for (const auto& [j, blk] : blocks_) {
    BlockProduct prod = block_product(blk, z_);
    out.push_back(Message{round, id_, j, Direction::kAgentToBlock, std::move(prod.eq), std::move(prod.ineq)});
  }
  return out;
}

ConstraintNode::ConstraintNode(int id, std::vector<int> neighbors, double weight, Vector b, Vector c)
    : id_(id), neighbors_(std::move(neighbors)), weight_(weight), b_(std::move(b)), c_(std::move(c)) {
  reset();
}

void ConstraintNode::reset() {
  const Index m = b_.size() + c_.size();
  lambda_ = Vector::Zero(m);
  hat_ = Vector::Zero(m);
  S_ = Vector::Zero(m);
  k_ = 0;
}

std::vector<Message> ConstraintNode::announce(long round) const {
  std::vector<Message> out;
  out.reserve(neighbors_.size());
  const Index p = b_.size();
  for (int i : neighbors_) {
    out.push_back(Message{round, i, id_, Direction::kBlockToAgent, lambda_.head(p), lambda_.tail(c_.size())});
  }
  return out;
}

std::vector<Message> ConstraintNode::dual(RoundKind kind, const std::map<int, Message>& inbox, long round) {
  const Index p = b_.size();
  const Index q = c_.size();
  Vector eq = Vector::Zero(p);
  Vector ineq = Vector::Zero(q);
  for (int i : neighbors_) {
    auto it = inbox.find(i);
    if (it == inbox.end()) {
      throw Error(ErrorCode::kMissingMessage, "block " + std::to_string(id_) + " has no product from agent " +
                                                  std::to_string(i));
    }
    accumulate_product(eq, ineq, BlockProduct{it->second.first, it->second.second});
  }
  eq -= b_;
  ineq -= c_;
  Vector grad(p + q);
  grad.head(p) = eq;
  grad.tail(q) = ineq;

  auto project = [&](Vector& v) { v.tail(q) = v.tail(q).cwiseMax(0.0); };
  const Vector w = Vector::Constant(p + q, weight_);

  if (kind == RoundKind::kDualGradient) {
    Vector next = lambda_ + grad.cwiseQuotient(w);
    project(next);
    lambda_ = std::move(next);
  } else if (kind == RoundKind::kDualFastGradient || kind == RoundKind::kDualAccumulate) {
    const double k = static_cast<double>(k_);
    hat_ = lambda_ + grad.cwiseQuotient(w);
    project(hat_);
    if (kind == RoundKind::kDualAccumulate) {
      lambda_ = hat_;
    } else {
      S_ += (k + 1.0) / 2.0 * grad;
      Vector tail = Vector::Zero(p + q) + S_.cwiseQuotient(w);
      project(tail);
      lambda_ = (k + 1.0) / (k + 3.0) * hat_ + 2.0 / (k + 3.0) * tail;
      ++k_;
    }
  } else {
    throw Error(ErrorCode::kInvalidArgument, "constraint nodes do not run primal rounds");
  }
  return announce(round);
}

// ---------------------------------------------------------------------------

Network::Network(const ProblemInstance& instance, const std::vector<double>& block_weights) : instance_(&instance) {
  if (static_cast<int>(block_weights.size()) != instance.num_blocks()) {
    throw Error(ErrorCode::kDimensionMismatch, "one weight per constraint block is required");
  }
  for (int i = 0; i < instance.num_agents(); ++i) {
    std::map<int, CouplingBlock> local;
    for (int j : instance.structure().agent_neighbors(i)) local.emplace(j, instance.block(j, i));
    agents_.emplace_back(i, instance.objective(i), std::move(local));
  }
  for (int j = 0; j < instance.num_blocks(); ++j) {
    blocks_.emplace_back(j, instance.structure().block_neighbors(j), block_weights[static_cast<std::size_t>(j)],
                         instance.coupling().b.segment(instance.eq_offset(j), instance.eq_rows(j)),
                         instance.coupling().c.segment(instance.ineq_offset(j), instance.ineq_rows(j)));
  }
  agent_inbox_.resize(agents_.size());
  block_inbox_.resize(blocks_.size());
  reset();
}

void Network::reset() {
  for (auto& box : agent_inbox_) box.clear();
  for (auto& box : block_inbox_) box.clear();
  std::vector<Message> out;
  for (ConstraintNode& node : blocks_) {
    node.reset();
    auto msgs = node.announce(round_);
    out.insert(out.end(), std::make_move_iterator(msgs.begin()), std::make_move_iterator(msgs.end()));
  }
  post(std::move(out));
}

void Network::deliver(const Message& message) {
  if (!instance_->structure().connected(message.block, message.agent)) {
    throw Error(ErrorCode::kForeignEdge, "no edge " + edge_text(message.block, message.agent));
  }
  if (message.direction == Direction::kBlockToAgent) {
    agent_inbox_[static_cast<std::size_t>(message.agent)][message.block] = message;
  } else {
    block_inbox_[static_cast<std::size_t>(message.block)][message.agent] = message;
  }
}

void Network::drop(int agent, int block) {
  if (agent >= 0 && agent < static_cast<int>(agent_inbox_.size())) agent_inbox_[static_cast<std::size_t>(agent)].erase(block);
  if (block >= 0 && block < static_cast<int>(block_inbox_.size())) block_inbox_[static_cast<std::size_t>(block)].erase(agent);
}

void Network::post(std::vector<Message> messages) {
  for (const Message& m : messages) deliver(m);
  if (log_ != nullptr) {
    for (const Message& m : messages) {
      const double norm = std::sqrt(m.first.squaredNorm() + m.second.squaredNorm());
      *log_ << fmt::format(R"({{"round":{},"agent":{},"block":{},"direction":"{}","payload_norm":{:.17g}}})", m.round,
                           m.agent, m.block,
                           m.direction == Direction::kAgentToBlock ? "agent_to_block" : "block_to_agent", norm)
            << '\n';
    }
  }
  last_ = std::move(messages);
}

void Network::run_round(RoundKind kind) {
  ++round_;
  std::vector<Message> out;
  if (kind == RoundKind::kPrimal) {
    for (AgentNode& node : agents_) {
      auto msgs = node.primal(agent_inbox_[static_cast<std::size_t>(node.id())], round_);
      out.insert(out.end(), std::make_move_iterator(msgs.begin()), std::make_move_iterator(msgs.end()));
    }
    for (auto& box : agent_inbox_) box.clear();
  } else {
    for (ConstraintNode& node : blocks_) {
      auto msgs = node.dual(kind, block_inbox_[static_cast<std::size_t>(node.id())], round_);
      out.insert(out.end(), std::make_move_iterator(msgs.begin()), std::make_move_iterator(msgs.end()));
    }
    for (auto& box : block_inbox_) box.clear();
  }
  post(std::move(out));
}

DualPoint Network::lambda() const {
  DualPoint out = instance_->zero_dual();
  for (const ConstraintNode& node : blocks_) {
    const int j = node.id();
    const Index p = instance_->eq_rows(j);
    out.nu().segment(instance_->eq_offset(j), p) = node.lambda().head(p);
    out.mu().segment(instance_->ineq_offset(j), instance_->ineq_rows(j)) = node.lambda().tail(instance_->ineq_rows(j));
  }
  return out;
}

Vector Network::z() const {
  Vector out(instance_->n());
  for (const AgentNode& node : agents_) {
    out.segment(instance_->agent_offset(node.id()), instance_->agent_dim(node.id())) = node.z();
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool edges_match(const ProblemInstance& instance, const std::vector<Message>& messages) {
  if (messages.size() != instance.structure().edges().size()) return false;
  std::set<std::pair<int, int>> seen;
  for (const Message& m : messages) seen.emplace(m.block, m.agent);
  const auto& edges = instance.structure().edges();
  return seen == std::set<std::pair<int, int>>(edges.begin(), edges.end());
}

}  // namespace

EquivalenceReport verify_equivalence(const ProblemInstance& instance, const EquivalenceOptions& options) {
  return verify_equivalence(instance, lipschitz_profile(instance, options.step_mode == StepMode::kCentralized),
                            options);
}

EquivalenceReport verify_equivalence(const ProblemInstance& instance, const LipschitzProfile& profile,
                                     const EquivalenceOptions& options) {
  const WeightMatrix metric = step_metric(instance, profile, options.step_mode);
  std::vector<double> weights = metric.block;
  if (options.corrupt_block) {
    const int j = *options.corrupt_block;
    if (j < 0 || j >= instance.num_blocks()) throw Error(ErrorCode::kInvalidArgument, "corrupt block out of range");
    weights[static_cast<std::size_t>(j)] *= options.corrupt_factor;
  }

  Network net(instance, weights);
  net.set_log(options.log);
  EquivalenceReport report;

  auto record = [&](const Vector& z_ref, const DualPoint& lambda_ref) {
    const double dz = max_relative_deviation(net.z(), z_ref);
    const double dl = max_relative_deviation(net.lambda().values(), lambda_ref.values());
    report.z_deviation.push_back(dz);
    report.lambda_deviation.push_back(dl);
    report.max_z_deviation = std::max(report.max_z_deviation, dz);
    report.max_lambda_deviation = std::max(report.max_lambda_deviation, dl);
    if ((dz > options.tolerance || dl > options.tolerance) && !report.first_divergent_iteration) {
      report.first_divergent_iteration = report.iterations;
    }
    ++report.iterations;
  };
  auto primal = [&] {
    net.run_round(RoundKind::kPrimal);
    report.locality_ok = report.locality_ok && edges_match(instance, net.last_messages());
  };
  auto dual = [&](RoundKind kind) {
    net.run_round(kind);
    report.locality_ok = report.locality_ok && edges_match(instance, net.last_messages());
  };

  switch (options.method) {
    case Method::kDfg: {
      DfgIterator it(instance, metric);
      for (long t = 0; t < options.iterations; ++t) {
        it.step();
        primal();
        dual(RoundKind::kDualFastGradient);
        record(it.evaluation().z, it.next_lambda());
      }
      break;
    }
    case Method::kDg: {
      DgIterator it(instance, metric);
      for (long t = 0; t < options.iterations; ++t) {
        it.step();
        primal();
        dual(RoundKind::kDualGradient);
        record(it.evaluation().z, it.next_lambda());
      }
      break;
    }
    case Method::kHdfg: {
      long k = 1;
      std::optional<HdfgIterator> it;
      it.emplace(instance, metric, k);
      for (long t = 0; t < options.iterations; ++t) {
        if (it->done()) {
          k *= 2;
          it.emplace(instance, metric, k);
          net.reset();
        }
        const long before = it->evaluations();
        it->step();
        primal();
        if (before < k) {
          dual(RoundKind::kDualFastGradient);
          record(it->evaluation().z, it->next_lambda());
        } else if (before == k) {
          dual(RoundKind::kDualAccumulate);
          record(it->evaluation().z, it->phase1().lambda_hat());
        } else {
          dual(RoundKind::kDualGradient);
          record(it->evaluation().z, it->next_lambda());
        }
      }
      break;
    }
  }
  report.pass = report.locality_ok && !report.first_divergent_iteration;
  return report;
}

}  // namespace dualdecomp
