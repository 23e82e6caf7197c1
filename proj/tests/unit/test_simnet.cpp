#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dualdecomp/apps.hpp"
#include "dualdecomp/builtin.hpp"
#include "dualdecomp/error.hpp"
#include "dualdecomp/simnet.hpp"
#include "support.hpp"

using namespace dualdecomp;

namespace {

ProblemInstance case9() { return build_dcopf(load_matpower(testsupport::data_path("cases/case9.m"))).instance; }

std::vector<double> block_weights(const ProblemInstance& inst) {
  return weight_matrix(inst, lipschitz_profile(inst, false)).block;
}

}  // namespace

TEST(Simnet, MessageOnNonEdgeIsRejected) {
  const ProblemInstance inst = case9();
  Network net(inst, block_weights(inst));
  // Balance row 0 does not involve a bus that is not adjacent to bus 1.
  int stranger = -1;
  for (int i = 0; i < inst.num_agents(); ++i) {
    if (!inst.structure().connected(0, i)) {
      stranger = i;
      break;
    }
  }
  ASSERT_GE(stranger, 0);
  Message m;
  m.block = 0;
  m.agent = stranger;
  m.first = Vector::Zero(1);
  m.second = Vector::Zero(0);
  try {
    net.deliver(m);
    FAIL() << "expected ForeignEdge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kForeignEdge);
  }
}

TEST(Simnet, DroppedMessageIsDetected) {
  const ProblemInstance inst = case9();
  Network net(inst, block_weights(inst));
  const int j = inst.structure().agent_neighbors(0).front();
  net.drop(0, j);
  try {
    net.run_round(RoundKind::kPrimal);
    FAIL() << "expected MissingMessage";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingMessage);
  }
}

TEST(Simnet, RoundsUseExactlyTheEdgeSet) {
  const ProblemInstance inst = case9();
  Network net(inst, block_weights(inst));
  const auto& edges = inst.structure().edges();
  const std::set<std::pair<int, int>> expected(edges.begin(), edges.end());
  for (RoundKind kind : {RoundKind::kPrimal, RoundKind::kDualFastGradient, RoundKind::kPrimal,
                         RoundKind::kDualGradient}) {
    net.run_round(kind);
    std::set<std::pair<int, int>> seen;
    for (const Message& m : net.last_messages()) {
      seen.emplace(m.block, m.agent);
      EXPECT_EQ(m.direction, kind == RoundKind::kPrimal ? Direction::kAgentToBlock : Direction::kBlockToAgent);
      EXPECT_EQ(m.round, net.round());
    }
    EXPECT_EQ(seen, expected);
    EXPECT_EQ(net.last_messages().size(), edges.size());
  }
}

TEST(Simnet, EquivalenceOnCase9) {
  const ProblemInstance inst = case9();
  for (Method m : {Method::kDg, Method::kDfg, Method::kHdfg}) {
    EquivalenceOptions options;
    options.method = m;
    options.iterations = 100;
    const EquivalenceReport report = verify_equivalence(inst, options);
    EXPECT_TRUE(report.pass) << to_string(m);
    EXPECT_TRUE(report.locality_ok) << to_string(m);
    EXPECT_LE(report.max_lambda_deviation, 1e-12);
    EXPECT_EQ(report.iterations, 100);
    EXPECT_FALSE(report.first_divergent_iteration.has_value());
  }
  EquivalenceOptions centralized;
  centralized.step_mode = StepMode::kCentralized;
  EXPECT_TRUE(verify_equivalence(inst, centralized).pass);
}

TEST(Simnet, CorruptedWeightIsCaught) {
  const ProblemInstance inst = case9();
  EquivalenceOptions options;
  options.method = Method::kDfg;
  options.corrupt_block = 3;
  const EquivalenceReport report = verify_equivalence(inst, options);
  EXPECT_FALSE(report.pass);
  ASSERT_TRUE(report.first_divergent_iteration.has_value());
  EXPECT_LT(*report.first_divergent_iteration, 100);
}

TEST(Simnet, LogIsJsonLines) {
  const ProblemInstance inst = builtin::num_two_source();
  Network net(inst, block_weights(inst));
  std::ostringstream log;
  net.set_log(&log);
  net.run_round(RoundKind::kPrimal);
  net.run_round(RoundKind::kDualGradient);
  std::istringstream lines(log.str());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const auto doc = nlohmann::json::parse(line);
    EXPECT_TRUE(doc.contains("round"));
    EXPECT_TRUE(doc.contains("payload_norm"));
    ++count;
  }
  EXPECT_EQ(count, 2 * static_cast<int>(inst.structure().edges().size()));
}

TEST(Simnet, ZeroStartMatchesCentralizedFirstEvaluation) {
  const ProblemInstance inst = testsupport::random_instance(8, {5, 4, true});
  Network net(inst, block_weights(inst));
  net.run_round(RoundKind::kPrimal);
  EXPECT_EQ(net.z(), dual_value_grad(inst, inst.zero_dual()).z);
}
