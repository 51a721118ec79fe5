#include <gtest/gtest.h>

#include "oracles.hpp"
#include "structrl/environments/machine_replacement.hpp"
#include "structrl/environments/slow_server.hpp"
#include "structrl/mdp.hpp"

using namespace structrl;

TEST(TabularMDP, OneStateValidates) {
  TabularMDP m(1);
  m.add_action(0, 0, {1.0}, {0.5});
  const auto report = validate(m);
  EXPECT_TRUE(report.ok());
  EXPECT_TRUE(report.violations.empty());
  EXPECT_TRUE(report.unreachable.empty());
}

TEST(TabularMDP, RowSumViolationNamesThePair) {
  TabularMDP m(2);
  m.add_action(0, 0, {0.5, 0.5});
  m.add_action(1, 3, {0.6, 0.3});
  const auto report = validate(m);
  ASSERT_EQ(report.violations.size(), 1u);
  const auto& v = report.violations[0];
  EXPECT_EQ(v.kind, Violation::Kind::RowSum);
  EXPECT_EQ(v.state, 1u);
  EXPECT_EQ(v.action, 3u);
  EXPECT_NE(v.message.find("(1,3)"), std::string::npos);
}

TEST(TabularMDP, ReportsEachKindOfViolation) {
  TabularMDP m(3);
  m.add_action(0, 0);                          // declared, no row
  m.add_action(1, 0, {0.5, 0.5});               // wrong length
  m.add_action(2, 0, {1.2, -0.2, 0.0}, {2.0, 0.0, 0.0});
  auto report = validate(m);
  std::vector<Violation::Kind> kinds;
  for (const auto& v : report.violations) kinds.push_back(v.kind);
  EXPECT_NE(std::find(kinds.begin(), kinds.end(), Violation::Kind::MissingTransition), kinds.end());
  EXPECT_NE(std::find(kinds.begin(), kinds.end(), Violation::Kind::RowLength), kinds.end());
  EXPECT_NE(std::find(kinds.begin(), kinds.end(), Violation::Kind::NegativeProbability), kinds.end());
  EXPECT_NE(std::find(kinds.begin(), kinds.end(), Violation::Kind::RewardRange), kinds.end());
  EXPECT_FALSE(report.ok());

  TabularMDP empty(2);
  empty.add_action(0, 0, {1.0, 0.0});
  report = validate(empty);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].kind, Violation::Kind::EmptyActionSet);
}

TEST(TabularMDP, RowSumToleranceIsTight) {
  TabularMDP m(2);
  m.add_action(0, 0, {0.5, 0.5 + 5e-13});
  m.add_action(1, 0, {0.5, 0.5 + 5e-12});
  const auto report = validate(m);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].state, 1u);
}

TEST(TabularMDP, UnreachableStatesAreInformational) {
  TabularMDP m(3);
  m.add_action(0, 0, {0.0, 1.0, 0.0});
  m.add_action(1, 0, {1.0, 0.0, 0.0});
  m.add_action(2, 0, {1.0, 0.0, 0.0});
  const auto report = validate(m);
  EXPECT_TRUE(report.ok());
  EXPECT_EQ(report.unreachable, std::vector<State>{2});
}

TEST(TabularMDP, MachineReplacementInstanceValidates) {
  MachineReplacementConfig config;
  config.n = 20;
  RngStream rng(11);
  const auto m = build_machine_replacement(config, rng);
  const auto report = validate(m);
  EXPECT_TRUE(report.ok());
  EXPECT_TRUE(report.unreachable.empty());
}

TEST(TabularMDP, SlowServerInstanceValidates) {
  const auto m = build_slow_server(SlowServerConfig{});
  const auto report = validate(m, slow_server_start_state());
  EXPECT_TRUE(report.ok());
  // (queue 0, both busy) is only ever a post-decision state when the event
  // rates sum to one.
  EXPECT_EQ(report.unreachable, (std::vector<State>{SlowServerState{0, true, true}.encode()}));
}

TEST(TabularMDP, DuplicateActionAndMissingActionAreContractViolations) {
  TabularMDP m(2);
  m.add_action(0, 1, {1.0, 0.0});
  EXPECT_THROW(m.add_action(0, 1, {1.0, 0.0}), ContractViolation);
  EXPECT_THROW(m.slot(0, 2), ContractViolation);
  EXPECT_THROW(m.add_action(5, 0), ContractViolation);
}

TEST(TabularMDP, PolicyValidity) {
  const auto m = oracle::two_cycle();
  EXPECT_TRUE(is_valid_policy(m, {{0, 0}}));
  EXPECT_FALSE(is_valid_policy(m, {{0, 1}}));
  EXPECT_FALSE(is_valid_policy(m, {{0}}));
  EXPECT_THROW(require_valid_policy(m, {{1, 0}}), ContractViolation);
}

TEST(TabularMDP, JsonRoundTrip) {
  const auto m = oracle::random_dense(4, 2, 5);
  const auto j = to_json(m);
  const auto back = mdp_from_json(j);
  EXPECT_EQ(back, m);
  EXPECT_EQ(to_json(back).dump(), j.dump());
}

TEST(TabularMDP, JsonRejectsMalformedDocuments) {
  EXPECT_THROW(mdp_from_json(nlohmann::json::parse(R"({"num_states": 2})")), ConfigError);
  EXPECT_THROW(mdp_from_json(nlohmann::json::parse(
                   R"({"num_states": 1, "actions": [[0]], "transitions": {"0,1": [1.0]}})")),
               ConfigError);
  EXPECT_THROW(mdp_from_json(nlohmann::json::parse(
                   R"({"num_states": 1, "actions": [[0]], "transitions": {"zero": [1.0]}})")),
               ConfigError);
  EXPECT_THROW(mdp_from_json(nlohmann::json::parse(
                   R"({"num_states": 1, "actions": [[0, 0]], "transitions": {}})")),
               ConfigError);
}
