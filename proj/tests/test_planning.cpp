#include <gtest/gtest.h>

#include "oracles.hpp"
#include "structrl/chain.hpp"
#include "structrl/environments/machine_replacement.hpp"
#include "structrl/environments/slow_server.hpp"
#include "structrl/planning.hpp"

using namespace structrl;

TEST(Planning, OneStatePicksBetterAction) {
  TabularMDP m(1);
  m.add_action(0, 0, {1.0}, {0.2});
  m.add_action(0, 1, {1.0}, {0.9});
  const auto plan = average_reward_optimal(m);
  EXPECT_EQ(plan.policy.action_of, std::vector<Action>{1});
  EXPECT_NEAR(plan.gain, 0.9, 1e-12);
}

TEST(Planning, ThreeStateMachineToyMatchesEnumeration) {
  // Continue drifts the machine downhill; maintenance costs 0.6 per use.
  TabularMDP m(3);
  const std::vector<double> run_reward{1.0, 0.7, 0.1};
  const std::vector<std::vector<double>> drift{{0.6, 0.3, 0.1}, {0.0, 0.7, 0.3}, {0.0, 0.0, 1.0}};
  for (State i = 0; i < 3; ++i) {
    m.add_action(i, 0, drift[i], std::vector<double>(3, run_reward[i]));
    m.add_action(i, 1, {1.0, 0.0, 0.0}, {0.4, 0.0, 0.0});
  }
  const auto best = oracle::enumerate_best(m, 0, 20000);
  const auto plan = average_reward_optimal(m);
  EXPECT_NEAR(plan.gain, best.gain, 1e-8);
  EXPECT_NEAR(evaluate_policy(m, plan.policy).avg_reward, best.gain, 1e-12);
  EXPECT_TRUE(is_threshold_policy(plan.policy));
  // Worked out by hand: repair as soon as the machine leaves the top state.
  EXPECT_EQ(plan.policy.action_of, (std::vector<Action>{0, 1, 1}));
}

TEST(Planning, GainDominatesEveryPolicy) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto m = oracle::random_dense(6, 2, 100 + seed);
    const auto plan = average_reward_optimal(m);
    const double planned = evaluate_policy(m, plan.policy).avg_reward;
    oracle::for_each_policy(m, [&](const DeterministicPolicy& pi) {
      EXPECT_LE(evaluate_policy(m, pi).avg_reward, planned + 1e-9);
    });
    EXPECT_NEAR(plan.gain, planned, 1e-8);
  }
}

TEST(Planning, SlowServerKeepsFastServerBusy) {
  SlowServerConfig config;
  config.buffer = 5;
  const auto m = build_slow_server(config);
  const auto plan = average_reward_optimal(m);
  EXPECT_TRUE(keeps_fast_server_busy(config, plan.policy));
}

TEST(Planning, HandlesPeriodicOptimalChains) {
  const auto m = oracle::two_cycle();
  const auto plan = average_reward_optimal(m);
  EXPECT_NEAR(plan.gain, 0.5, 1e-9);
}

TEST(Planning, BiasIsPinnedAtReferenceState) {
  const auto m = oracle::random_dense(5, 3, 9);
  PlanningOptions opts;
  opts.reference_state = 2;
  const auto plan = average_reward_optimal(m, opts);
  EXPECT_EQ(plan.bias[2], 0.0);
  EXPECT_LT(plan.span, opts.tolerance);
}

TEST(Planning, WarmStartReachesTheSameAnswer) {
  const auto m = oracle::random_dense(8, 2, 4);
  const auto cold = average_reward_optimal(m);
  PlanningOptions warm;
  warm.initial_bias = cold.bias;
  const auto again = average_reward_optimal(m, warm);
  EXPECT_EQ(again.policy, cold.policy);
  EXPECT_NEAR(again.gain, cold.gain, 1e-8);
  EXPECT_LE(again.iterations, cold.iterations);
}

TEST(Planning, NonConvergenceIsReported) {
  const auto m = oracle::random_dense(5, 2, 3);
  PlanningOptions opts;
  opts.max_iters = 1;
  opts.tolerance = 1e-15;
  EXPECT_THROW(average_reward_optimal(m, opts), ConvergenceError);
}

TEST(BestStructured, SingletonFamily) {
  const auto m = oracle::random_dense(3, 2, 1);
  const std::vector<DeterministicPolicy> family{oracle::constant_policy(3, 1)};
  const auto best = best_structured_policy(m, family);
  EXPECT_EQ(best.index, 0u);
  EXPECT_EQ(best.gain, evaluate_policy(m, family[0]).avg_reward);
}

TEST(BestStructured, PicksHigherGain) {
  TabularMDP m(1);
  m.add_action(0, 0, {1.0}, {0.3});
  m.add_action(0, 1, {1.0}, {0.7});
  const std::vector<DeterministicPolicy> family{{{0}}, {{1}}};
  const auto best = best_structured_policy(m, family);
  EXPECT_EQ(best.index, 1u);
  EXPECT_DOUBLE_EQ(best.gain, 0.7);
}

TEST(BestStructured, TiesGoToLowestIndex) {
  TabularMDP m(1);
  m.add_action(0, 0, {1.0}, {0.5});
  m.add_action(0, 1, {1.0}, {0.5});
  const std::vector<DeterministicPolicy> family{{{1}}, {{0}}};
  EXPECT_EQ(best_structured_policy(m, family).index, 0u);
}

TEST(BestStructured, MultichainMemberIsNamed) {
  TabularMDP m(2);
  m.add_action(0, 0, {1.0, 0.0});
  m.add_action(0, 1, {0.0, 1.0});
  m.add_action(1, 0, {0.0, 1.0});
  m.add_action(1, 1, {1.0, 0.0});
  const std::vector<DeterministicPolicy> family{{{1, 1}}, {{0, 0}}};
  try {
    best_structured_policy(m, family);
    FAIL() << "expected MultichainError";
  } catch (const MultichainError& e) {
    ASSERT_TRUE(e.policy_index().has_value());
    EXPECT_EQ(*e.policy_index(), 1u);
  }
}

TEST(BestStructured, MachineReplacementFamilyContainsOptimum) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    MachineReplacementConfig config;
    config.n = 6;
    RngStream rng(seed);
    const auto m = build_machine_replacement(config, rng);
    const auto family = machine_replacement_policies(6);
    const auto best = best_structured_policy(m, family.policies);
    const auto plan = average_reward_optimal(m);
    EXPECT_NEAR(best.gain, plan.gain, 1e-8);
  }
}

TEST(BestStructured, RewardScalingKeepsArgmax) {
  MachineReplacementConfig config;
  config.n = 6;
  RngStream rng(3);
  const auto m = build_machine_replacement(config, rng);
  const auto family = machine_replacement_policies(6).policies;
  const auto base = best_structured_policy(m, family);
  for (double alpha : {0.1, 0.5, 0.9}) {
    TabularMDP scaled(m.num_states());
    for (State s = 0; s < m.num_states(); ++s)
      for (Action a : m.actions(s)) {
        auto r = m.rewards(s, a);
        std::vector<double> rs(r.begin(), r.end());
        for (auto& x : rs) x *= alpha;
        auto p = m.transition(s, a);
        scaled.add_action(s, a, {p.begin(), p.end()}, rs);
      }
    const auto best = best_structured_policy(scaled, family);
    EXPECT_EQ(best.index, base.index);
    EXPECT_NEAR(best.gain, alpha * base.gain, 1e-12);
    for (const auto& pi : family)
      EXPECT_NEAR(evaluate_policy(scaled, pi).avg_reward, alpha * evaluate_policy(m, pi).avg_reward, 1e-12);
  }
}
