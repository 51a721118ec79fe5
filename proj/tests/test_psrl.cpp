#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "structrl/agents/agents.hpp"
#include "structrl/agents/psrl.hpp"
#include "structrl/chain.hpp"
#include "structrl/environments/machine_replacement.hpp"

using namespace structrl;

namespace {

/// Feeds `per_pair` sampled transitions of every (s, a) of `m` into `model`.
void saturate(const TabularMDP& m, EmpiricalModel& model, int per_pair, RngStream& rng) {
  for (State s = 0; s < m.num_states(); ++s)
    for (Action a : m.actions(s))
      for (int i = 0; i < per_pair; ++i) {
        const auto out = step(m, s, a, rng);
        model.observe({s, a, out.next, out.reward});
      }
}

}  // namespace

TEST(PsrlState, PriorOnlyPlansAValidPolicy) {
  const auto m = oracle::random_dense(4, 3, 2);
  PsrlState psrl(m, full_support(m));
  RngStream rng(1);
  for (int i = 0; i < 10; ++i) {
    const auto plan = psrl_episode(psrl, rng);
    EXPECT_TRUE(is_valid_policy(m, plan.policy));
  }
  for (State s = 0; s < 4; ++s)
    for (Action a : m.actions(s))
      for (double c : psrl.concentration(s, a)) EXPECT_EQ(c, 1.0);
}

TEST(PsrlState, ConcentrationIsPriorPlusCounts) {
  const auto m = oracle::random_dense(4, 2, 3);
  for (std::uint64_t T : {1u, 7u, 100u, 2500u}) {
    PsrlAgent fresh(PsrlState(m, full_support(m)), 8);
    RngStream r(T);
    run_agent(m, fresh, T, 0, kInfiniteTau, r);
    const auto& st = fresh.state();
    std::uint64_t total = 0;
    for (State s = 0; s < 4; ++s)
      for (Action a : m.actions(s)) {
        const auto& sup = st.support(s, a);
        const auto& conc = st.concentration(s, a);
        for (std::size_t i = 0; i < sup.size(); ++i) {
          const auto count = st.empirical().count(s, a, sup[i]);
          EXPECT_EQ(conc[i], 1.0 + static_cast<double>(count));
          total += count;
        }
      }
    EXPECT_EQ(total, T);
  }
}

TEST(PsrlState, MassivePosteriorRecoversOptimalPolicy) {
  const auto m = oracle::random_dense(3, 2, 17);
  const auto best = oracle::enumerate_best(m, 0, 20000);
  EmpiricalModel model(m);
  RngStream rng(3);
  saturate(m, model, 1'000'000, rng);
  const auto psrl = PsrlState::from_empirical(m, full_support(m), model);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(psrl_episode(psrl, rng).policy, best.policy) << "sample " << i;
}

TEST(PsrlState, SymmetricPosteriorSplitsEvenly) {
  // Both actions at state 0 flip a fair coin; landing on 1 pays 1.
  TabularMDP m(2);
  for (State s = 0; s < 2; ++s)
    for (Action a = 0; a < 2; ++a) m.add_action(s, a, {0.5, 0.5}, {0.0, 1.0});
  EmpiricalModel model(m);
  for (State s = 0; s < 2; ++s)
    for (Action a = 0; a < 2; ++a) {
      model.observe({s, a, 0, 0.0});
      model.observe({s, a, 1, 1.0});
    }
  const auto psrl = PsrlState::from_empirical(m, full_support(m), model);
  RngStream rng(4);
  int first = 0;
  constexpr int kEpisodes = 1000;
  for (int i = 0; i < kEpisodes; ++i) first += psrl_episode(psrl, rng).policy(0) == 0;
  EXPECT_NEAR(static_cast<double>(first) / kEpisodes, 0.5, 0.05);
}

TEST(PsrlState, SupportIsRespected) {
  const std::size_t n = 6;
  MachineReplacementConfig config;
  config.n = n;
  RngStream rng(5);
  const auto m = build_machine_replacement(config, rng);
  PsrlState psrl(m, machine_replacement_support(n));
  for (int i = 0; i < 50; ++i) {
    const auto sampled = psrl.sample_mdp(rng);
    for (State s = 0; s < n; ++s) {
      const auto c = sampled.transition(s, machine::kContinue);
      for (State j = 0; j < s; ++j) EXPECT_EQ(c[j], 0.0);
      const auto pm = sampled.transition(s, machine::kMaintain);
      EXPECT_EQ(pm[0], 1.0);
      double sum = 0.0;
      for (double x : c) sum += x;
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
  EXPECT_THROW(psrl.observe({3, machine::kContinue, 1, 0.5}), ContractViolation);
  for (double c : psrl.concentration(2, machine::kContinue)) EXPECT_GT(c, 0.0);
}

TEST(PsrlState, UnobservedRewardsAreOptimistic) {
  const auto m = oracle::random_dense(2, 1, 5);
  PsrlState psrl(m, full_support(m));
  EXPECT_EQ(psrl.reward_estimate(0, 0, 1), 1.0);
  psrl.observe({0, 0, 1, 0.25});
  EXPECT_EQ(psrl.reward_estimate(0, 0, 1), 0.25);
}

TEST(PsrlAgent, FixedLengthEpisodesWithReset) {
  const auto m = oracle::random_dense(4, 2, 6);
  PsrlAgent agent(PsrlState(m, full_support(m)), 5);
  RngStream rng(6);
  const auto trace = run_agent(m, agent, 103, 0, kInfiniteTau, rng);
  ASSERT_EQ(trace.episodes.size(), 20u);
  for (const auto& e : trace.episodes) {
    EXPECT_EQ(e.duration, 5u);
    EXPECT_EQ(e.end_reason, EndReason::HitTau);
  }
  EXPECT_EQ(trace.partial_steps, 3u);
  EXPECT_EQ(agent.plans(), 21u);
  EXPECT_TRUE(trace.teleported);
}

TEST(WarmPsrl, SwitchAtLastRound) {
  const auto m = oracle::random_dense(4, 2, 7);
  const PolicyFamily family{oracle::constant_policy(4, 0), oracle::constant_policy(4, 1)};
  WarmPsrlConfig config;
  config.horizon = 500;
  config.t_switch = 499;
  RunOptions opts;
  opts.checkpoints = {1, 250, 499, 500};
  RngStream rng(8);
  const auto result = warm_psrl(m, family, full_support(m), config, rng, opts);
  EXPECT_EQ(result.trace.total_steps, 500u);
  EXPECT_EQ(result.trace.cumulative_reward, result.phase1_reward + result.phase2_reward);
  EXPECT_LE(result.phase2_reward, 1.0);
  ASSERT_EQ(result.trace.checkpoints.size(), 4u);
  EXPECT_EQ(result.trace.checkpoints[2].cum_reward, result.phase1_reward);
  EXPECT_EQ(result.trace.checkpoints[3].round, 500u);

  // Phase 1 is exactly the inner learner run alone on the same stream.
  PThompsonAgent alone(family);
  RngStream same(8);
  const auto solo = run_agent(m, alone, 499, 0, kInfiniteTau, same, opts);
  EXPECT_EQ(solo.cumulative_reward, result.phase1_reward);
}

TEST(WarmPsrl, PosteriorCarriesPhaseOneCounts) {
  const auto m = oracle::random_dense(3, 2, 9);
  const PolicyFamily family{oracle::constant_policy(3, 0), oracle::constant_policy(3, 1)};
  WarmPsrlConfig config;
  config.horizon = 3000;
  config.t_switch = 2000;
  config.learner = WarmStartLearner::Pucb;
  RngStream rng(10);
  const auto result = warm_psrl(m, family, full_support(m), config, rng);
  ASSERT_TRUE(result.posterior.has_value());
  double total = 0.0;
  for (State s = 0; s < 3; ++s)
    for (Action a : m.actions(s))
      for (double c : result.posterior->concentration(s, a)) total += c - 1.0;
  EXPECT_EQ(total, 3000.0);
}

TEST(WarmPsrl, RejectsBadSwitchPoint) {
  const auto m = oracle::random_dense(3, 2, 9);
  const PolicyFamily family{oracle::constant_policy(3, 0)};
  RngStream rng(11);
  WarmPsrlConfig config;
  config.horizon = 100;
  for (std::uint64_t ts : {0u, 100u, 150u}) {
    config.t_switch = ts;
    EXPECT_THROW(warm_psrl(m, family, full_support(m), config, rng), ContractViolation);
  }
}

TEST(WarmPsrl, FirstSampleConcentratesOnTruth) {
  const auto m = oracle::random_dense(3, 2, 12);
  EmpiricalModel model(m);
  RngStream rng(12);
  saturate(m, model, 1'000'000, rng);
  const auto psrl = PsrlState::from_empirical(m, full_support(m), model);
  int close = 0;
  constexpr int kTrials = 100;
  for (int trial = 0; trial < kTrials; ++trial) {
    const auto sampled = psrl.sample_mdp(rng);
    double worst = 0.0;
    for (State s = 0; s < 3; ++s)
      for (Action a : m.actions(s)) {
        const auto p = sampled.transition(s, a);
        const auto q = m.transition(s, a);
        for (State j = 0; j < 3; ++j) worst = std::max(worst, std::abs(p[j] - q[j]));
      }
    close += worst <= 0.01;
  }
  EXPECT_GE(close, 95);
}
