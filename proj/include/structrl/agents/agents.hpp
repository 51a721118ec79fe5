#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "structrl/agents/bandit.hpp"
#include "structrl/agents/empirical_model.hpp"
#include "structrl/agents/psrl.hpp"
#include "structrl/errors.hpp"
#include "structrl/mdp.hpp"
#include "structrl/planning.hpp"
#include "structrl/rng.hpp"
#include "structrl/simulator.hpp"

namespace structrl {

using PolicyFamily = std::vector<DeterministicPolicy>;

/// Common base for learners whose arms are a fixed list of policies.
class PolicyArmAgent : public Agent {
 public:
  explicit PolicyArmAgent(PolicyFamily family) : family_(std::move(family)) {
    if (family_.empty()) throw ContractViolation("agent needs at least one policy");
  }

  std::size_t num_policies() const override { return family_.size(); }
  const DeterministicPolicy& policy(std::size_t index) const override { return family_.at(index); }

  /// The "-Extended" variants also record every transition they see.
  void enable_model_tracking(const TabularMDP& shape) { model_.emplace(shape); }
  const std::optional<EmpiricalModel>& model() const { return model_; }
  bool observes_transitions() const override { return model_.has_value(); }
  void on_transition(const Transition& tr) override { model_->observe(tr); }

  virtual nlohmann::json snapshot() const = 0;

 protected:
  PolicyFamily family_;
  std::optional<EmpiricalModel> model_;
};

/// Upper-confidence selection over policy-arms with renewal-reward estimates.
class PucbAgent final : public PolicyArmAgent {
 public:
  PucbAgent(PolicyFamily family, BetaSchedule beta = BetaSchedule::constant(defaults::kBeta))
      : PolicyArmAgent(std::move(family)), beta_(std::move(beta)), stats_(family_.size()) {}

  std::size_t select(std::uint64_t t, RngStream& rng) override {
    // The very first policy is drawn at random.
    if (!started_) {
      started_ = true;
      return rng.index(family_.size());
    }
    return pucb_select(stats_, t, beta_(t));
  }

  void on_episode_end(const EpisodeRecord& episode) override {
    stats_.at(episode.policy_index) = pucb_update(stats_[episode.policy_index], episode);
  }

  const std::vector<ArmStats>& stats() const { return stats_; }

  nlohmann::json snapshot() const override {
    return {{"algorithm", "pucb"}, {"beta", {{"kind", beta_.kind()}, {"value", beta_.value()}}}, {"arms", stats_}};
  }

 private:
  BetaSchedule beta_;
  std::vector<ArmStats> stats_;
  bool started_ = false;
};

/// Thompson sampling over policy-arms with Beta(S + 1, F + 1) beliefs.
class PThompsonAgent final : public PolicyArmAgent {
 public:
  explicit PThompsonAgent(PolicyFamily family) : PolicyArmAgent(std::move(family)), beliefs_(family_.size()) {}

  std::size_t select(std::uint64_t, RngStream& rng) override {
    if (!started_) {
      started_ = true;
      return rng.index(family_.size());
    }
    return pthompson_select(beliefs_, rng);
  }

  void on_episode_end(const EpisodeRecord& episode) override {
    beliefs_.at(episode.policy_index) = pthompson_update(beliefs_[episode.policy_index], episode);
  }

  const std::vector<BetaBelief>& beliefs() const { return beliefs_; }

  nlohmann::json snapshot() const override { return {{"algorithm", "pthompson"}, {"arms", beliefs_}}; }

 private:
  std::vector<BetaBelief> beliefs_;
  bool started_ = false;
};

/// Uniformly random policy per episode; the comparison floor.
class RandomAgent final : public PolicyArmAgent {
 public:
  using PolicyArmAgent::PolicyArmAgent;

  std::size_t select(std::uint64_t, RngStream& rng) override { return random_baseline(family_.size(), rng); }
  void on_episode_end(const EpisodeRecord&) override {}
  nlohmann::json snapshot() const override { return {{"algorithm", "random"}}; }

  static std::size_t random_baseline(std::size_t k, RngStream& rng) { return rng.index(k); }
};

/// Always plays the same policy (e.g. the optimum, for oracle regret).
class FixedPolicyAgent final : public PolicyArmAgent {
 public:
  explicit FixedPolicyAgent(DeterministicPolicy policy) : PolicyArmAgent(PolicyFamily{std::move(policy)}) {}

  std::size_t select(std::uint64_t, RngStream&) override { return 0; }
  void on_episode_end(const EpisodeRecord&) override {}
  nlohmann::json snapshot() const override { return {{"algorithm", "fixed"}}; }
};

/// Posterior sampling: fixed-length episodes, each starting from s_start
/// (the simulator teleports the agent back), acting optimally for one MDP
/// drawn from the Dirichlet posterior.
class PsrlAgent final : public Agent {
 public:
  PsrlAgent(PsrlState state, std::uint64_t episode_length, PlanningOptions planning = {})
      : state_(std::move(state)), episode_length_(episode_length), planning_(std::move(planning)) {
    if (episode_length_ == 0) throw ContractViolation("PSRL episode length must be positive");
    current_.action_of.assign(state_.num_states(), 0);
    for (State s = 0; s < state_.num_states(); ++s) current_.action_of[s] = state_.empirical().actions(s).front();
  }

  EpisodeScheme scheme(std::uint64_t) const override { return {episode_length_, false, true}; }
  std::size_t num_policies() const override { return 1; }
  const DeterministicPolicy& policy(std::size_t) const override { return current_; }

  std::size_t select(std::uint64_t, RngStream& rng) override {
    state_.sample_into(rng, scratch_);
    // Consecutive posterior draws are close, so the last bias is a good start.
    if (!last_bias_.empty()) planning_.initial_bias = last_bias_;
    auto plan = average_reward_optimal(scratch_, planning_);
    current_ = std::move(plan.policy);
    last_bias_ = std::move(plan.bias);
    planner_iterations_ += plan.iterations;
    ++plans_;
    return 0;
  }

  void on_episode_end(const EpisodeRecord&) override {}
  bool observes_transitions() const override { return true; }
  void on_transition(const Transition& tr) override { state_.observe(tr); }

  const PsrlState& state() const { return state_; }
  std::uint64_t plans() const { return plans_; }
  std::uint64_t planner_iterations() const { return planner_iterations_; }

 private:
  PsrlState state_;
  std::uint64_t episode_length_;
  PlanningOptions planning_;
  PlanningModel scratch_;
  DeterministicPolicy current_;
  std::vector<double> last_bias_;
  std::uint64_t plans_ = 0;
  std::uint64_t planner_iterations_ = 0;
};

// ---------------------------------------------------------------------------
// PSRL warm-started from a policy-arm learner

enum class WarmStartLearner { Pucb, PThompson };

struct WarmPsrlConfig {
  std::uint64_t horizon = 0;
  std::uint64_t t_switch = 0;
  State s_start = 0;
  std::uint64_t tau = kInfiniteTau;
  BetaSchedule beta = BetaSchedule::constant(defaults::kBeta);
  WarmStartLearner learner = WarmStartLearner::PThompson;
  std::uint64_t psrl_episode_length = 0;  // 0: defaults::kPsrlEpisodeLengthPerState * N
  PlanningOptions planning;
};

struct WarmPsrlResult {
  RunTrace trace;               // both phases; checkpoints and CR in global rounds
  double phase1_reward = 0.0;   // CR_1
  double phase2_reward = 0.0;   // CR_2
  std::optional<PsrlState> posterior;  // PSRL state at the horizon
};

/// Phase 1 runs pUCB- or pThompson-Extended for t_switch rounds while counting
/// transitions; phase 2 runs PSRL from a posterior seeded with those counts
/// for the remaining rounds, starting again from s_start.
inline WarmPsrlResult warm_psrl(const TabularMDP& mdp, const PolicyFamily& family, const SuccessorSupport& support,
                                const WarmPsrlConfig& config, RngStream& rng, const RunOptions& options = {}) {
  if (!(config.t_switch > 0 && config.t_switch < config.horizon))
    throw ContractViolation("warm_psrl requires 0 < t_switch < T");

  std::unique_ptr<PolicyArmAgent> learner;
  if (config.learner == WarmStartLearner::Pucb)
    learner = std::make_unique<PucbAgent>(family, config.beta);
  else
    learner = std::make_unique<PThompsonAgent>(family);
  learner->enable_model_tracking(mdp);

  RunOptions first = options;
  first.checkpoints.clear();
  RunOptions second = options;
  second.checkpoints.clear();
  for (auto c : options.checkpoints) {
    if (c <= config.t_switch)
      first.checkpoints.push_back(c);
    else
      second.checkpoints.push_back(c - config.t_switch);
  }
  second.step_log_limit = options.step_log_limit > config.t_switch ? options.step_log_limit - config.t_switch : 0;

  WarmPsrlResult result;
  RunTrace phase1 = run_agent(mdp, *learner, config.t_switch, config.s_start, config.tau, rng, first);

  const std::uint64_t length = config.psrl_episode_length
                                   ? config.psrl_episode_length
                                   : defaults::kPsrlEpisodeLengthPerState * mdp.num_states();
  PsrlAgent psrl(PsrlState::from_empirical(mdp, support, *learner->model()), length, config.planning);
  RunTrace phase2 = run_agent(mdp, psrl, config.horizon - config.t_switch, config.s_start, config.tau, rng, second);

  result.phase1_reward = phase1.cumulative_reward;
  result.phase2_reward = phase2.cumulative_reward;

  RunTrace& out = result.trace;
  out = std::move(phase1);
  for (auto& e : phase2.episodes) out.episodes.push_back(e);
  for (auto& st : phase2.steps) {
    st.round += config.t_switch;
    out.steps.push_back(st);
  }
  for (const auto& c : phase2.checkpoints)
    out.checkpoints.push_back({c.round + config.t_switch, result.phase1_reward + c.cum_reward});
  out.total_steps = config.horizon;
  out.cumulative_reward = result.phase1_reward + result.phase2_reward;
  out.partial_steps = phase2.partial_steps;
  out.partial_reward = phase2.partial_reward;
  out.teleported = phase2.teleported;
  result.posterior = psrl.state();
  return result;
}

}  // namespace structrl
