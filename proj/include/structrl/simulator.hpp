#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "structrl/constants.hpp"
#include "structrl/errors.hpp"
#include "structrl/mdp.hpp"
#include "structrl/rng.hpp"

namespace structrl {

struct StepOutcome {
  State next;
  double reward;
};

/// Inverse-CDF draw over a stored probability row: cumulate left to right and
/// return the first index whose cumulative mass exceeds `u`. Rounding slack
/// falls on the last positive entry.
inline State sample_successor(std::span<const double> row, double u) {
  double cumulative = 0.0;
  State last_positive = 0;
  for (State j = 0; j < row.size(); ++j) {
    if (row[j] > 0.0) {
      cumulative += row[j];
      last_positive = j;
      if (u < cumulative) return j;
    }
  }
  return last_positive;
}

inline StepOutcome step_slot(const TabularMDP& mdp, State state, std::size_t slot, RngStream& rng) {
  const State next = sample_successor(mdp.transition_at(state, slot), rng.uniform());
  return {next, mdp.rewards_at(state, slot)[next]};
}

/// One transition of the true MDP; consumes exactly one uniform draw.
inline StepOutcome step(const TabularMDP& mdp, State state, Action action, RngStream& rng) {
  return step_slot(mdp, state, mdp.slot(state, action), rng);
}

// ---------------------------------------------------------------------------
// Episodes

enum class EndReason { ReturnedToStart, HitTau };

struct EpisodeRecord {
  std::size_t policy_index = 0;
  std::uint64_t duration = 0;
  double reward_sum = 0.0;
  EndReason end_reason = EndReason::ReturnedToStart;
  State end_state = 0;

  bool operator==(const EpisodeRecord&) const = default;
};

/// Follows `policy` from `start_state` until the first step t' >= 1 that lands
/// on `s_start` or until t' == tau. A landing on s_start at t' == tau reports
/// ReturnedToStart.
inline EpisodeRecord run_episode(const TabularMDP& mdp, const DeterministicPolicy& policy, State start_state,
                                 State s_start, std::uint64_t tau, RngStream& rng,
                                 std::uint64_t step_cap = defaults::kEpisodeStepCap) {
  require_valid_policy(mdp, policy);
  if (tau == 0) throw ContractViolation("tau must be positive");
  std::vector<std::size_t> slots(mdp.num_states());
  for (State s = 0; s < mdp.num_states(); ++s) slots[s] = mdp.slot(s, policy(s));

  EpisodeRecord rec;
  State s = start_state;
  while (true) {
    if (rec.duration >= step_cap)
      throw EpisodeCapExceeded("episode exceeded " + std::to_string(step_cap) + " steps without returning to state " +
                               std::to_string(s_start) + "; start state is transient under this policy");
    const auto out = step_slot(mdp, s, slots[s], rng);
    ++rec.duration;
    rec.reward_sum += out.reward;
    s = out.next;
    if (s == s_start) {
      rec.end_reason = EndReason::ReturnedToStart;
      break;
    }
    if (rec.duration == tau) {
      rec.end_reason = EndReason::HitTau;
      break;
    }
  }
  rec.end_state = s;
  return rec;
}

// ---------------------------------------------------------------------------
// Agents drive run_agent through this episode-callback interface.

/// How a learner's episodes are delimited.
struct EpisodeScheme {
  std::uint64_t max_length = kInfiniteTau;  // tau, or the fixed episode length
  bool end_on_return = true;                // end on return to s_start
  bool reset_to_start = false;              // teleport to s_start when an episode begins

  bool operator==(const EpisodeScheme&) const = default;
};

struct Transition {
  State state;
  Action action;
  State next;
  double reward;
};

class Agent {
 public:
  virtual ~Agent() = default;

  virtual EpisodeScheme scheme(std::uint64_t tau) const { return {tau, true, false}; }

  virtual std::size_t num_policies() const = 0;
  virtual const DeterministicPolicy& policy(std::size_t index) const = 0;

  /// Picks the policy for the episode that begins at round t (t >= 1).
  virtual std::size_t select(std::uint64_t t, RngStream& rng) = 0;

  /// Called once per completed episode. Horizon-truncated episodes are not reported.
  virtual void on_episode_end(const EpisodeRecord& episode) = 0;

  /// Per-step hook for learners that build a model of the MDP.
  virtual bool observes_transitions() const { return false; }
  virtual void on_transition(const Transition&) {}
};

struct StepLogEntry {
  std::uint64_t round;
  State state;
  Action action;
  State next;
  double reward;

  bool operator==(const StepLogEntry&) const = default;
};

struct Checkpoint {
  std::uint64_t round;
  double cum_reward;

  bool operator==(const Checkpoint&) const = default;
};

struct RunTrace {
  std::vector<EpisodeRecord> episodes;
  std::vector<StepLogEntry> steps;  // first `step_log_limit` rounds only
  std::vector<Checkpoint> checkpoints;
  std::uint64_t total_steps = 0;
  double cumulative_reward = 0.0;
  // Trailing episode cut by the horizon.
  std::uint64_t partial_steps = 0;
  double partial_reward = 0.0;
  bool teleported = false;

  bool operator==(const RunTrace&) const = default;
};

struct RunOptions {
  std::vector<std::uint64_t> checkpoints;  // sorted rounds at which CR_t is recorded
  std::size_t step_log_limit = 0;
  bool keep_episodes = true;
};

/// Runs `agent` on the true MDP for exactly T rounds. Episode boundaries are
/// tested at the top of each round, before the action is taken.
inline RunTrace run_agent(const TabularMDP& mdp, Agent& agent, std::uint64_t T, State s_start, std::uint64_t tau,
                          RngStream& rng, const RunOptions& options = {}) {
  if (s_start >= mdp.num_states()) throw ContractViolation("s_start out of range");
  if (tau == 0) throw ContractViolation("tau must be positive");
  if (!std::is_sorted(options.checkpoints.begin(), options.checkpoints.end()))
    throw ContractViolation("checkpoints must be sorted");

  const EpisodeScheme scheme = agent.scheme(tau);
  const bool observe = agent.observes_transitions();
  RunTrace trace;
  if (T == 0) return trace;

  std::vector<std::size_t> slots(mdp.num_states());
  std::size_t k = 0;
  const DeterministicPolicy* pi = nullptr;
  auto choose = [&](std::uint64_t t) {
    k = agent.select(t, rng);
    if (k >= agent.num_policies())
      throw ContractViolation("agent selected policy " + std::to_string(k) + " of " +
                              std::to_string(agent.num_policies()));
    pi = &agent.policy(k);
    require_valid_policy(mdp, *pi);
    for (State s = 0; s < mdp.num_states(); ++s) slots[s] = mdp.slot(s, (*pi)(s));
  };
  auto boundary = [&](State s, std::uint64_t length) {
    return (scheme.end_on_return && s == s_start) || length >= scheme.max_length;
  };

  State s = s_start;
  std::uint64_t length = 0;
  double episode_reward = 0.0;
  std::size_t next_checkpoint = 0;
  while (next_checkpoint < options.checkpoints.size() && options.checkpoints[next_checkpoint] == 0)
    trace.checkpoints.push_back({0, 0.0}), ++next_checkpoint;

  auto close_episode = [&](State s_end) {
    EpisodeRecord rec{k, length, episode_reward,
                      (scheme.end_on_return && s_end == s_start) ? EndReason::ReturnedToStart : EndReason::HitTau,
                      s_end};
    agent.on_episode_end(rec);
    if (options.keep_episodes) trace.episodes.push_back(rec);
  };

  choose(1);
  for (std::uint64_t t = 1; t <= T; ++t) {
    if (t != 1 && boundary(s, length)) {
      close_episode(s);
      choose(t);
      length = 0;
      episode_reward = 0.0;
      if (scheme.reset_to_start && s != s_start) {
        s = s_start;
        trace.teleported = true;
      }
    }
    const std::size_t slot = slots[s];
    const auto out = step_slot(mdp, s, slot, rng);
    if (observe) agent.on_transition({s, mdp.action_at(s, slot), out.next, out.reward});
    if (trace.steps.size() < options.step_log_limit)
      trace.steps.push_back({t, s, mdp.action_at(s, slot), out.next, out.reward});
    ++length;
    episode_reward += out.reward;
    trace.cumulative_reward += out.reward;
    s = out.next;
    while (next_checkpoint < options.checkpoints.size() && options.checkpoints[next_checkpoint] == t)
      trace.checkpoints.push_back({t, trace.cumulative_reward}), ++next_checkpoint;
  }
  trace.total_steps = T;
  if (boundary(s, length)) {
    // The last round closed an episode exactly at the horizon.
    close_episode(s);
  } else {
    trace.partial_steps = length;
    trace.partial_reward = episode_reward;
  }
  return trace;
}

}  // namespace structrl
