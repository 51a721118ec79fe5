#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "structrl/chain.hpp"
#include "structrl/constants.hpp"
#include "structrl/errors.hpp"
#include "structrl/mdp.hpp"

namespace structrl {

/// Sparse, planner-friendly view of an MDP: per (state, action) the expected
/// one-step reward and the non-zero successors.
struct PlanningModel {
  std::size_t num_states = 0;
  std::vector<std::size_t> action_begin;  // size num_states + 1
  std::vector<Action> action_id;
  std::vector<double> expected_reward;
  std::vector<std::size_t> row_begin;     // size action_id.size() + 1
  std::vector<State> successor;
  std::vector<double> probability;

  void clear(std::size_t n) {
    num_states = n;
    action_begin.assign(1, 0);
    action_id.clear();
    expected_reward.clear();
    row_begin.assign(1, 0);
    successor.clear();
    probability.clear();
  }
  void add_successor(State next, double p) {
    successor.push_back(next);
    probability.push_back(p);
  }
  void end_action(Action a, double reward) {
    action_id.push_back(a);
    expected_reward.push_back(reward);
    row_begin.push_back(successor.size());
  }
  void end_state() { action_begin.push_back(action_id.size()); }
};

inline PlanningModel compile(const TabularMDP& mdp) {
  PlanningModel model;
  model.clear(mdp.num_states());
  for (State s = 0; s < mdp.num_states(); ++s) {
    for (std::size_t k = 0; k < mdp.num_actions(s); ++k) {
      auto p = mdp.transition_at(s, k);
      auto r = mdp.rewards_at(s, k);
      if (p.size() != mdp.num_states())
        throw ContractViolation("missing transition row for state " + std::to_string(s));
      double expected = 0.0;
      for (State j = 0; j < p.size(); ++j)
        if (p[j] > 0.0) {
          model.add_successor(j, p[j]);
          expected += p[j] * r[j];
        }
      model.end_action(mdp.action_at(s, k), expected);
    }
    model.end_state();
  }
  return model;
}

struct PlanningOptions {
  double tolerance = defaults::kPlanningTolerance;
  std::size_t max_iters = defaults::kPlanningMaxIters;
  double aperiodicity_weight = defaults::kAperiodicityWeight;
  State reference_state = defaults::kPlanningReferenceState;
  /// Optional starting bias (e.g. the previous solution of a nearby MDP).
  std::optional<std::vector<double>> initial_bias;
};

struct PlanningResult {
  DeterministicPolicy policy;
  double gain = 0.0;
  std::vector<double> bias;  // relative values, bias[reference_state] == 0
  std::size_t iterations = 0;
  double span = 0.0;
};

/// Gain-optimal deterministic policy by relative value iteration on the
/// aperiodicity-transformed operator
///   (T h)(s) = (1 - w) h(s) + max_a [ r(s,a) + w sum_s' p(s'|s,a) h(s') ],
/// stopped when span(T h - h) < tolerance. The transform leaves the gain
/// unchanged and scales the bias by 1/w.
inline PlanningResult average_reward_optimal(const PlanningModel& model, const PlanningOptions& options = {}) {
  const std::size_t n = model.num_states;
  if (n == 0) throw ContractViolation("average_reward_optimal: empty model");
  if (options.reference_state >= n) throw ContractViolation("average_reward_optimal: bad reference state");
  const double w = options.aperiodicity_weight;
  if (!(w > 0.0 && w <= 1.0)) throw ContractViolation("aperiodicity weight must lie in (0, 1]");

  std::vector<double> h(n, 0.0), next(n, 0.0);
  if (options.initial_bias && options.initial_bias->size() == n)
    for (State s = 0; s < n; ++s) h[s] = (*options.initial_bias)[s] / w;

  auto best_value = [&](State s, std::size_t* argmax) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = model.action_begin[s]; a < model.action_begin[s + 1]; ++a) {
      double acc = 0.0;
      for (std::size_t e = model.row_begin[a]; e < model.row_begin[a + 1]; ++e)
        acc += model.probability[e] * h[model.successor[e]];
      const double q = model.expected_reward[a] + w * acc;
      if (q > best) {
        best = q;
        if (argmax) *argmax = a;
      }
    }
    return best;
  };

  PlanningResult result;
  double lo = 0.0, hi = 0.0, span = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  while (it < options.max_iters) {
    ++it;
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (State s = 0; s < n; ++s) {
      if (model.action_begin[s] == model.action_begin[s + 1])
        throw ContractViolation("state " + std::to_string(s) + " has no actions");
      next[s] = (1.0 - w) * h[s] + best_value(s, nullptr);
      const double diff = next[s] - h[s];
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    span = hi - lo;
    const double pin = next[options.reference_state];
    for (State s = 0; s < n; ++s) h[s] = next[s] - pin;
    if (span < options.tolerance) break;
  }
  if (!(span < options.tolerance)) throw ConvergenceError(it, span);

  result.policy.action_of.resize(n);
  for (State s = 0; s < n; ++s) {
    std::size_t argmax = model.action_begin[s];
    best_value(s, &argmax);
    result.policy.action_of[s] = model.action_id[argmax];
  }
  result.gain = 0.5 * (lo + hi);
  result.bias.resize(n);
  for (State s = 0; s < n; ++s) result.bias[s] = w * h[s];
  result.iterations = it;
  result.span = span;
  return result;
}

inline PlanningResult average_reward_optimal(const TabularMDP& mdp, const PlanningOptions& options = {}) {
  return average_reward_optimal(compile(mdp), options);
}

struct StructuredBest {
  std::size_t index = 0;
  double gain = 0.0;
};

/// Best policy of a candidate family by exact chain analysis; ties go to the
/// lowest index.
inline StructuredBest best_structured_policy(const TabularMDP& mdp, std::span<const DeterministicPolicy> family) {
  if (family.empty()) throw ContractViolation("best_structured_policy: empty family");
  StructuredBest best{0, -std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k < family.size(); ++k) {
    double gain = 0.0;
    try {
      gain = evaluate_policy(mdp, family[k]).avg_reward;
    } catch (const MultichainError& e) {
      throw MultichainError(e.classes(), k);
    }
    if (gain > best.gain) best = {k, gain};
  }
  return best;
}

}  // namespace structrl
