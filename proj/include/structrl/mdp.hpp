#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "structrl/constants.hpp"
#include "structrl/errors.hpp"

namespace structrl {

using State = std::size_t;
using Action = std::size_t;

/// Finite MDP with state-dependent action sets. Each (state, action) pair owns
/// a dense transition row over all states and a dense row of rewards
/// R(s, a, s'). Construction does not enforce the probabilistic invariants;
/// `validate` reports them.
class TabularMDP {
 public:
  TabularMDP() = default;
  explicit TabularMDP(std::size_t num_states) : rows_(num_states) {}

  /// Declares action `a` at state `s`. An empty transition marks the pair as
  /// declared but missing its row. An empty reward row means all zeros.
  void add_action(State s, Action a, std::vector<double> transition = {},
                  std::vector<double> reward = {}) {
    check_state(s);
    auto& slots = rows_[s];
    auto it = std::find_if(slots.begin(), slots.end(), [a](const Row& r) { return r.action == a; });
    if (it != slots.end()) throw ContractViolation(key(s, a) + " declared twice");
    if (reward.empty()) reward.assign(num_states(), 0.0);
    slots.push_back(Row{a, std::move(transition), std::move(reward)});
  }

  void set_transition(State s, Action a, std::vector<double> transition) {
    row(s, a).transition = std::move(transition);
  }

  void set_reward(State s, Action a, State next, double value) {
    check_state(next);
    row(s, a).reward.at(next) = value;
  }

  std::size_t num_states() const { return rows_.size(); }
  std::size_t num_actions(State s) const { return rows_.at(s).size(); }

  std::vector<Action> actions(State s) const {
    std::vector<Action> out;
    for (const auto& r : rows_.at(s)) out.push_back(r.action);
    return out;
  }

  Action action_at(State s, std::size_t slot) const { return rows_.at(s).at(slot).action; }

  bool has_action(State s, Action a) const {
    if (s >= num_states()) return false;
    const auto& slots = rows_[s];
    return std::any_of(slots.begin(), slots.end(), [a](const Row& r) { return r.action == a; });
  }

  /// Position of action `a` in state `s`'s action list.
  std::size_t slot(State s, Action a) const {
    check_state(s);
    const auto& slots = rows_[s];
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (slots[i].action == a) return i;
    throw ContractViolation("action " + std::to_string(a) + " not available in state " +
                            std::to_string(s));
  }

  std::span<const double> transition(State s, Action a) const { return rows_[s][slot(s, a)].transition; }
  std::span<const double> rewards(State s, Action a) const { return rows_[s][slot(s, a)].reward; }
  double reward(State s, Action a, State next) const { return rows_[s][slot(s, a)].reward.at(next); }

  std::span<const double> transition_at(State s, std::size_t slot) const { return rows_[s][slot].transition; }
  std::span<const double> rewards_at(State s, std::size_t slot) const { return rows_[s][slot].reward; }

  bool operator==(const TabularMDP&) const = default;

 private:
  struct Row {
    Action action;
    std::vector<double> transition;
    std::vector<double> reward;
    bool operator==(const Row&) const = default;
  };

  static std::string key(State s, Action a) {
    return "(" + std::to_string(s) + "," + std::to_string(a) + ")";
  }
  void check_state(State s) const {
    if (s >= num_states()) throw ContractViolation("state " + std::to_string(s) + " out of range");
  }
  Row& row(State s, Action a) { return rows_[s][slot(s, a)]; }

  std::vector<std::vector<Row>> rows_;
};

/// State -> action map.
struct DeterministicPolicy {
  std::vector<Action> action_of;

  Action operator()(State s) const { return action_of[s]; }
  std::size_t size() const { return action_of.size(); }
  bool operator==(const DeterministicPolicy&) const = default;
};

inline bool is_valid_policy(const TabularMDP& mdp, const DeterministicPolicy& policy) {
  if (policy.size() != mdp.num_states()) return false;
  for (State s = 0; s < mdp.num_states(); ++s)
    if (!mdp.has_action(s, policy(s))) return false;
  return true;
}

inline void require_valid_policy(const TabularMDP& mdp, const DeterministicPolicy& policy) {
  if (policy.size() != mdp.num_states())
    throw ContractViolation("policy covers " + std::to_string(policy.size()) + " states, MDP has " +
                            std::to_string(mdp.num_states()));
  for (State s = 0; s < mdp.num_states(); ++s)
    if (!mdp.has_action(s, policy(s)))
      throw ContractViolation("policy picks action " + std::to_string(policy(s)) +
                              " which is not available in state " + std::to_string(s));
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  enum class Kind { EmptyActionSet, MissingTransition, RowLength, NegativeProbability, RowSum, RewardRange };

  Kind kind;
  State state = 0;
  Action action = 0;
  State next = 0;
  std::string message;
};

/// Result of `validate`. `violations` lists broken invariants; `unreachable`
/// lists states no action sequence reaches from the origin. Unreachable
/// states do not make the model invalid (a uniformised queue can have decision
/// states that only exist as post-decision states), so they are reported
/// separately.
struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<State> unreachable;

  bool ok() const { return violations.empty(); }
};

/// Checks every (state, action) row: present, of the right length,
/// non-negative, summing to one, with rewards in [0, 1].
inline ValidationReport validate(const TabularMDP& mdp, State origin = 0) {
  ValidationReport report;
  auto& out = report.violations;
  const std::size_t n = mdp.num_states();
  auto where = [](State s, Action a) {
    return "(" + std::to_string(s) + "," + std::to_string(a) + ")";
  };
  for (State s = 0; s < n; ++s) {
    if (mdp.num_actions(s) == 0)
      out.push_back({Violation::Kind::EmptyActionSet, s, 0, 0, "state " + std::to_string(s) + " has no actions"});
    for (std::size_t k = 0; k < mdp.num_actions(s); ++k) {
      const Action a = mdp.action_at(s, k);
      auto p = mdp.transition_at(s, k);
      auto r = mdp.rewards_at(s, k);
      if (p.empty()) {
        out.push_back({Violation::Kind::MissingTransition, s, a, 0, "missing transition for " + where(s, a)});
        continue;
      }
      if (p.size() != n || r.size() != n) {
        out.push_back({Violation::Kind::RowLength, s, a, 0, "row length mismatch at " + where(s, a)});
        continue;
      }
      double sum = 0.0;
      for (State j = 0; j < n; ++j) {
        if (!(p[j] >= 0.0))
          out.push_back({Violation::Kind::NegativeProbability, s, a, j,
                         "negative probability at " + where(s, a) + "->" + std::to_string(j)});
        sum += p[j];
        if (!(r[j] >= 0.0 && r[j] <= 1.0))
          out.push_back({Violation::Kind::RewardRange, s, a, j,
                         "reward outside [0,1] at " + where(s, a) + "->" + std::to_string(j)});
      }
      if (!(std::abs(sum - 1.0) <= defaults::kRowSumTolerance)) {
        std::ostringstream os;
        os.precision(17);
        os << "row " << where(s, a) << " sums to " << sum;
        out.push_back({Violation::Kind::RowSum, s, a, 0, os.str()});
      }
    }
  }
  if (n > 0 && origin < n) {
    std::vector<char> seen(n, 0);
    std::deque<State> frontier{origin};
    seen[origin] = 1;
    while (!frontier.empty()) {
      const State s = frontier.front();
      frontier.pop_front();
      for (std::size_t k = 0; k < mdp.num_actions(s); ++k) {
        auto p = mdp.transition_at(s, k);
        for (State j = 0; j < p.size() && j < n; ++j)
          if (p[j] > 0.0 && !seen[j]) {
            seen[j] = 1;
            frontier.push_back(j);
          }
      }
    }
    for (State s = 0; s < n; ++s)
      if (!seen[s]) report.unreachable.push_back(s);
  }
  return report;
}

// ---------------------------------------------------------------------------
// JSON
//
// {"num_states": N, "actions": [[...], ...], "transitions": {"s,a": [...]},
//  "rewards": {"s,a,s'": x}}; zero rewards are omitted.

inline nlohmann::json to_json(const TabularMDP& mdp) {
  nlohmann::json j;
  j["num_states"] = mdp.num_states();
  auto actions = nlohmann::json::array();
  auto transitions = nlohmann::json::object();
  auto rewards = nlohmann::json::object();
  for (State s = 0; s < mdp.num_states(); ++s) {
    actions.push_back(mdp.actions(s));
    for (std::size_t k = 0; k < mdp.num_actions(s); ++k) {
      const Action a = mdp.action_at(s, k);
      const std::string sa = std::to_string(s) + "," + std::to_string(a);
      auto p = mdp.transition_at(s, k);
      if (!p.empty()) transitions[sa] = std::vector<double>(p.begin(), p.end());
      auto r = mdp.rewards_at(s, k);
      for (State n = 0; n < r.size(); ++n)
        if (r[n] != 0.0) rewards[sa + "," + std::to_string(n)] = r[n];
    }
  }
  j["actions"] = std::move(actions);
  j["transitions"] = std::move(transitions);
  j["rewards"] = std::move(rewards);
  return j;
}

namespace detail {

inline std::vector<std::size_t> parse_key(const std::string& key, std::size_t arity) {
  std::vector<std::size_t> parts;
  std::stringstream ss(key);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stoull(item, &used));
      if (used != item.size()) throw ConfigError("bad key '" + key + "'");
    } catch (const std::logic_error&) {
      throw ConfigError("bad key '" + key + "'");
    }
  }
  if (parts.size() != arity) throw ConfigError("bad key '" + key + "'");
  return parts;
}

}  // namespace detail

inline TabularMDP mdp_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("num_states").get<std::size_t>();
    if (n == 0) throw ConfigError("num_states must be positive");
    const auto& actions = j.at("actions");
    if (actions.size() != n) throw ConfigError("actions must list one set per state");
    TabularMDP mdp(n);
    for (State s = 0; s < n; ++s)
      for (const auto& a : actions[s]) mdp.add_action(s, a.get<Action>());
    for (const auto& [key, row] : j.at("transitions").items()) {
      auto sa = detail::parse_key(key, 2);
      if (!mdp.has_action(sa[0], sa[1])) throw ConfigError("transition for undeclared pair " + key);
      mdp.set_transition(sa[0], sa[1], row.get<std::vector<double>>());
    }
    if (j.contains("rewards"))
      for (const auto& [key, value] : j.at("rewards").items()) {
        auto sas = detail::parse_key(key, 3);
        if (!mdp.has_action(sas[0], sas[1])) throw ConfigError("reward for undeclared pair " + key);
        if (sas[2] >= n) throw ConfigError("reward key out of range " + key);
        mdp.set_reward(sas[0], sas[1], sas[2], value.get<double>());
      }
    return mdp;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed MDP document: ") + e.what());
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("malformed MDP document: ") + e.what());
  }
}

}  // namespace structrl
