#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "structrl/errors.hpp"
#include "structrl/mdp.hpp"
#include "structrl/simulator.hpp"

namespace structrl {

/// Transition counts and reward sums per (s, a, s'), laid out like the MDP
/// the observations come from.
class EmpiricalModel {
 public:
  EmpiricalModel() = default;

  /// Empty model with the state/action layout of `shape`.
  explicit EmpiricalModel(const TabularMDP& shape) : num_states_(shape.num_states()) {
    actions_.resize(num_states_);
    cells_.resize(num_states_);
    for (State s = 0; s < num_states_; ++s) {
      actions_[s] = shape.actions(s);
      cells_[s].assign(actions_[s].size(), Row{std::vector<Cell>(num_states_), 0});
    }
  }

  void observe(const Transition& tr) {
    if (tr.state >= num_states_ || tr.next >= num_states_)
      throw ContractViolation("EmpiricalModel: state out of range");
    auto& row = cells_[tr.state][slot(tr.state, tr.action)];
    auto& cell = row.cells[tr.next];
    ++cell.count;
    cell.reward_sum += tr.reward;
    ++row.visits;
  }

  std::size_t num_states() const { return num_states_; }
  const std::vector<Action>& actions(State s) const { return actions_.at(s); }

  std::uint64_t visits(State s, Action a) const { return cells_.at(s)[slot(s, a)].visits; }
  std::uint64_t count(State s, Action a, State next) const { return cells_.at(s)[slot(s, a)].cells.at(next).count; }
  double reward_sum(State s, Action a, State next) const {
    return cells_.at(s)[slot(s, a)].cells.at(next).reward_sum;
  }

  /// Mean observed reward of (s, a, s'), or `fallback` when never observed.
  double mean_reward(State s, Action a, State next, double fallback) const {
    const auto& c = cells_.at(s)[slot(s, a)].cells.at(next);
    return c.count ? c.reward_sum / static_cast<double>(c.count) : fallback;
  }

  /// Empirical successor frequencies of (s, a); all zeros when unvisited.
  std::vector<double> transition_estimate(State s, Action a) const {
    const auto& row = cells_.at(s)[slot(s, a)];
    std::vector<double> p(num_states_, 0.0);
    if (row.visits == 0) return p;
    for (State j = 0; j < num_states_; ++j)
      p[j] = static_cast<double>(row.cells[j].count) / static_cast<double>(row.visits);
    return p;
  }

  std::size_t slot(State s, Action a) const {
    const auto& acts = actions_.at(s);
    for (std::size_t k = 0; k < acts.size(); ++k)
      if (acts[k] == a) return k;
    throw ContractViolation("EmpiricalModel: action " + std::to_string(a) + " unknown in state " + std::to_string(s));
  }

  bool operator==(const EmpiricalModel&) const = default;

 private:
  struct Cell {
    std::uint64_t count = 0;
    double reward_sum = 0.0;
    bool operator==(const Cell&) const = default;
  };
  struct Row {
    std::vector<Cell> cells;
    std::uint64_t visits = 0;
    bool operator==(const Row&) const = default;
  };

  std::size_t num_states_ = 0;
  std::vector<std::vector<Action>> actions_;
  std::vector<std::vector<Row>> cells_;
};

inline void extended_observe(EmpiricalModel& model, const Transition& tr) { model.observe(tr); }

}  // namespace structrl
