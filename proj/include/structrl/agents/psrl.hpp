#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "structrl/agents/empirical_model.hpp"
#include "structrl/constants.hpp"
#include "structrl/errors.hpp"
#include "structrl/mdp.hpp"
#include "structrl/planning.hpp"
#include "structrl/rng.hpp"
#include "structrl/simulator.hpp"

namespace structrl {

/// Permitted successors per (state, action slot), in the action order of the
/// MDP. Posterior mass is only ever placed on these.
using SuccessorSupport = std::vector<std::vector<std::vector<State>>>;

/// Every state is a permitted successor of every pair.
inline SuccessorSupport full_support(const TabularMDP& shape) {
  SuccessorSupport support(shape.num_states());
  std::vector<State> all(shape.num_states());
  for (State j = 0; j < all.size(); ++j) all[j] = j;
  for (State s = 0; s < shape.num_states(); ++s) support[s].assign(shape.num_actions(s), all);
  return support;
}

/// Support read off the non-zero entries of a known MDP.
inline SuccessorSupport observed_support(const TabularMDP& mdp) {
  SuccessorSupport support(mdp.num_states());
  for (State s = 0; s < mdp.num_states(); ++s) {
    support[s].resize(mdp.num_actions(s));
    for (std::size_t k = 0; k < mdp.num_actions(s); ++k) {
      auto p = mdp.transition_at(s, k);
      for (State j = 0; j < p.size(); ++j)
        if (p[j] > 0.0) support[s][k].push_back(j);
    }
  }
  return support;
}

/// Dirichlet posterior over transition rows plus empirical reward means.
/// Concentrations always equal the prior plus the exact transition counts.
class PsrlState {
 public:
  PsrlState(const TabularMDP& shape, SuccessorSupport support, double prior = defaults::kDirichletPrior,
            double unobserved_reward = defaults::kUnobservedReward)
      : empirical_(shape), support_(std::move(support)), prior_(prior), unobserved_reward_(unobserved_reward) {
    const std::size_t n = shape.num_states();
    if (support_.size() != n) throw ContractViolation("PsrlState: support does not match the MDP");
    if (!(prior > 0.0)) throw ContractViolation("PsrlState: prior concentration must be positive");
    position_.resize(n);
    concentration_.resize(n);
    for (State s = 0; s < n; ++s) {
      if (support_[s].size() != shape.num_actions(s)) throw ContractViolation("PsrlState: support does not match the MDP");
      position_[s].resize(support_[s].size());
      concentration_[s].resize(support_[s].size());
      for (std::size_t k = 0; k < support_[s].size(); ++k) {
        if (support_[s][k].empty()) throw ContractViolation("PsrlState: empty successor support");
        position_[s][k].assign(n, -1);
        for (std::size_t i = 0; i < support_[s][k].size(); ++i) {
          const State j = support_[s][k][i];
          if (j >= n) throw ContractViolation("PsrlState: support state out of range");
          position_[s][k][j] = static_cast<int>(i);
        }
        concentration_[s][k].assign(support_[s][k].size(), prior_);
      }
    }
  }

  /// Posterior seeded with every count gathered in `model`.
  static PsrlState from_empirical(const TabularMDP& shape, SuccessorSupport support, const EmpiricalModel& model,
                                  double prior = defaults::kDirichletPrior,
                                  double unobserved_reward = defaults::kUnobservedReward) {
    PsrlState state(shape, std::move(support), prior, unobserved_reward);
    state.empirical_ = model;
    for (State s = 0; s < shape.num_states(); ++s)
      for (std::size_t k = 0; k < shape.num_actions(s); ++k) {
        const Action a = shape.action_at(s, k);
        for (State j = 0; j < shape.num_states(); ++j) {
          const auto c = model.count(s, a, j);
          if (c == 0) continue;
          const int pos = state.position_[s][k][j];
          if (pos < 0) throw ContractViolation("PsrlState: observed transition outside the permitted support");
          state.concentration_[s][k][static_cast<std::size_t>(pos)] += static_cast<double>(c);
        }
      }
    return state;
  }

  void observe(const Transition& tr) {
    const std::size_t k = empirical_.slot(tr.state, tr.action);
    const int pos = position_.at(tr.state)[k].at(tr.next);
    if (pos < 0)
      throw ContractViolation("PsrlState: transition " + std::to_string(tr.state) + "->" + std::to_string(tr.next) +
                              " outside the permitted support");
    concentration_[tr.state][k][static_cast<std::size_t>(pos)] += 1.0;
    empirical_.observe(tr);
  }

  std::size_t num_states() const { return support_.size(); }
  const EmpiricalModel& empirical() const { return empirical_; }
  const std::vector<State>& support(State s, Action a) const { return support_.at(s)[empirical_.slot(s, a)]; }
  const std::vector<double>& concentration(State s, Action a) const {
    return concentration_.at(s)[empirical_.slot(s, a)];
  }
  double reward_estimate(State s, Action a, State next) const {
    return empirical_.mean_reward(s, a, next, unobserved_reward_);
  }

  /// Draws one MDP from the posterior straight into planner form.
  void sample_into(RngStream& rng, PlanningModel& out) const {
    const std::size_t n = num_states();
    out.clear(n);
    std::vector<double> draw;
    for (State s = 0; s < n; ++s) {
      const auto& acts = empirical_.actions(s);
      for (std::size_t k = 0; k < acts.size(); ++k) {
        sample_row(rng, s, k, draw);
        const auto& sup = support_[s][k];
        double expected = 0.0;
        for (std::size_t i = 0; i < sup.size(); ++i) {
          if (draw[i] <= 0.0) continue;
          out.add_successor(sup[i], draw[i]);
          expected += draw[i] * empirical_.mean_reward(s, acts[k], sup[i], unobserved_reward_);
        }
        out.end_action(acts[k], expected);
      }
      out.end_state();
    }
  }

  /// Draws one MDP from the posterior as a TabularMDP.
  TabularMDP sample_mdp(RngStream& rng) const {
    const std::size_t n = num_states();
    TabularMDP mdp(n);
    std::vector<double> draw;
    for (State s = 0; s < n; ++s) {
      const auto& acts = empirical_.actions(s);
      for (std::size_t k = 0; k < acts.size(); ++k) {
        sample_row(rng, s, k, draw);
        std::vector<double> p(n, 0.0), r(n, 0.0);
        for (std::size_t i = 0; i < support_[s][k].size(); ++i) p[support_[s][k][i]] = draw[i];
        for (State j = 0; j < n; ++j) r[j] = empirical_.mean_reward(s, acts[k], j, unobserved_reward_);
        mdp.add_action(s, acts[k], std::move(p), std::move(r));
      }
    }
    return mdp;
  }

  nlohmann::json snapshot() const {
    nlohmann::json j;
    j["prior"] = prior_;
    j["unobserved_reward"] = unobserved_reward_;
    auto conc = nlohmann::json::array();
    for (const auto& per_state : concentration_) conc.push_back(per_state);
    j["concentrations"] = std::move(conc);
    return j;
  }

 private:
  // Dirichlet draw via normalised Gamma variates.
  void sample_row(RngStream& rng, State s, std::size_t k, std::vector<double>& draw) const {
    const auto& alpha = concentration_[s][k];
    draw.resize(alpha.size());
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      draw[i] = rng.gamma(alpha[i]);
      total += draw[i];
    }
    if (total > 0.0) {
      for (double& x : draw) x /= total;
    } else {
      // Every variate underflowed; fall back to the posterior mean.
      double sum = 0.0;
      for (double a : alpha) sum += a;
      for (std::size_t i = 0; i < alpha.size(); ++i) draw[i] = alpha[i] / sum;
    }
  }

  EmpiricalModel empirical_;
  SuccessorSupport support_;
  std::vector<std::vector<std::vector<int>>> position_;
  std::vector<std::vector<std::vector<double>>> concentration_;
  double prior_;
  double unobserved_reward_;
};

/// Samples an MDP from the posterior and returns its gain-optimal plan.
inline PlanningResult psrl_episode(const PsrlState& psrl, RngStream& rng, const PlanningOptions& options = {}) {
  PlanningModel model;
  psrl.sample_into(rng, model);
  return average_reward_optimal(model, options);
}

}  // namespace structrl
