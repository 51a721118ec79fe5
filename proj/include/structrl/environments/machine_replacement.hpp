#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "structrl/agents/psrl.hpp"
#include "structrl/constants.hpp"
#include "structrl/environments/policy_family.hpp"
#include "structrl/errors.hpp"
#include "structrl/mdp.hpp"
#include "structrl/rng.hpp"

namespace structrl {

namespace machine {
inline constexpr Action kContinue = 0;
inline constexpr Action kMaintain = 1;
}  // namespace machine

/// Machine with n condition levels (index 0 = perfect). Continuing from
/// level i moves to j > i with probability c_i * b_j, where b is geometric in
/// j with ratio gamma (normalised over levels 2..n) and c_i ramps linearly
/// from c_min to c_max. Maintenance returns to level 1 deterministically.
struct MachineReplacementConfig {
  std::size_t n = 100;
  std::vector<double> costs;  // g(1..n); drawn with cost_vector_generator when empty
  double g_max = 1.0;
  double repair_cost = 0.5;
  double gamma = defaults::kMachineGamma;
  double c_min = defaults::kMachineCMin;
  double c_max = defaults::kMachineCMax;

  void validate() const {
    if (n < 2) throw ConfigError("machine replacement: n must be at least 2");
    if (!(g_max > 0.0)) throw ConfigError("machine replacement: g_max must be positive");
    if (!(repair_cost > 0.0)) throw ConfigError("machine replacement: repair cost must be positive");
    if (!(gamma > 0.0)) throw ConfigError("machine replacement: gamma must be positive");
    if (!(c_min > 0.0 && c_min < c_max && c_max <= 1.0))
      throw ConfigError("machine replacement: need 0 < c_min < c_max <= 1");
    if (!costs.empty()) {
      if (costs.size() != n) throw ConfigError("machine replacement: cost vector must have n entries");
      for (std::size_t i = 0; i < n; ++i) {
        if (costs[i] < 0.0) throw ConfigError("machine replacement: costs must be non-negative");
        if (i && costs[i] < costs[i - 1]) throw ConfigError("machine replacement: costs must be nondecreasing");
      }
    }
  }
};

/// n sorted uniform draws on [0, g_max].
inline std::vector<double> cost_vector_generator(std::size_t n, double g_max, RngStream& rng) {
  if (!(g_max > 0.0)) throw ContractViolation("cost_vector_generator: g_max must be positive");
  std::vector<double> g(n);
  for (auto& x : g) x = g_max * rng.uniform();
  std::sort(g.begin(), g.end());
  return g;
}

/// Checks constraints (a)-(d) on the transition structure plus cost
/// monotonicity; returns a description of the first violation, or "".
inline std::string machine_replacement_violation(const TabularMDP& mdp, const std::vector<double>& costs) {
  const std::size_t n = mdp.num_states();
  for (std::size_t i = 1; i < costs.size(); ++i)
    if (costs[i] < costs[i - 1]) return "operating costs not nondecreasing at level " + std::to_string(i + 1);
  for (State i = 0; i < n; ++i) {
    if (!mdp.has_action(i, machine::kContinue) || !mdp.has_action(i, machine::kMaintain))
      return "level " + std::to_string(i + 1) + " lacks an action";
    auto pm = mdp.transition(i, machine::kMaintain);
    if (pm[0] != 1.0) return "(a) p_i1(PM) = 1 fails at level " + std::to_string(i + 1);
    for (State j = 1; j < n; ++j)
      if (pm[j] != 0.0) return "(b) p_ij(PM) = 0 fails at level " + std::to_string(i + 1);
    auto c = mdp.transition(i, machine::kContinue);
    for (State j = 0; j < i; ++j)
      if (c[j] != 0.0) return "(c) p_ij(C) = 0 for j < i fails at level " + std::to_string(i + 1);
    if (i + 1 < n) {
      auto c_next = mdp.transition(i + 1, machine::kContinue);
      for (State j = i + 1; j < n; ++j)
        if (c[j] > c_next[j])
          return "(d) p_ij(C) <= p_(i+1)j(C) fails at i=" + std::to_string(i + 1) + ", j=" + std::to_string(j + 1);
    }
  }
  return "";
}

/// Builds the instance; `rng` supplies the cost vector when the config does
/// not fix one. Rewards are 1 - cost / C_max with C_max = max(g(n), R + g(1)).
inline TabularMDP build_machine_replacement(MachineReplacementConfig& config, RngStream& rng) {
  config.validate();
  const std::size_t n = config.n;
  if (config.costs.empty()) config.costs = cost_vector_generator(n, config.g_max, rng);
  const auto& g = config.costs;

  // b_j for levels j = 2..n (indices 1..n-1), geometric and normalised.
  std::vector<double> b(n, 0.0);
  double total = 0.0;
  for (State j = 1; j < n; ++j) total += (b[j] = std::pow(config.gamma, static_cast<double>(j - 1)));
  for (State j = 1; j < n; ++j) b[j] /= total;
  std::vector<double> tail(n + 1, 0.0);  // tail[i] = sum_{j >= i} b_j
  for (State j = n; j-- > 0;) tail[j] = tail[j + 1] + b[j];

  const double c_max_cost = std::max(g[n - 1], config.repair_cost + g[0]);
  TabularMDP mdp(n);
  for (State i = 0; i < n; ++i) {
    const double c = config.c_min + (config.c_max - config.c_min) * static_cast<double>(i) / static_cast<double>(n - 1);
    std::vector<double> row(n, 0.0);
    for (State j = i + 1; j < n; ++j) row[j] = c * b[j];
    row[i] = 1.0 - c * tail[i + 1];
    mdp.add_action(i, machine::kContinue, std::move(row), std::vector<double>(n, 1.0 - g[i] / c_max_cost));

    std::vector<double> reset(n, 0.0);
    reset[0] = 1.0;
    std::vector<double> reward(n, 0.0);
    reward[0] = 1.0 - (config.repair_cost + g[0]) / c_max_cost;
    mdp.add_action(i, machine::kMaintain, std::move(reset), std::move(reward));
  }
  if (auto why = machine_replacement_violation(mdp, g); !why.empty())
    throw ConstructionError("machine replacement instance violates " + why);
  return mdp;
}

/// Maintain iff the level index is at least `threshold` (0-based; 0 = always maintain).
inline DeterministicPolicy machine_threshold_policy(std::size_t n, std::size_t threshold) {
  DeterministicPolicy pi;
  pi.action_of.resize(n);
  for (State i = 0; i < n; ++i) pi.action_of[i] = i >= threshold ? machine::kMaintain : machine::kContinue;
  return pi;
}

/// n threshold policies, i* = 1..n (stored 0-based).
inline ThresholdPolicyFamily machine_replacement_policies(std::size_t n) {
  if (n < 2) throw ContractViolation("machine_replacement_policies: n must be at least 2");
  ThresholdPolicyFamily family;
  for (std::size_t t = 0; t < n; ++t) {
    family.thresholds.push_back(t);
    family.policies.push_back(machine_threshold_policy(n, t));
  }
  return family;
}

/// True iff maintenance is chosen exactly on an upper set of levels.
inline bool is_threshold_policy(const DeterministicPolicy& policy) {
  bool maintaining = false;
  for (State i = 0; i < policy.size(); ++i) {
    if (policy(i) == machine::kMaintain)
      maintaining = true;
    else if (maintaining)
      return false;
  }
  return true;
}

/// Structural zeros known a priori: maintenance lands on level 1, continuing
/// never improves the machine.
inline SuccessorSupport machine_replacement_support(std::size_t n) {
  SuccessorSupport support(n);
  for (State i = 0; i < n; ++i) {
    std::vector<State> up;
    for (State j = i; j < n; ++j) up.push_back(j);
    support[i] = {std::move(up), {0}};
  }
  return support;
}

}  // namespace structrl
