#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "structrl/agents/agents.hpp"
#include "structrl/harness/config.hpp"
#include "structrl/planning.hpp"
#include "structrl/rng.hpp"
#include "structrl/simulator.hpp"

#ifndef STRUCTRL_VERSION
#define STRUCTRL_VERSION "0.0.0"
#endif

namespace structrl {

struct RhoStar {
  double gain = 0.0;
  std::optional<std::size_t> policy_index;  // structured mode only
  DeterministicPolicy policy;
};

inline RhoStar compute_rho_star(const TabularMDP& mdp, std::span<const DeterministicPolicy> family, RhoStarMode mode) {
  RhoStar out;
  if (mode == RhoStarMode::Structured) {
    if (family.empty()) throw ConfigError("structured rho* needs a non-empty policy family");
    auto best = best_structured_policy(mdp, family);
    out.gain = best.gain;
    out.policy_index = best.index;
    out.policy = family[best.index];
  } else {
    auto plan = average_reward_optimal(mdp);
    // Report the exact gain of the planned policy rather than the iteration's
    // bracket midpoint.
    out.gain = evaluate_policy(mdp, plan.policy).avg_reward;
    out.policy = std::move(plan.policy);
  }
  return out;
}

/// Cumulative reward and regret at each checkpoint of one (agent, seed) run.
struct RegretCurve {
  std::size_t agent_index = 0;
  std::string agent;
  std::uint64_t seed = 0;
  double rho_star = 0.0;
  std::vector<std::uint64_t> checkpoints;
  std::vector<double> cum_reward;
  std::vector<double> regret;
  bool failed = false;
  std::string error;
  double wall_seconds = 0.0;

  bool operator==(const RegretCurve&) const = default;
};

inline double regret_at(double rho_star, std::uint64_t t, double cum_reward) {
  return rho_star * static_cast<double>(t) - cum_reward;
}

struct AgentSummary {
  std::string agent;
  bool teleports = false;
  std::size_t runs = 0;  // successful runs aggregated
  std::size_t failures = 0;
  std::vector<std::uint64_t> checkpoints;
  std::vector<double> mean_regret;
  std::vector<double> std_regret;  // sample standard deviation; 0 for a single run
  double mean_wall_seconds = 0.0;

  bool operator==(const AgentSummary&) const = default;
};

struct ExperimentMetadata {
  std::string generator = std::string(kGeneratorId);
  std::uint64_t config_hash = 0;
  std::string version = STRUCTRL_VERSION;
  std::string environment;
  double rho_star = 0.0;
  std::string rho_star_mode;
  std::uint64_t horizon = 0;
  std::uint64_t seed_base = 0;
  std::size_t num_seeds = 0;

  bool operator==(const ExperimentMetadata&) const = default;
};

struct ExperimentResult {
  ExperimentMetadata metadata;
  std::vector<RegretCurve> curves;  // sorted by (agent index, seed)
  std::vector<AgentSummary> summary;

  bool any_failed() const {
    return std::any_of(curves.begin(), curves.end(), [](const RegretCurve& c) { return c.failed; });
  }
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Canonical JSON of a resolved config; object keys come out sorted.
inline nlohmann::json canonical_config(const ExperimentConfig& c) {
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : c.agents) {
    nlohmann::json j{{"algorithm", a.algorithm}, {"label", a.label}, {"beta", {{"kind", a.beta_kind}, {"value", a.beta_value}}},
                     {"t_switch", a.t_switch}, {"psrl_episode_len", a.psrl_episode_len}, {"inner", a.inner}};
    j["tau"] = a.tau ? nlohmann::json(*a.tau) : nlohmann::json(nullptr);
    j["policy"] = a.fixed_policy ? nlohmann::json(*a.fixed_policy) : nlohmann::json("best");
    agents.push_back(std::move(j));
  }
  nlohmann::json j;
  j["environment"] = c.environment;
  j["agents"] = std::move(agents);
  j["experiment"] = {{"horizon", c.horizon},
                     {"s_start", c.s_start ? nlohmann::json(*c.s_start) : nlohmann::json(nullptr)},
                     {"tau", c.tau},
                     {"num_seeds", c.num_seeds},
                     {"seed_base", c.seed_base},
                     {"checkpoints", c.checkpoints},
                     {"rho_star_mode", to_string(c.rho_star_mode)}};
  return j;
}

/// Trajectory stream for one run. Every (agent, seed) pair gets its own
/// stream; no two agents share one.
inline std::uint64_t run_stream_seed(std::uint64_t seed, std::size_t agent_index) {
  return mix_seed(seed, {static_cast<std::uint64_t>(agent_index)});
}

namespace detail {

inline RunTrace run_one(const Environment& env, const AgentSpec& spec, const ExperimentConfig& config, State s_start,
                        const RhoStar& rho_star, RngStream& rng) {
  RunOptions options;
  options.checkpoints = config.checkpoints;
  options.keep_episodes = false;
  const std::uint64_t tau = spec.tau.value_or(config.tau);
  const std::uint64_t psrl_len =
      spec.psrl_episode_len ? spec.psrl_episode_len : defaults::kPsrlEpisodeLengthPerState * env.mdp.num_states();

  if (spec.algorithm == "warm_psrl") {
    WarmPsrlConfig wc;
    wc.horizon = config.horizon;
    wc.t_switch = spec.t_switch;
    wc.s_start = s_start;
    wc.tau = tau;
    wc.beta = spec.beta();
    wc.learner = spec.inner == "pucb" ? WarmStartLearner::Pucb : WarmStartLearner::PThompson;
    wc.psrl_episode_length = psrl_len;
    return warm_psrl(env.mdp, env.policies, env.support, wc, rng, options).trace;
  }

  std::unique_ptr<Agent> agent;
  if (spec.algorithm == "pucb") {
    agent = std::make_unique<PucbAgent>(env.policies, spec.beta());
  } else if (spec.algorithm == "pthompson") {
    agent = std::make_unique<PThompsonAgent>(env.policies);
  } else if (spec.algorithm == "random") {
    agent = std::make_unique<RandomAgent>(env.policies);
  } else if (spec.algorithm == "fixed") {
    if (spec.fixed_policy)
      agent = std::make_unique<FixedPolicyAgent>(env.policies.at(*spec.fixed_policy));
    else
      agent = std::make_unique<FixedPolicyAgent>(rho_star.policy);
  } else if (spec.algorithm == "psrl") {
    agent = std::make_unique<PsrlAgent>(PsrlState(env.mdp, env.support), psrl_len);
  } else {
    throw ConfigError("unknown algorithm '" + spec.algorithm + "'");
  }
  return run_agent(env.mdp, *agent, config.horizon, s_start, tau, rng, options);
}

inline void summarise(ExperimentResult& result, const ExperimentConfig& config) {
  for (std::size_t a = 0; a < config.agents.size(); ++a) {
    AgentSummary s;
    s.agent = config.agents[a].label;
    s.teleports = config.agents[a].teleports();
    s.checkpoints = config.checkpoints;
    const std::size_t m = config.checkpoints.size();
    s.mean_regret.assign(m, 0.0);
    s.std_regret.assign(m, 0.0);
    std::vector<const RegretCurve*> ok;
    for (const auto& c : result.curves)
      if (c.agent_index == a) {
        if (c.failed)
          ++s.failures;
        else
          ok.push_back(&c);
      }
    s.runs = ok.size();
    for (const auto* c : ok) s.mean_wall_seconds += c->wall_seconds;
    if (!ok.empty()) s.mean_wall_seconds /= static_cast<double>(ok.size());
    for (std::size_t i = 0; i < m && !ok.empty(); ++i) {
      double sum = 0.0;
      for (const auto* c : ok) sum += c->regret[i];
      const double mean = sum / static_cast<double>(ok.size());
      double sq = 0.0;
      for (const auto* c : ok) sq += (c->regret[i] - mean) * (c->regret[i] - mean);
      s.mean_regret[i] = mean;
      s.std_regret[i] = ok.size() > 1 ? std::sqrt(sq / static_cast<double>(ok.size() - 1)) : 0.0;
    }
    result.summary.push_back(std::move(s));
  }
}

}  // namespace detail

/// Runs every (agent, seed) pair on up to `workers` threads. Results land in
/// fixed slots, so output does not depend on scheduling.
inline ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t workers = 1) {
  config.validate();
  const Environment env = build_environment(config.environment);
  const State s_start = config.s_start.value_or(env.start);
  if (s_start >= env.mdp.num_states()) throw ConfigError("s_start out of range");
  const RhoStar rho_star = compute_rho_star(env.mdp, env.policies, config.rho_star_mode);

  ExperimentResult result;
  result.metadata.config_hash = fnv1a(canonical_config(config).dump());
  result.metadata.environment = env.kind;
  result.metadata.rho_star = rho_star.gain;
  result.metadata.rho_star_mode = to_string(config.rho_star_mode);
  result.metadata.horizon = config.horizon;
  result.metadata.seed_base = config.seed_base;
  result.metadata.num_seeds = config.num_seeds;

  const std::size_t jobs = config.agents.size() * config.num_seeds;
  result.curves.resize(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const std::size_t a = job / config.num_seeds;
      const std::uint64_t seed = config.seed_base + job % config.num_seeds;
      RegretCurve& curve = result.curves[job];
      curve.agent_index = a;
      curve.agent = config.agents[a].label;
      curve.seed = seed;
      curve.rho_star = rho_star.gain;
      const auto started = std::chrono::steady_clock::now();
      try {
        RngStream rng(run_stream_seed(seed, a));
        const RunTrace trace = detail::run_one(env, config.agents[a], config, s_start, rho_star, rng);
        for (const auto& cp : trace.checkpoints) {
          curve.checkpoints.push_back(cp.round);
          curve.cum_reward.push_back(cp.cum_reward);
          curve.regret.push_back(regret_at(rho_star.gain, cp.round, cp.cum_reward));
        }
      } catch (const std::exception& e) {
        curve.failed = true;
        curve.error = e.what();
        curve.checkpoints.clear();
        curve.cum_reward.clear();
        curve.regret.clear();
      }
      curve.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(jobs, 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  detail::summarise(result, config);
  return result;
}

}  // namespace structrl
