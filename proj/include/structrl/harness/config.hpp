#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "structrl/agents/agents.hpp"
#include "structrl/agents/psrl.hpp"
#include "structrl/constants.hpp"
#include "structrl/environments/machine_replacement.hpp"
#include "structrl/environments/slow_server.hpp"
#include "structrl/errors.hpp"
#include "structrl/mdp.hpp"
#include "structrl/planning.hpp"
#include "structrl/rng.hpp"

namespace structrl {

enum class RhoStarMode { Structured, Full };

inline RhoStarMode parse_rho_star_mode(const std::string& text) {
  if (text == "structured") return RhoStarMode::Structured;
  if (text == "full") return RhoStarMode::Full;
  throw ConfigError("rho_star_mode must be 'structured' or 'full', got '" + text + "'");
}

inline std::string to_string(RhoStarMode mode) { return mode == RhoStarMode::Full ? "full" : "structured"; }

/// A constructed environment together with what the agents need to know
/// about its structure.
struct Environment {
  std::string kind;
  TabularMDP mdp;
  PolicyFamily policies;     // the structured family
  SuccessorSupport support;  // PSRL's permitted successors
  State start = 0;
};

struct AgentSpec {
  std::string algorithm;  // pucb | pthompson | psrl | warm_psrl | random | fixed
  std::string label;
  std::string beta_kind = "constant";
  double beta_value = defaults::kBeta;
  std::optional<std::uint64_t> tau;  // falls back to the experiment's tau
  std::uint64_t t_switch = 0;
  std::uint64_t psrl_episode_len = 0;  // 0: 2N
  std::string inner = "pthompson";     // warm_psrl phase-1 learner
  std::optional<std::size_t> fixed_policy;  // fixed agent; empty = the structured optimum

  BetaSchedule beta() const {
    if (beta_kind == "constant") return BetaSchedule::constant(beta_value);
    if (beta_kind == "inverse_log") return BetaSchedule::inverse_log(beta_value);
    throw ConfigError("unknown beta schedule '" + beta_kind + "'");
  }
  /// Only PSRL-based agents get the reset-to-start capability.
  bool teleports() const { return algorithm == "psrl" || algorithm == "warm_psrl"; }
};

struct ExperimentConfig {
  nlohmann::json environment;
  std::vector<AgentSpec> agents;
  std::uint64_t horizon = 0;
  std::optional<State> s_start;  // defaults to the environment's start state
  std::uint64_t tau = kInfiniteTau;
  std::size_t num_seeds = 1;
  std::uint64_t seed_base = 0;
  std::vector<std::uint64_t> checkpoints;
  RhoStarMode rho_star_mode = RhoStarMode::Structured;
  std::string output;

  void validate() const {
    if (horizon < 1) throw ConfigError("horizon must be at least 1");
    if (num_seeds < 1) throw ConfigError("num_seeds must be at least 1");
    if (agents.empty()) throw ConfigError("at least one agent is required");
    if (tau == 0) throw ConfigError("tau must be positive");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
      if (checkpoints[i] < 1 || checkpoints[i] > horizon) throw ConfigError("checkpoints must lie in [1, T]");
      if (i && checkpoints[i] <= checkpoints[i - 1]) throw ConfigError("checkpoints must be strictly increasing");
    }
    for (const auto& a : agents) {
      if (a.algorithm == "warm_psrl" && !(a.t_switch > 0 && a.t_switch < horizon))
        throw ConfigError("agent '" + a.label + "': warm_psrl needs 0 < t_switch < T");
      if (a.tau && *a.tau == 0) throw ConfigError("agent '" + a.label + "': tau must be positive");
      (void)a.beta();
    }
  }
};

/// 1, 2, 5, 10, 20, 50, ... up to T, with T itself always last.
inline std::vector<std::uint64_t> default_checkpoints(std::uint64_t horizon) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t decade = 1; decade <= horizon; decade *= 10) {
    for (std::uint64_t m : {1, 2, 5})
      if (m * decade <= horizon) out.push_back(m * decade);
    if (decade > horizon / 10) break;
  }
  if (out.empty() || out.back() != horizon) out.push_back(horizon);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::uint64_t parse_tau(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInfiniteTau;
    throw ConfigError("tau must be a positive integer or \"inf\"");
  }
  if (!j.is_number_integer() || j.get<std::int64_t>() < 1) throw ConfigError("tau must be a positive integer or \"inf\"");
  return j.get<std::uint64_t>();
}

inline std::uint64_t parse_count(const nlohmann::json& j, const char* what) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0)
    throw ConfigError(std::string(what) + " must be a non-negative integer");
  return j.get<std::uint64_t>();
}

inline Rational rational_field(const nlohmann::json& j, const char* key, Rational fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  throw ConfigError(std::string("slow_server.") + key + " must be an exact rational string such as \"12/31\"");
}

}  // namespace detail

inline AgentSpec parse_agent(const nlohmann::json& j) {
  AgentSpec a;
  a.algorithm = j.at("algorithm").get<std::string>();
  static const std::vector<std::string> known{"pucb", "pthompson", "psrl", "warm_psrl", "random", "fixed"};
  if (std::find(known.begin(), known.end(), a.algorithm) == known.end())
    throw ConfigError("unknown algorithm '" + a.algorithm + "'");
  a.label = j.value("label", a.algorithm);
  if (j.contains("beta")) {
    const auto& b = j.at("beta");
    if (b.is_number()) {
      a.beta_value = b.get<double>();
    } else {
      a.beta_kind = b.value("kind", "constant");
      a.beta_value = b.value("value", defaults::kBeta);
    }
  }
  if (j.contains("tau")) a.tau = detail::parse_tau(j.at("tau"));
  if (j.contains("t_switch")) a.t_switch = detail::parse_count(j.at("t_switch"), "t_switch");
  if (j.contains("psrl_episode_len")) a.psrl_episode_len = detail::parse_count(j.at("psrl_episode_len"), "psrl_episode_len");
  a.inner = j.value("inner", std::string("pthompson"));
  if (a.inner != "pthompson" && a.inner != "pucb") throw ConfigError("inner must be 'pucb' or 'pthompson'");
  if (j.contains("policy")) {
    const auto& p = j.at("policy");
    if (p.is_string() && p.get<std::string>() == "best") {
      a.fixed_policy.reset();
    } else {
      a.fixed_policy = static_cast<std::size_t>(detail::parse_count(p, "policy"));
    }
  }
  return a;
}

/// Reads one combined document: {"environment": {...}, "agents": [...],
/// "experiment": {...}}.
inline ExperimentConfig parse_config(const nlohmann::json& doc) {
  try {
    ExperimentConfig c;
    c.environment = doc.at("environment");
    for (const auto& a : doc.at("agents")) c.agents.push_back(parse_agent(a));
    const auto& e = doc.at("experiment");
    c.horizon = detail::parse_count(e.at("horizon"), "horizon");
    if (e.contains("s_start")) c.s_start = static_cast<State>(detail::parse_count(e.at("s_start"), "s_start"));
    if (e.contains("tau")) c.tau = detail::parse_tau(e.at("tau"));
    c.num_seeds = static_cast<std::size_t>(detail::parse_count(e.value("num_seeds", nlohmann::json(1)), "num_seeds"));
    c.seed_base = detail::parse_count(e.value("seed_base", nlohmann::json(0)), "seed_base");
    if (e.contains("checkpoints"))
      for (const auto& t : e.at("checkpoints")) c.checkpoints.push_back(detail::parse_count(t, "checkpoint"));
    else
      c.checkpoints = default_checkpoints(c.horizon);
    c.rho_star_mode = parse_rho_star_mode(e.value("rho_star_mode", std::string("structured")));
    c.output = e.value("output", std::string());
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("malformed config: ") + ex.what());
  }
}

/// Builds the environment named by an "env" block.
inline Environment build_environment(const nlohmann::json& j) {
  try {
    Environment env;
    env.kind = j.at("env").get<std::string>();
    if (env.kind == "slow_server") {
      SlowServerConfig sc;
      sc.lambda = detail::rational_field(j, "lambda", sc.lambda);
      sc.mu1 = detail::rational_field(j, "mu1", sc.mu1);
      sc.mu2 = detail::rational_field(j, "mu2", sc.mu2);
      sc.buffer = static_cast<std::size_t>(detail::parse_count(j.value("buffer", nlohmann::json(sc.buffer)), "buffer"));
      env.mdp = build_slow_server(sc);
      env.policies = slow_server_policies(sc).policies;
      // Nothing in the queue model is handed to PSRL beyond the action sets.
      env.support = full_support(env.mdp);
      env.start = slow_server_start_state();
    } else if (env.kind == "machine_replacement") {
      MachineReplacementConfig mc;
      mc.n = static_cast<std::size_t>(detail::parse_count(j.value("n", nlohmann::json(mc.n)), "n"));
      mc.g_max = j.value("g_max", mc.g_max);
      mc.repair_cost = j.value("repair_cost", mc.repair_cost);
      mc.gamma = j.value("gamma", mc.gamma);
      mc.c_min = j.value("c_min", mc.c_min);
      mc.c_max = j.value("c_max", mc.c_max);
      if (j.contains("costs")) mc.costs = j.at("costs").get<std::vector<double>>();
      RngStream env_rng(detail::parse_count(j.value("env_seed", nlohmann::json(0)), "env_seed"));
      env.mdp = build_machine_replacement(mc, env_rng);
      env.policies = machine_replacement_policies(mc.n).policies;
      env.support = machine_replacement_support(mc.n);
      env.start = 0;
    } else if (env.kind == "tabular") {
      env.mdp = mdp_from_json(j.at("mdp"));
      if (auto report = validate(env.mdp); !report.ok())
        throw ConfigError("tabular MDP is invalid: " + report.violations.front().message);
      if (j.contains("policies")) {
        for (const auto& p : j.at("policies")) env.policies.push_back({p.get<std::vector<Action>>()});
      }
      for (const auto& p : env.policies)
        if (!is_valid_policy(env.mdp, p)) throw ConfigError("tabular policy does not fit the MDP");
      const auto support = j.value("support", std::string("full"));
      if (support == "full")
        env.support = full_support(env.mdp);
      else if (support == "observed")
        env.support = observed_support(env.mdp);
      else
        throw ConfigError("support must be 'full' or 'observed'");
      env.start = 0;
    } else {
      throw ConfigError("unknown environment '" + env.kind + "'");
    }
    return env;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("malformed environment block: ") + ex.what());
  } catch (const ContractViolation& ex) {
    throw ConfigError(std::string("environment: ") + ex.what());
  }
}

}  // namespace structrl
