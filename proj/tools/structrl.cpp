// structrl: run regret experiments, compute rho*, validate configs.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "structrl/harness/config.hpp"
#include "structrl/harness/experiment.hpp"
#include "structrl/harness/export.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRunFailure = 2;

structrl::ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw structrl::ConfigError("cannot open config " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw structrl::ConfigError(path + ": " + e.what());
  }
  auto config = structrl::parse_config(doc);
  if (const char* env = std::getenv("STRUCTRL_SEED_BASE")) {
    try {
      std::size_t used = 0;
      config.seed_base = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw structrl::ConfigError(std::string("STRUCTRL_SEED_BASE is not an integer: ") + env);
    }
  }
  return config;
}

int cmd_run(const std::string& config_path, std::string out_dir, std::size_t seeds, std::size_t workers) {
  auto config = load_config(config_path);
  if (seeds) config.num_seeds = seeds;
  if (out_dir.empty()) out_dir = config.output;
  if (out_dir.empty()) throw structrl::ConfigError("no output directory (--out)");
  config.validate();

  const auto result = structrl::run_experiment(config, workers);
  structrl::export_results(result, out_dir);

  std::printf("rho* = %.12f (%s)\n", result.metadata.rho_star, result.metadata.rho_star_mode.c_str());
  for (const auto& s : result.summary) {
    std::printf("%-12s runs=%zu failures=%zu regret(T)=%.3f +- %.3f  %.2fs/run%s\n", s.agent.c_str(), s.runs,
                s.failures, s.mean_regret.empty() ? 0.0 : s.mean_regret.back(),
                s.std_regret.empty() ? 0.0 : s.std_regret.back(), s.mean_wall_seconds,
                s.teleports ? "  [resets to s_start]" : "");
  }
  if (double ratio = structrl::wall_clock_ratio(result, "pthompson", "psrl"); ratio > 0.0)
    std::printf("wall clock pthompson/psrl = %.3f\n", ratio);
  for (const auto& c : result.curves)
    if (c.failed) std::fprintf(stderr, "run %s seed %llu failed: %s\n", c.agent.c_str(),
                               static_cast<unsigned long long>(c.seed), c.error.c_str());
  return result.any_failed() ? kRunFailure : kOk;
}

int cmd_rho_star(const std::string& config_path, const std::string& mode) {
  auto config = load_config(config_path);
  if (!mode.empty()) config.rho_star_mode = structrl::parse_rho_star_mode(mode);
  const auto env = structrl::build_environment(config.environment);
  const auto rho = structrl::compute_rho_star(env.mdp, env.policies, config.rho_star_mode);
  std::printf("%.17g\n", rho.gain);
  if (rho.policy_index) std::printf("policy %zu of %zu\n", *rho.policy_index, env.policies.size());
  return kOk;
}

int cmd_validate(const std::string& config_path) {
  auto config = load_config(config_path);
  const auto env = structrl::build_environment(config.environment);
  const auto report = structrl::validate(env.mdp, config.s_start.value_or(env.start));
  for (const auto& v : report.violations) std::printf("violation: %s\n", v.message.c_str());
  if (!report.unreachable.empty())
    std::printf("note: %zu state(s) unreachable from the start state\n", report.unreachable.size());
  std::printf("%s: %zu states, %zu structured policies, %s\n", env.kind.c_str(), env.mdp.num_states(),
              env.policies.size(), report.ok() ? "ok" : "INVALID");
  return report.ok() ? kOk : kConfigError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured-policy regret experiments on tabular MDPs"};
  app.set_version_flag("--version", std::string(STRUCTRL_VERSION));
  app.require_subcommand(1);

  std::string config_path, out_dir, mode;
  std::size_t seeds = 0, workers = 1;

  auto* run = app.add_subcommand("run", "Run every (agent, seed) pair and write results");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seeds", seeds, "Override num_seeds");
  run->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber);

  auto* rho = app.add_subcommand("rho-star", "Print the optimal gain used for regret");
  rho->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  rho->add_option("--mode", mode, "structured | full")->check(CLI::IsMember({"structured", "full"}));

  auto* val = app.add_subcommand("validate", "Build the environment and check it");
  val->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, seeds, workers);
    if (*rho) return cmd_rho_star(config_path, mode);
    return cmd_validate(config_path);
  } catch (const structrl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const structrl::ConstructionError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRunFailure;
  }
}
