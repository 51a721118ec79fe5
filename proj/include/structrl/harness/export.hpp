#pragma once

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "structrl/errors.hpp"
#include "structrl/harness/experiment.hpp"

namespace structrl {

class ExportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// %.17g: enough digits to round-trip any double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string hex64(std::uint64_t x) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, x);
  return buf;
}

inline std::string results_csv(const ExperimentResult& result) {
  std::string out = "agent,seed,checkpoint,cum_reward,regret\n";
  for (const auto& c : result.curves) {
    if (c.failed) continue;
    for (std::size_t i = 0; i < c.checkpoints.size(); ++i) {
      out += c.agent;
      out += ',' + std::to_string(c.seed) + ',' + std::to_string(c.checkpoints[i]) + ',';
      out += format_double(c.cum_reward[i]) + ',' + format_double(c.regret[i]) + '\n';
    }
  }
  return out;
}

inline std::string summary_csv(const ExperimentResult& result) {
  std::string out = "agent,checkpoint,mean_regret,std_regret,runs,failures\n";
  for (const auto& s : result.summary)
    for (std::size_t i = 0; i < s.checkpoints.size(); ++i)
      out += s.agent + ',' + std::to_string(s.checkpoints[i]) + ',' + format_double(s.mean_regret[i]) + ',' +
             format_double(s.std_regret[i]) + ',' + std::to_string(s.runs) + ',' + std::to_string(s.failures) + '\n';
  return out;
}

/// Wall-clock numbers vary between executions, so they live in their own file.
inline std::string timing_csv(const ExperimentResult& result) {
  std::string out = "agent,seed,wall_seconds\n";
  for (const auto& c : result.curves)
    out += c.agent + ',' + std::to_string(c.seed) + ',' + format_double(c.wall_seconds) + '\n';
  return out;
}

/// Mean wall clock of `numerator` over that of `denominator`; 0 when either
/// agent is absent.
inline double wall_clock_ratio(const ExperimentResult& result, const std::string& numerator,
                               const std::string& denominator) {
  double num = 0.0, den = 0.0;
  for (const auto& s : result.summary) {
    if (s.agent == numerator) num = s.mean_wall_seconds;
    if (s.agent == denominator) den = s.mean_wall_seconds;
  }
  return num > 0.0 && den > 0.0 ? num / den : 0.0;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json results_json(const ExperimentResult& result) {
  const auto& m = result.metadata;
  nlohmann::json j;
  j["metadata"] = {{"generator", m.generator},   {"config_hash", hex64(m.config_hash)},
                   {"version", m.version},       {"environment", m.environment},
                   {"rho_star", m.rho_star},     {"rho_star_mode", m.rho_star_mode},
                   {"horizon", m.horizon},       {"seed_base", m.seed_base},
                   {"num_seeds", m.num_seeds}};
  auto agents = nlohmann::json::array();
  for (const auto& s : result.summary)
    agents.push_back({{"agent", s.agent},
                      {"teleports", s.teleports},
                      {"runs", s.runs},
                      {"failures", s.failures},
                      {"checkpoints", s.checkpoints},
                      {"mean_regret", s.mean_regret},
                      {"std_regret", s.std_regret}});
  j["agents"] = std::move(agents);
  auto records = nlohmann::json::array();
  auto failures = nlohmann::json::array();
  for (const auto& c : result.curves) {
    if (c.failed) {
      failures.push_back({{"agent", c.agent}, {"seed", c.seed}, {"error", c.error}});
      continue;
    }
    for (std::size_t i = 0; i < c.checkpoints.size(); ++i)
      records.push_back({{"agent", c.agent},
                         {"seed", c.seed},
                         {"checkpoint", c.checkpoints[i]},
                         {"cum_reward", c.cum_reward[i]},
                         {"regret", c.regret[i]}});
  }
  j["records"] = std::move(records);
  j["failures"] = std::move(failures);
  return j;
}

/// Inverse of `results_json`. Wall-clock fields are not stored and come back
/// as zero.
inline ExperimentResult results_from_json(const nlohmann::json& j) {
  try {
    ExperimentResult r;
    const auto& m = j.at("metadata");
    r.metadata.generator = m.at("generator").get<std::string>();
    r.metadata.config_hash = std::stoull(m.at("config_hash").get<std::string>(), nullptr, 16);
    r.metadata.version = m.at("version").get<std::string>();
    r.metadata.environment = m.at("environment").get<std::string>();
    r.metadata.rho_star = m.at("rho_star").get<double>();
    r.metadata.rho_star_mode = m.at("rho_star_mode").get<std::string>();
    r.metadata.horizon = m.at("horizon").get<std::uint64_t>();
    r.metadata.seed_base = m.at("seed_base").get<std::uint64_t>();
    r.metadata.num_seeds = m.at("num_seeds").get<std::size_t>();

    std::map<std::string, std::size_t> index_of;
    for (const auto& a : j.at("agents")) {
      AgentSummary s;
      s.agent = a.at("agent").get<std::string>();
      s.teleports = a.at("teleports").get<bool>();
      s.runs = a.at("runs").get<std::size_t>();
      s.failures = a.at("failures").get<std::size_t>();
      s.checkpoints = a.at("checkpoints").get<std::vector<std::uint64_t>>();
      s.mean_regret = a.at("mean_regret").get<std::vector<double>>();
      s.std_regret = a.at("std_regret").get<std::vector<double>>();
      index_of[s.agent] = r.summary.size();
      r.summary.push_back(std::move(s));
    }

    std::map<std::pair<std::size_t, std::uint64_t>, RegretCurve> curves;
    auto curve_for = [&](const nlohmann::json& rec) -> RegretCurve& {
      const auto agent = rec.at("agent").get<std::string>();
      const auto seed = rec.at("seed").get<std::uint64_t>();
      auto it = index_of.find(agent);
      if (it == index_of.end()) throw ConfigError("record for unknown agent '" + agent + "'");
      RegretCurve& c = curves[{it->second, seed}];
      c.agent_index = it->second;
      c.agent = agent;
      c.seed = seed;
      c.rho_star = r.metadata.rho_star;
      return c;
    };
    for (const auto& rec : j.at("records")) {
      RegretCurve& c = curve_for(rec);
      c.checkpoints.push_back(rec.at("checkpoint").get<std::uint64_t>());
      c.cum_reward.push_back(rec.at("cum_reward").get<double>());
      c.regret.push_back(rec.at("regret").get<double>());
    }
    for (const auto& rec : j.at("failures")) {
      RegretCurve& c = curve_for(rec);
      c.failed = true;
      c.error = rec.at("error").get<std::string>();
    }
    for (auto& [key, c] : curves) r.curves.push_back(std::move(c));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed results document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Files

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ExportError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw ExportError("failed writing " + path.string());
}

/// Writes results.csv, results.json, summary.csv and timing.csv into `dir`.
inline void export_results(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ExportError("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "results.csv", results_csv(result));
  write_text(dir / "results.json", results_json(result).dump(2) + "\n");
  write_text(dir / "summary.csv", summary_csv(result));
  write_text(dir / "timing.csv", timing_csv(result));
}

}  // namespace structrl
