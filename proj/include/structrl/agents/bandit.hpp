#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "structrl/errors.hpp"
#include "structrl/rng.hpp"
#include "structrl/simulator.hpp"

namespace structrl {

// ---------------------------------------------------------------------------
// pUCB bookkeeping

/// Renewal-reward statistics of one policy-arm. rho_hat is the ratio of
/// summed episode rewards to summed episode lengths, optimistic (1) until the
/// arm completes an episode.
struct ArmStats {
  double rho_hat = 1.0;
  std::uint64_t pulls = 0;
  double reward_total = 0.0;
  std::uint64_t rounds_total = 0;

  bool operator==(const ArmStats&) const = default;
};

inline ArmStats pucb_update(ArmStats stats, const EpisodeRecord& episode) {
  stats.reward_total += episode.reward_sum;
  stats.rounds_total += episode.duration;
  if (stats.rounds_total > 0) stats.rho_hat = stats.reward_total / static_cast<double>(stats.rounds_total);
  ++stats.pulls;
  return stats;
}

/// Exploration bonus beta * sqrt(2 ln t / n); infinite for an unplayed arm.
inline double pucb_bonus(std::uint64_t pulls, std::uint64_t t, double beta) {
  if (pulls == 0) return std::numeric_limits<double>::infinity();
  return beta * std::sqrt(2.0 * std::log(static_cast<double>(t)) / static_cast<double>(pulls));
}

/// argmax_j rho_hat(j) + bonus(j), lowest index on ties. Bonuses are
/// recomputed for every arm with the current round.
inline std::size_t pucb_select(std::span<const ArmStats> arms, std::uint64_t t, double beta) {
  if (t < 1) throw ContractViolation("pucb_select: t must be >= 1");
  if (arms.empty()) throw ContractViolation("pucb_select: no arms");
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < arms.size(); ++j) {
    const double score = arms[j].rho_hat + pucb_bonus(arms[j].pulls, t, beta);
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  return best;
}

/// Exploration weight beta(t) for pUCB.
class BetaSchedule {
 public:
  BetaSchedule() : BetaSchedule(constant(1.0)) {}

  static BetaSchedule constant(double c) {
    return BetaSchedule("constant", c, [c](std::uint64_t) { return c; });
  }
  /// c / ln(e + t): decays slowly towards pure exploitation.
  static BetaSchedule inverse_log(double c) {
    return BetaSchedule("inverse_log", c, [c](std::uint64_t t) {
      return c / std::log(std::numbers::e + static_cast<double>(t));
    });
  }
  static BetaSchedule custom(std::function<double(std::uint64_t)> f) {
    return BetaSchedule("custom", 0.0, std::move(f));
  }

  double operator()(std::uint64_t t) const { return fn_(t); }
  const std::string& kind() const { return kind_; }
  double value() const { return value_; }

 private:
  BetaSchedule(std::string kind, double value, std::function<double(std::uint64_t)> fn)
      : kind_(std::move(kind)), value_(value), fn_(std::move(fn)) {}

  std::string kind_;
  double value_;
  std::function<double(std::uint64_t)> fn_;
};

// ---------------------------------------------------------------------------
// pThompson bookkeeping

/// S counts reward collected, F counts rounds that did not yield reward, so
/// S / (S + F) is the ratio estimator of the arm's average reward.
struct BetaBelief {
  double successes = 0.0;
  double failures = 0.0;

  double mean() const { return successes / (successes + failures); }
  bool operator==(const BetaBelief&) const = default;
};

inline BetaBelief pthompson_update(BetaBelief belief, const EpisodeRecord& episode) {
  const double t = static_cast<double>(episode.duration);
  if (episode.reward_sum < 0.0 || episode.reward_sum > t)
    throw ContractViolation("pthompson_update: episode reward outside [0, duration]");
  belief.successes += episode.reward_sum;
  belief.failures += t - episode.reward_sum;
  return belief;
}

/// Draws theta_k ~ Beta(S_k + 1, F_k + 1) for every arm and returns the
/// argmax (lowest index on ties).
inline std::size_t pthompson_select(std::span<const BetaBelief> arms, RngStream& rng) {
  if (arms.empty()) throw ContractViolation("pthompson_select: no arms");
  std::size_t best = 0;
  double best_theta = -1.0;
  for (std::size_t k = 0; k < arms.size(); ++k) {
    const double theta = rng.beta(arms[k].successes + 1.0, arms[k].failures + 1.0);
    if (theta > best_theta) {
      best_theta = theta;
      best = k;
    }
  }
  return best;
}

inline void to_json(nlohmann::json& j, const ArmStats& a) {
  j = {{"rho_hat", a.rho_hat}, {"pulls", a.pulls}, {"reward_total", a.reward_total}, {"rounds_total", a.rounds_total}};
}
inline void from_json(const nlohmann::json& j, ArmStats& a) {
  j.at("rho_hat").get_to(a.rho_hat);
  j.at("pulls").get_to(a.pulls);
  j.at("reward_total").get_to(a.reward_total);
  j.at("rounds_total").get_to(a.rounds_total);
}
inline void to_json(nlohmann::json& j, const BetaBelief& b) {
  j = {{"successes", b.successes}, {"failures", b.failures}};
}
inline void from_json(const nlohmann::json& j, BetaBelief& b) {
  j.at("successes").get_to(b.successes);
  j.at("failures").get_to(b.failures);
}

}  // namespace structrl
