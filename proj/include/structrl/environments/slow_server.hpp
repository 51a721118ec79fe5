#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "structrl/environments/policy_family.hpp"
#include "structrl/errors.hpp"
#include "structrl/mdp.hpp"

namespace structrl {

using Rational = boost::rational<std::int64_t>;

/// Parses "p/q" or an integer into an exact fraction.
inline Rational parse_rational(const std::string& text) {
  try {
    const auto slash = text.find('/');
    if (slash == std::string::npos) return Rational(std::stoll(text));
    return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
  } catch (const std::exception&) {
    throw ConfigError("not a rational number: '" + text + "'");
  }
}

inline double to_double(const Rational& r) { return boost::rational_cast<double>(r); }

/// Two heterogeneous servers fed by one finite queue, uniformised so that
/// each step carries at most one event: an arrival (lambda), a completion at
/// server 1 (mu1) or at server 2 (mu2).
struct SlowServerConfig {
  Rational lambda{12, 31};
  Rational mu1{18, 31};
  Rational mu2{1, 31};
  std::size_t buffer = 20;

  void validate() const {
    if (lambda < 0 || mu1 < 0 || mu2 < 0) throw ConfigError("slow server: rates must be non-negative");
    if (!(mu1 > mu2)) throw ConfigError("slow server: mu1 must exceed mu2");
    if (lambda + mu1 + mu2 > 1) throw ConfigError("slow server: lambda + mu1 + mu2 must not exceed 1");
    if (buffer < 1) throw ConfigError("slow server: buffer must be at least 1");
  }
};

/// Queue length (customers waiting, not in service) and server occupancy.
struct SlowServerState {
  std::size_t queue = 0;
  bool busy1 = false;
  bool busy2 = false;

  std::size_t encode() const { return queue * 4 + (busy1 ? 2 : 0) + (busy2 ? 1 : 0); }
  static SlowServerState decode(State s) { return {s / 4, (s & 2) != 0, (s & 1) != 0}; }
  std::size_t in_system() const { return queue + (busy1 ? 1 : 0) + (busy2 ? 1 : 0); }
  bool operator==(const SlowServerState&) const = default;
};

namespace slow_server {
inline constexpr Action kHold = 0;
inline constexpr Action kDispatchFast = 1;
inline constexpr Action kDispatchSlow = 2;
}  // namespace slow_server

inline std::size_t slow_server_num_states(const SlowServerConfig& config) { return 4 * config.buffer; }

/// The empty system: no one waiting, both servers idle.
inline State slow_server_start_state() { return SlowServerState{}.encode(); }

/// Actions open in a state: hold always; a dispatch to each idle server when
/// a customer waits.
inline std::vector<Action> slow_server_actions(const SlowServerState& x) {
  std::vector<Action> acts{slow_server::kHold};
  if (x.queue >= 1 && !x.busy1) acts.push_back(slow_server::kDispatchFast);
  if (x.queue >= 1 && !x.busy2) acts.push_back(slow_server::kDispatchSlow);
  return acts;
}

inline TabularMDP build_slow_server(const SlowServerConfig& config) {
  config.validate();
  const std::size_t B = config.buffer;
  const std::size_t n = slow_server_num_states(config);
  TabularMDP mdp(n);
  for (State s = 0; s < n; ++s) {
    const auto x = SlowServerState::decode(s);
    const double reward = 1.0 - static_cast<double>(x.in_system()) / static_cast<double>(B + 1);
    for (Action a : slow_server_actions(x)) {
      // Dispatch happens at the decision epoch, before the random event.
      SlowServerState post = x;
      if (a == slow_server::kDispatchFast) {
        --post.queue;
        post.busy1 = true;
      } else if (a == slow_server::kDispatchSlow) {
        --post.queue;
        post.busy2 = true;
      }
      std::vector<Rational> row(n, Rational(0));
      Rational stay(1);
      if (post.queue + 1 < B) {
        SlowServerState arrived = post;
        ++arrived.queue;
        row[arrived.encode()] += config.lambda;
        stay -= config.lambda;
      }
      if (post.busy1) {
        SlowServerState done = post;
        done.busy1 = false;
        row[done.encode()] += config.mu1;
        stay -= config.mu1;
      }
      if (post.busy2) {
        SlowServerState done = post;
        done.busy2 = false;
        row[done.encode()] += config.mu2;
        stay -= config.mu2;
      }
      row[post.encode()] += stay;
      std::vector<double> p(n);
      for (State j = 0; j < n; ++j) p[j] = to_double(row[j]);
      mdp.add_action(s, a, std::move(p), std::vector<double>(n, reward));
    }
  }
  return mdp;
}

/// Always feed an idle fast server; feed the idle slow server only while the
/// fast one is busy and at least `threshold` customers wait.
inline DeterministicPolicy slow_server_threshold_policy(const SlowServerConfig& config, std::size_t threshold) {
  const std::size_t n = slow_server_num_states(config);
  DeterministicPolicy pi;
  pi.action_of.assign(n, slow_server::kHold);
  for (State s = 0; s < n; ++s) {
    const auto x = SlowServerState::decode(s);
    if (x.queue >= 1 && !x.busy1)
      pi.action_of[s] = slow_server::kDispatchFast;
    else if (x.queue >= 1 && x.busy1 && !x.busy2 && x.queue >= threshold)
      pi.action_of[s] = slow_server::kDispatchSlow;
  }
  return pi;
}

/// Thresholds 0..B; threshold B never uses the slow server.
inline ThresholdPolicyFamily slow_server_policies(const SlowServerConfig& config) {
  ThresholdPolicyFamily family;
  for (std::size_t theta = 0; theta <= config.buffer; ++theta) {
    family.thresholds.push_back(theta);
    family.policies.push_back(slow_server_threshold_policy(config, theta));
  }
  return family;
}

/// True iff the policy dispatches to the fast server whenever it is idle and
/// a customer waits.
inline bool keeps_fast_server_busy(const SlowServerConfig& config, const DeterministicPolicy& policy) {
  for (State s = 0; s < slow_server_num_states(config); ++s) {
    const auto x = SlowServerState::decode(s);
    if (x.queue >= 1 && !x.busy1 && policy(s) != slow_server::kDispatchFast) return false;
  }
  return true;
}

}  // namespace structrl
