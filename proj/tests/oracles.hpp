#pragma once

// Reference computations for the tests. Nothing here calls into the chain
// analysis or the planner: stationary laws come from plain power iteration
// and optimal policies from brute-force enumeration.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "structrl/mdp.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

struct Chain {
  Matrix P;
  std::vector<double> r;  // expected one-step reward
};

inline Chain chain_of(const structrl::TabularMDP& mdp, const structrl::DeterministicPolicy& pi) {
  const std::size_t n = mdp.num_states();
  Chain c{Matrix(n, std::vector<double>(n, 0.0)), std::vector<double>(n, 0.0)};
  for (std::size_t s = 0; s < n; ++s) {
    auto p = mdp.transition(s, pi(s));
    auto w = mdp.rewards(s, pi(s));
    for (std::size_t j = 0; j < n; ++j) {
      c.P[s][j] = p[j];
      c.r[s] += p[j] * w[j];
    }
  }
  return c;
}

/// Lazy power iteration x <- (x + xP) / 2 started at `from`; the lazy step
/// converges for periodic chains as well.
inline std::vector<double> stationary(const Matrix& P, std::size_t from, std::size_t iters = 200000) {
  const std::size_t n = P.size();
  std::vector<double> x(n, 0.0), next(n);
  x[from] = 1.0;
  for (std::size_t k = 0; k < iters; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      if (x[i] != 0.0)
        for (std::size_t j = 0; j < n; ++j) next[j] += x[i] * P[i][j];
    for (std::size_t j = 0; j < n; ++j) x[j] = 0.5 * x[j] + 0.5 * next[j];
  }
  return x;
}

inline double gain(const structrl::TabularMDP& mdp, const structrl::DeterministicPolicy& pi, std::size_t from = 0,
                   std::size_t iters = 200000) {
  const auto c = chain_of(mdp, pi);
  const auto d = stationary(c.P, from, iters);
  double g = 0.0;
  for (std::size_t s = 0; s < d.size(); ++s) g += d[s] * c.r[s];
  return g;
}

/// Calls f(policy) for every deterministic policy of `mdp`.
template <class F>
void for_each_policy(const structrl::TabularMDP& mdp, F&& f) {
  const std::size_t n = mdp.num_states();
  std::vector<std::size_t> digit(n, 0);
  structrl::DeterministicPolicy pi;
  pi.action_of.resize(n);
  while (true) {
    for (std::size_t s = 0; s < n; ++s) pi.action_of[s] = mdp.action_at(s, digit[s]);
    f(pi);
    std::size_t s = 0;
    while (s < n && ++digit[s] == mdp.num_actions(s)) digit[s++] = 0;
    if (s == n) return;
  }
}

struct Best {
  structrl::DeterministicPolicy policy;
  double gain = -1.0;
};

inline Best enumerate_best(const structrl::TabularMDP& mdp, std::size_t from = 0, std::size_t iters = 20000) {
  Best best;
  for_each_policy(mdp, [&](const structrl::DeterministicPolicy& pi) {
    const double g = gain(mdp, pi, from, iters);
    if (g > best.gain + 1e-12) best = {pi, g};
  });
  return best;
}

// ---------------------------------------------------------------------------
// Fixture MDPs

/// s0 <-> s1 deterministic two-cycle; reward 1 on the step into s1.
inline structrl::TabularMDP two_cycle() {
  structrl::TabularMDP m(2);
  m.add_action(0, 0, {0.0, 1.0}, {0.0, 1.0});
  m.add_action(1, 0, {1.0, 0.0}, {0.0, 0.0});
  return m;
}

/// Dense random MDP; every row has full support, so every policy is unichain
/// and aperiodic.
inline structrl::TabularMDP random_dense(std::size_t n, std::size_t actions, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  structrl::TabularMDP m(n);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t a = 0; a < actions; ++a) {
      std::vector<double> p(n), r(n);
      double total = 0.0;
      for (auto& x : p) total += (x = u(gen));
      for (auto& x : p) x /= total;
      for (auto& x : r) x = u(gen);
      m.add_action(s, a, p, r);
    }
  return m;
}

/// Like random_dense but every reward is a multiple of 1/8, so sums of up to
/// 2^50 rewards are exact in double precision.
inline structrl::TabularMDP random_dyadic(std::size_t n, std::size_t actions, std::uint64_t seed) {
  auto m = random_dense(n, actions, seed);
  std::mt19937_64 gen(seed ^ 0x5eedULL);
  std::uniform_int_distribution<int> eighths(0, 8);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t a = 0; a < actions; ++a)
      for (std::size_t j = 0; j < n; ++j) m.set_reward(s, a, j, eighths(gen) / 8.0);
  return m;
}

/// Long stays in state 2 are what a short episode cap cuts off.
inline structrl::TabularMDP truncation_fixture() {
  structrl::TabularMDP m(3);
  m.add_action(0, 0, {0.0, 0.5, 0.5}, {0.0, 0.2, 0.6});
  m.add_action(1, 0, {0.5, 0.0, 0.5}, {0.1, 0.0, 0.9});
  m.add_action(2, 0, {0.2, 0.0, 0.8}, {0.5, 0.0, 1.0});
  return m;
}

/// Ratio-of-sums estimate with its delta-method standard error.
struct RatioEstimate {
  double ratio = 0.0;
  double se = 0.0;
  double mean_duration = 0.0;
  double duration_se = 0.0;
};

template <class Episodes>
RatioEstimate ratio_estimate(const Episodes& episodes) {
  const double n = static_cast<double>(episodes.size());
  double w = 0.0, d = 0.0, d2 = 0.0;
  for (const auto& e : episodes) {
    w += e.reward_sum;
    d += static_cast<double>(e.duration);
    d2 += static_cast<double>(e.duration) * static_cast<double>(e.duration);
  }
  RatioEstimate out;
  out.ratio = w / d;
  out.mean_duration = d / n;
  double resid = 0.0;
  for (const auto& e : episodes) {
    const double z = e.reward_sum - out.ratio * static_cast<double>(e.duration);
    resid += z * z;
  }
  out.se = std::sqrt(resid / (n - 1.0)) / (out.mean_duration * std::sqrt(n));
  out.duration_se = std::sqrt((d2 / n - out.mean_duration * out.mean_duration) / n);
  return out;
}

inline structrl::DeterministicPolicy constant_policy(std::size_t n, structrl::Action a) {
  return {std::vector<structrl::Action>(n, a)};
}

}  // namespace oracle
