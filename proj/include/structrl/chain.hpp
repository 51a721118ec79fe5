#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "structrl/constants.hpp"
#include "structrl/errors.hpp"
#include "structrl/mdp.hpp"

namespace structrl {

/// Markov chain and expected one-step reward induced by a fixed policy.
struct InducedChain {
  Eigen::MatrixXd transition;  // P^pi, row-stochastic
  Eigen::VectorXd reward;      // r^pi[s] = sum_s' P^pi[s][s'] R(s, pi(s), s')
};

inline InducedChain induced_chain(const TabularMDP& mdp, const DeterministicPolicy& policy) {
  require_valid_policy(mdp, policy);
  const auto n = static_cast<Eigen::Index>(mdp.num_states());
  InducedChain chain{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  for (State s = 0; s < mdp.num_states(); ++s) {
    const std::size_t k = mdp.slot(s, policy(s));
    auto p = mdp.transition_at(s, k);
    auto r = mdp.rewards_at(s, k);
    if (p.size() != mdp.num_states())
      throw ContractViolation("missing transition row for state " + std::to_string(s));
    double expected = 0.0;
    for (State j = 0; j < p.size(); ++j) {
      chain.transition(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = p[j];
      expected += p[j] * r[j];
    }
    chain.reward(static_cast<Eigen::Index>(s)) = expected;
  }
  return chain;
}

/// Closed communicating classes of the chain (its recurrent classes), each
/// sorted, ordered by smallest member.
inline std::vector<std::vector<State>> recurrent_classes(const Eigen::MatrixXd& P) {
  const auto n = static_cast<std::size_t>(P.rows());
  // reach[i][j]: j reachable from i in >= 0 steps.
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  std::vector<State> stack;
  for (State i = 0; i < n; ++i) {
    auto& seen = reach[i];
    seen[i] = 1;
    stack.assign(1, i);
    while (!stack.empty()) {
      const State u = stack.back();
      stack.pop_back();
      for (State v = 0; v < n; ++v)
        if (!seen[v] && P(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) > 0.0) {
          seen[v] = 1;
          stack.push_back(v);
        }
    }
  }
  std::vector<std::vector<State>> classes;
  std::vector<char> assigned(n, 0);
  for (State i = 0; i < n; ++i) {
    if (assigned[i]) continue;
    // i is recurrent iff everything it reaches reaches it back.
    bool recurrent = true;
    for (State j = 0; j < n && recurrent; ++j)
      if (reach[i][j] && !reach[j][i]) recurrent = false;
    if (!recurrent) continue;
    std::vector<State> members;
    for (State j = 0; j < n; ++j)
      if (reach[i][j]) {
        members.push_back(j);
        assigned[j] = 1;
      }
    classes.push_back(std::move(members));
  }
  return classes;
}

struct ChainAnalysis {
  Eigen::VectorXd stationary;
  double avg_reward = 0.0;
  /// Mean return time 1/d(s); +infinity for transient states.
  std::vector<double> recurrence_time;
  std::vector<State> recurrent_class;
};

/// Stationary distribution, average reward and mean recurrence times of a
/// unichain Markov chain. Throws MultichainError when the chain has more
/// than one recurrent class.
inline ChainAnalysis analyze_chain(const Eigen::MatrixXd& P, const Eigen::VectorXd& r) {
  const Eigen::Index n = P.rows();
  if (n == 0 || P.cols() != n || r.size() != n) throw ContractViolation("analyze_chain: shape mismatch");
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((P.row(i).array() < 0.0).any() || std::abs(P.row(i).sum() - 1.0) > defaults::kRowSumTolerance)
      throw ContractViolation("analyze_chain: row " + std::to_string(i) + " is not a probability vector");
  }

  auto classes = recurrent_classes(P);
  if (classes.size() != 1) throw MultichainError(std::move(classes));
  const auto& cls = classes.front();
  const auto m = static_cast<Eigen::Index>(cls.size());

  // Solve (P_C - I)^T d = 0 on the recurrent class, one equation replaced by
  // the normalisation sum(d) = 1. Transient states carry no mass.
  Eigen::MatrixXd A(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b)
      A(a, b) = P(static_cast<Eigen::Index>(cls[b]), static_cast<Eigen::Index>(cls[a])) - (a == b ? 1.0 : 0.0);
  A.row(m - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs(m - 1) = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd d = lu.solve(rhs);
  // One step of iterative refinement.
  d += lu.solve(rhs - A * d);

  ChainAnalysis out;
  out.stationary = Eigen::VectorXd::Zero(n);
  for (Eigen::Index a = 0; a < m; ++a) out.stationary(static_cast<Eigen::Index>(cls[a])) = std::max(0.0, d(a));
  out.stationary /= out.stationary.sum();
  out.avg_reward = out.stationary.dot(r);
  out.recurrence_time.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (State s : cls) {
    const double mass = out.stationary(static_cast<Eigen::Index>(s));
    if (mass > 0.0) out.recurrence_time[s] = 1.0 / mass;
  }
  out.recurrent_class = cls;
  return out;
}

inline ChainAnalysis analyze_chain(const InducedChain& chain) {
  return analyze_chain(chain.transition, chain.reward);
}

/// Convenience: analyze the chain a policy induces.
inline ChainAnalysis evaluate_policy(const TabularMDP& mdp, const DeterministicPolicy& policy) {
  return analyze_chain(induced_chain(mdp, policy));
}

}  // namespace structrl
