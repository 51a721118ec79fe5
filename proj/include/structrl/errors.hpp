#pragma once

#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace structrl {

/// A caller broke a documented precondition (invalid action, bad index, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Input configuration could not be parsed or is inconsistent.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An environment generator produced (or was asked for) an instance that
/// breaks its structural constraints.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The induced chain has more than one recurrent class.
class MultichainError : public std::runtime_error {
 public:
  MultichainError(std::vector<std::vector<std::size_t>> classes,
                  std::optional<std::size_t> policy_index = std::nullopt)
      : std::runtime_error(describe(classes, policy_index)),
        classes_(std::move(classes)),
        policy_index_(policy_index) {}

  const std::vector<std::vector<std::size_t>>& classes() const { return classes_; }
  std::optional<std::size_t> policy_index() const { return policy_index_; }

 private:
  static std::string describe(const std::vector<std::vector<std::size_t>>& classes,
                              std::optional<std::size_t> policy_index) {
    std::ostringstream os;
    os << "multichain: " << classes.size() << " recurrent classes";
    for (const auto& c : classes) {
      os << " {";
      for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
      os << "}";
    }
    if (policy_index) os << " (policy " << *policy_index << ")";
    return os.str();
  }

  std::vector<std::vector<std::size_t>> classes_;
  std::optional<std::size_t> policy_index_;
};

/// Relative value iteration ran out of iterations.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(std::size_t iterations, double last_span)
      : std::runtime_error("relative value iteration did not converge after " +
                           std::to_string(iterations) +
                           " iterations (span " + std::to_string(last_span) + ")"),
        iterations_(iterations),
        last_span_(last_span) {}

  std::size_t iterations() const { return iterations_; }
  double last_span() const { return last_span_; }

 private:
  std::size_t iterations_;
  double last_span_;
};

/// An episode exceeded the hard step cap (start state transient under the policy).
class EpisodeCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace structrl
