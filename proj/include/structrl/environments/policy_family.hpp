#pragma once

#include <cstddef>
#include <vector>

#include "structrl/mdp.hpp"

namespace structrl {

/// Candidate policies sharing the optimal policy's structure, one per threshold.
struct ThresholdPolicyFamily {
  std::vector<std::size_t> thresholds;
  std::vector<DeterministicPolicy> policies;

  std::size_t size() const { return policies.size(); }
};

}  // namespace structrl
