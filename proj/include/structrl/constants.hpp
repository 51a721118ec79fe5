#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

namespace structrl {

/// Sentinel for an unbounded episode length (tau = infinity).
inline constexpr std::uint64_t kInfiniteTau = std::numeric_limits<std::uint64_t>::max();

/// Every numerical default of the toolkit lives here.
namespace defaults {

// Transition rows must sum to one within this slack.
inline constexpr double kRowSumTolerance = 1e-12;
// Stationary distribution checks (normalisation, fixed point).
inline constexpr double kStationaryTolerance = 1e-10;

// Relative value iteration.
inline constexpr double kPlanningTolerance = 1e-8;
inline constexpr std::size_t kPlanningMaxIters = 1'000'000;
// Weight on P in the aperiodicity transform (1 - w) I + w P.
inline constexpr double kAperiodicityWeight = 0.5;
inline constexpr std::size_t kPlanningReferenceState = 0;

// Hard cap on a single recurrence-delimited episode.
inline constexpr std::uint64_t kEpisodeStepCap = 1'000'000'000;

// Posterior sampling.
inline constexpr double kDirichletPrior = 1.0;
inline constexpr double kUnobservedReward = 1.0;
// PSRL episode length is this multiple of the number of states.
inline constexpr std::uint64_t kPsrlEpisodeLengthPerState = 2;

// Machine replacement transition generator.
inline constexpr double kMachineGamma = 0.5;
inline constexpr double kMachineCMin = 0.05;
inline constexpr double kMachineCMax = 0.95;

// Exploration weight for pUCB.
inline constexpr double kBeta = 1.0;

}  // namespace defaults
}  // namespace structrl
