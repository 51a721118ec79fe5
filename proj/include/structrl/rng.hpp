#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace structrl {

/// Identifies the generator and the distribution code behind every stream,
/// recorded in experiment metadata.
inline constexpr std::string_view kGeneratorId = "mt19937_64/splitmix64-seeded/boost-random";

/// One step of SplitMix64; advances `state`.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a base seed and a list of salts
/// (e.g. agent index, seed index). Each salt is folded through SplitMix64 so
/// neighbouring inputs give unrelated outputs.
constexpr std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> salts) {
  std::uint64_t state = base;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t salt : salts) {
    state = out ^ (salt + 0x632be59bd9b4e019ULL);
    out = splitmix64(state);
  }
  return out;
}

/// Seeded pseudorandom stream. mt19937_64 output is fixed by the standard and
/// the boost distributions are plain header code, so a given seed produces the
/// same sequence on every platform.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t seed() const { return seed_; }
  static constexpr std::string_view algorithm_id() { return kGeneratorId; }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    boost::random::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(*this);
  }

  double gamma(double shape) {
    boost::random::gamma_distribution<double> dist(shape, 1.0);
    return dist(*this);
  }

  double beta(double a, double b) {
    boost::random::beta_distribution<double> dist(a, b);
    return dist(*this);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace structrl
