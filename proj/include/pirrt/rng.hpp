#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace pirrt {

/// Purpose of a random stream inside one trial. Part of the stream identity so
/// that changing how many draws one role makes never shifts another role.
enum class StreamRole : std::uint64_t {
  Sample = 1,     // RRT state-time samples
  Steer = 2,      // steering rollouts
  Bundle = 3,     // local trajectory bundle around the baseline
  Execute = 4,    // execution noise applied to the vehicle
  Generic = 5,
};

/// 64-bit finaliser from SplitMix64; used to mix stream identities.
std::uint64_t mix64(std::uint64_t x);

/// FNV-1a over bytes; stable across platforms and standard libraries.
std::uint64_t hash_string(std::string_view text);

/// Bit pattern of a double, so config values can take part in seed hashing.
std::uint64_t hash_double(double value);

/// Folds a sequence of identity words into one seed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Identity of a sub-stream: (master, trial, cycle, role, index).
struct StreamKey {
  std::uint64_t master = 0;
  std::uint64_t trial = 0;
  std::uint64_t cycle = 0;

  std::uint64_t seed(StreamRole role, std::uint64_t index = 0) const {
    return derive_seed(master, {trial, cycle, static_cast<std::uint64_t>(role), index});
  }
  StreamKey with_cycle(std::uint64_t c) const { return {master, trial, c}; }
};

/// A seeded pseudo-random stream. The seed value doubles as the tag recorded
/// on every NoiseProfile drawn from it.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}
  RngStream(const StreamKey& key, StreamRole role, std::uint64_t index = 0)
      : RngStream(key.seed(role, index)) {}

  std::uint64_t seed_tag() const { return seed_; }

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }
  /// Uniform on (lo, hi].
  double uniform_left_open(double lo, double hi) { return hi - (hi - lo) * unit_(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

}  // namespace pirrt
