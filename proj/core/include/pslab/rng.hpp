#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

namespace pslab {

/// Deterministic random generator with cheap, collision-resistant substreams.
///
/// The engine is xoshiro256++ seeded through splitmix64. Substreams are derived
/// from the *root seed* of a generator, never from its consumed state:
///
///     child_seed = splitmix64(root_seed ^ (0x9E3779B97F4A7C15 * (id + 1)))
///
/// so `rng.stream(id)` yields the same generator no matter how much of `rng`
/// has already been consumed. Sweeps key every Monte Carlo trial off
/// (master seed, grid index, purpose) and stay reproducible across any thread
/// count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) s = splitmix64(x);
  }

  /// Independent substream; derivation depends only on the root seed and `id`.
  Rng stream(std::uint64_t id) const {
    std::uint64_t x = seed_ ^ (0x9E3779B97F4A7C15ULL * (id + 1));
    return Rng(splitmix64(x));
  }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in (0, 1]; never returns 0 so log() stays finite.
  double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Pair of independent N(0,1) draws (Box-Muller).
  std::pair<double, double> normal_pair() {
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double phi = 2.0 * 3.14159265358979323846 * uniform();
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    auto [a, b] = normal_pair();
    spare_ = b;
    has_spare_ = true;
    return a;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t splitmix64(std::uint64_t&& x) {
    std::uint64_t y = x;
    return splitmix64(y);
  }

  std::array<std::uint64_t, 4> state_{};
  std::uint64_t seed_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pslab
