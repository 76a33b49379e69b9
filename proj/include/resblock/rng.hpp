#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace resblock {

/// SplitMix64 finalizer; used to turn (seed, stream id) pairs into well-mixed seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seeded random stream with deterministic named sub-streams.
///
/// All randomness in the library flows through this class so that a run is
/// reproducible from a single 64-bit seed. Sub-streams derive from the parent
/// seed, not the parent state, so concurrent consumers cannot perturb each
/// other.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(mix64(seed)) {}

  RngStream substream(std::uint64_t id) const {
    return RngStream(mix64(seed_ ^ (0xD1B54A32D192ED03ull * (id + 1))));
  }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform draw in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in {0, ..., n-1}.
  int uniform_int(int n) {
    if (n <= 0) throw std::invalid_argument("rng: uniform_int needs n >= 1");
    const int v = static_cast<int>(uniform01() * n);
    return v < n ? v : n - 1;
  }

  /// Draw an index from a probability vector (assumed to sum to one).
  int categorical(const Eigen::Ref<const Eigen::VectorXd>& probs) {
    const double u = uniform01();
    double acc = 0.0;
    for (Eigen::Index k = 0; k + 1 < probs.size(); ++k) {
      acc += probs[k];
      if (u < acc) return static_cast<int>(k);
    }
    return static_cast<int>(probs.size() - 1);
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace resblock
