#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "qcrb/linalg.hpp"

namespace qcrb {

/// Deterministic random source.  Substreams are derived by hashing
/// (seed, stream index) so repetitions can be generated independently and in
/// any order while staying bit-reproducible for a fixed seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::uint64_t stream);

  /// Independent substream of this generator's root seed.
  Rng substream(std::uint64_t stream) const;

  std::uint64_t next_u64();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller (implementation pinned for reproducibility).
  double normal();
  RealVector normal_vector(int n);

  /// Index sampled from an unnormalized nonnegative weight vector.
  int categorical(std::span<const double> weights);

  /// Number of successes in n Bernoulli(p) trials.
  long binomial(long n, double p);

  /// Outcome counts for n draws from an unnormalized weight vector
  /// (sequential conditional binomials; sums to n exactly).
  std::vector<long> multinomial(long n, std::span<const double> weights);

  /// Haar-distributed d x d unitary.
  Matrix haar_unitary(int d);
  /// Haar-distributed unit vector in C^d.
  Eigen::VectorXcd haar_vector(int d);

 private:
  std::uint64_t root_seed_;
  std::mt19937_64 gen_;
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace qcrb
