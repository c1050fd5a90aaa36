#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace irmc {

/// Per-chain random source. Not shared between threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }
  double gamma(double shape, double scale) {
    return std::gamma_distribution<double>(shape, scale)(engine_);
  }
  double exponential() { return std::exponential_distribution<double>(1.0)(engine_); }
  /// +1 or -1 with equal probability.
  double sign() { return uniform() < 0.5 ? 1.0 : -1.0; }

  Eigen::VectorXd normalVector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of chain `index` in a multi-chain run: seed XOR index.
constexpr std::uint64_t chainSeed(std::uint64_t seed, std::size_t index) {
  return seed ^ static_cast<std::uint64_t>(index);
}

/// Seed of the auxiliary-direction stream paired with a chain's main stream.
constexpr std::uint64_t auxSeed(std::uint64_t chain_seed) { return splitmix64(chain_seed); }

}  // namespace irmc
