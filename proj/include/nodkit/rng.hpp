#pragma once

#include <algorithm>
#include <cstdint>
#include <random>

namespace nodkit {

// All randomness in the project flows through one of these, seeded from the
// run seed. mt19937_64 keeps sequences reproducible for a fixed binary.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), gen_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(gen_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  int64_t uniform_int(int64_t lo, int64_t hi) {  // inclusive bounds
    return std::uniform_int_distribution<int64_t>(lo, hi)(gen_);
  }
  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(gen_);
  }
  bool bernoulli(double p) { return std::bernoulli_distribution(p)(gen_); }

  template <typename It>
  void shuffle(It first, It last) {
    std::shuffle(first, last, gen_);
  }

  // Derive an independent, reproducible stream (one per volume, per fold...).
  // Depends only on the constructor seed, not on draws made so far.
  Rng fork(uint64_t stream) const { return Rng(mix(seed_, stream)); }

  uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return gen_; }

 private:
  static uint64_t mix(uint64_t a, uint64_t b) {
    // splitmix64 finalizer over the pair
    uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
  }

  uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace nodkit
