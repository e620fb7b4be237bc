#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>

namespace metacon {

// Deterministic, serializable random stream (xoshiro256++). We avoid the
// <random> distributions on purpose: their output is implementation-defined,
// and every artifact here must be a pure function of (config, root seed).
class RandomStream {
 public:
  RandomStream() : RandomStream(0x9e3779b97f4a7c15ULL) {}

  explicit RandomStream(uint64_t seed) {
    // splitmix64 expansion of the seed into the full state
    uint64_t x = seed;
    for (auto& w : state_) w = splitmix64(x);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller; consumes exactly two uniforms per call so
  // the stream position never depends on cached state
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();  // guard log(0); astronomically rare
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // integer in [0, n)
  int uniform_int(int n) {
    return static_cast<int>(next_u64() % static_cast<uint64_t>(n));
  }

  std::array<uint64_t, 4> state() const { return state_; }
  void set_state(const std::array<uint64_t, 4>& s) { state_ = s; }

  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  std::array<uint64_t, 4> state_{};
};

// Splittable seed derivation: children are addressed by label so that the
// scheduling order of parallel cells can never change any result.
class SeedTree {
 public:
  explicit SeedTree(uint64_t root) : seed_(root) {}

  SeedTree child(std::string_view label) const {
    uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the label
    for (unsigned char c : label) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    uint64_t x = seed_ ^ h;
    uint64_t s = RandomStream::splitmix64(x);
    s ^= RandomStream::splitmix64(x);
    return SeedTree(s);
  }

  SeedTree child(std::string_view label, int index) const {
    return child(std::string(label) + ":" + std::to_string(index));
  }

  RandomStream stream() const { return RandomStream(seed_); }
  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
};

}  // namespace metacon
