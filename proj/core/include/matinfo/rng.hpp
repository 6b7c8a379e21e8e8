// Deterministic random number generation. All sampling in the library goes
// through this wrapper so that a seed fixes every generated byte regardless of
// platform or standard-library vendor (std distributions are not portable).
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace matinfo {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (fixed consumption: two uniforms per draw).
  double gaussian() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

  // FNV-1a hash of the serialized engine state, as 16 hex digits.
  std::string digest() const;

 private:
  std::mt19937_64 engine_;
};

// Stretches a user seed into well-separated stream seeds (splitmix64 step).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace matinfo
