#pragma once
// Deterministic random streams. All draws go through hand-rolled transforms
// (Box-Muller, rejection sampling) on top of mt19937_64 so that a given seed
// produces identical results on every platform; the std:: distribution
// classes are implementation-defined and would break byte-level replication.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

namespace seqdiscover {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  // Independent named sub-stream. Derivation depends only on this stream's
  // seed and the name, never on how many draws were consumed.
  Rng derive(std::string_view stream) const {
    return Rng(mix(seed_, fnv1a(stream)));
  }
  Rng derive(std::string_view stream, std::uint64_t index) const {
    return Rng(mix(mix(seed_, fnv1a(stream)), index + 0x9e3779b97f4a7c15ULL));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (two uniforms per draw, no cached state).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n), unbiased via rejection.
  std::size_t uniform_index(std::size_t n) {
    const std::uint64_t span = static_cast<std::uint64_t>(n);
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() / span * span;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % span);
  }

  // k distinct indices from [0, n), partial Fisher-Yates, order random.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
      std::swap(idx[i], idx[i + uniform_index(n - i)]);
    }
    idx.resize(std::min(k, n));
    return idx;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  // splitmix64 finalizer over the xor of the two halves.
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace seqdiscover
