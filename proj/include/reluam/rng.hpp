#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <stdexcept>

namespace reluam {

// Seed of a reproducible random substream. `root` identifies the experiment,
// `trial` the Monte-Carlo trial. Every sampling routine additionally mixes in
// its own operation tag, so that e.g. the data matrix and the teacher weights
// drawn under the same (root, trial) come from unrelated streams.
struct RngSeed {
  std::uint64_t root = 0;
  std::uint64_t trial = 0;
};

namespace detail {

// splitmix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

// Deterministically folds salt words (trial index, operation tag, grid
// coordinates, ...) into a root seed. Chained splitmix64 absorption; the
// same inputs give the same output on every platform.
inline std::uint64_t mix_seed(std::uint64_t root,
                              std::initializer_list<std::uint64_t> words) {
  std::uint64_t state = root ^ 0x52454c55414d3031ull;  // domain separation
  std::uint64_t h = detail::splitmix64(state);
  for (std::uint64_t w : words) {
    state ^= w + 0x9e3779b97f4a7c15ull + (h << 12) + (h >> 4);
    h = detail::splitmix64(state);
  }
  return h;
}

// Uniform and Gaussian deviates on top of std::mt19937_64 (the engine output
// is pinned by the standard). Gaussians come from the Box-Muller transform on
// explicit 53-bit uniforms rather than std::normal_distribution, whose
// sequence is implementation-defined. The second Box-Muller deviate is cached
// and returned on the next call.
class RandomStream {
 public:
  RandomStream(RngSeed seed, std::uint64_t tag,
               std::initializer_list<std::uint64_t> salt = {})
      : eng_(stream_seed(seed, tag, salt)) {}

  // Uniform on [0,1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Standard normal deviate.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;          // [0,1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Unbiased uniform integer in [0, n). Rejection on the top of the 64-bit
  // range keeps the draw exact.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

 private:
  static std::uint64_t stream_seed(RngSeed seed, std::uint64_t tag,
                                   std::initializer_list<std::uint64_t> salt) {
    std::uint64_t h = mix_seed(seed.root, {seed.trial, tag});
    for (std::uint64_t w : salt) h = mix_seed(h, {w});
    return h;
  }

  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Operation tags for stream separation.
namespace rng_tag {
inline constexpr std::uint64_t kData = 1;
inline constexpr std::uint64_t kWeights = 2;
inline constexpr std::uint64_t kSupport = 3;
inline constexpr std::uint64_t kInit = 4;
}  // namespace rng_tag

}  // namespace reluam
