#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace coinss {

/// SplitMix64 step; used both as a stand-alone mixer and to expand seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child-seed derivation keyed by (master seed, index, stage tag).
/// Independent of scheduling order, so parallel runs are reproducible.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                 std::uint32_t stage) {
  std::uint64_t s = master;
  (void)splitmix64(s);
  s ^= 0x632be59bd9b4e019ULL * (index + 1);
  (void)splitmix64(s);
  s ^= 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(stage) + 1);
  return splitmix64(s);
}

namespace stage {
constexpr std::uint32_t kSimulate = 1;
constexpr std::uint32_t kEstimate = 2;
constexpr std::uint32_t kMisc = 3;
}  // namespace stage

/// Seeded random stream. One stream per consumer; no global state.
/// Normal variates use Box-Muller on top of mt19937_64 so the sequence
/// depends only on the seed, not on the standard library's distribution
/// implementation.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on (0, 1), never returning exactly 0 or 1.
  double uniform() {
    const std::uint64_t x = gen_();
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace coinss
