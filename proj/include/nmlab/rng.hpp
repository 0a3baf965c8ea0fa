#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

namespace nmlab {

/// Philox4x32-10 block cipher acting as a counter-based random generator.
/// A draw is a pure function of (key, counter), so particle streams need no state
/// and reruns are bit-identical under any execution order.
namespace philox {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

}  // namespace philox

/// draw purposes keep independent uses of the same (particle, step) coordinates disjoint
enum class DrawPurpose : std::uint32_t { dynamics = 0, initial = 1, resample = 2, bootstrap = 3 };

/// stateless per-run random source; every draw is addressed by (particle, step, purpose)
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// two independent uniforms; the first lies in (0, 1], the second in [0, 1)
  std::pair<double, double> uniform_pair(std::uint64_t particle, std::uint32_t step,
                                         DrawPurpose purpose = DrawPurpose::dynamics) const {
    const auto words = philox::block(
        {static_cast<std::uint32_t>(particle), static_cast<std::uint32_t>(particle >> 32), step,
         static_cast<std::uint32_t>(purpose)},
        {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    const std::uint64_t a = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(words[2]) << 32) | words[3];
    const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
    return {u1, u2};
  }

  double uniform(std::uint64_t particle, std::uint32_t step,
                 DrawPurpose purpose = DrawPurpose::dynamics) const {
    return uniform_pair(particle, step, purpose).first;
  }

  /// standard normal via the Box-Muller transform
  double normal(std::uint64_t particle, std::uint32_t step,
                DrawPurpose purpose = DrawPurpose::dynamics) const {
    const auto [u1, u2] = uniform_pair(particle, step, purpose);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace nmlab
