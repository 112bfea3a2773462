// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <random>

namespace mixadc {

/// Philox4x32-10 counter-based block cipher. Stateless: the same (counter,
/// key) pair always yields the same four output words.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter encrypt(Counter counter, Key key) noexcept;
};

/// Random stream identified by (seed, stream index).
///
/// Distinct stream indices under the same seed address disjoint regions of the
/// Philox counter space, so trial `i` of a Monte Carlo run can be regenerated
/// without touching any other trial. Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept;

  /// Standard normal draw.
  double normal();
  /// Uniform on [0, 1).
  double uniform();
  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance = 1.0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int next_ = 2;
  std::normal_distribution<double> normal_;
};

}  // namespace mixadc
