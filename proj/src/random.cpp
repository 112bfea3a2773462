// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#include "mixadc/random.hpp"

#include <cmath>

namespace mixadc {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

Philox4x32::Counter Philox4x32::encrypt(Counter ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept
    : seed_(seed), stream_(stream) {}

void RandomStream::refill() noexcept {
  // counter = (block lo, block hi, stream lo, stream hi); key = seed
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
  buffer_ = Philox4x32::encrypt(ctr, key);
  ++block_;
  next_ = 0;
}

RandomStream::result_type RandomStream::operator()() noexcept {
  if (next_ >= 2) refill();
  const int i = 2 * next_++;
  return (static_cast<std::uint64_t>(buffer_[i]) << 32) | buffer_[i + 1];
}

double RandomStream::normal() { return normal_(*this); }

double RandomStream::uniform() {
  // 53 random mantissa bits
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::complex<double> RandomStream::complex_normal(double variance) {
  const double scale = std::sqrt(0.5 * variance);
  const double re = normal();
  const double im = normal();
  return {scale * re, scale * im};
}

}  // namespace mixadc
