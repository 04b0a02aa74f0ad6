#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace kbudget {

/// Philox4x32-10 block function (Salmon et al., Random123). Pure function of
/// (counter, key); exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Well-known stream ids. Instance generation and algorithm randomness use
/// separate streams.
namespace streams {
inline constexpr std::uint64_t kInstance = 0x1;
inline constexpr std::uint64_t kAlgorithm = 0x2;
inline constexpr std::uint64_t kExperiment = 0x3;
}  // namespace streams

/// Counter-based 64-bit generator on top of Philox4x32-10.
///
/// The 64-bit seed is the Philox key. The 128-bit counter is split into a
/// 64-bit stream id (high half) and a 64-bit position (low half); every
/// output is a pure function of (seed, stream, position). Each block yields
/// two 64-bit outputs, low word first.
///
/// `substream(tag)` derives an independent stream id with splitmix64 mixing.
/// Normal variates use Box-Muller on 53-bit uniforms.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = streams::kInstance)
      : seed_(seed), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform integer in [0, n). Unbiased (Lemire's multiply-shift rejection).
  std::uint64_t uniform_index(std::uint64_t n);
  /// Standard normal.
  double normal();

  CounterRng substream(std::uint64_t tag) const;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t position() const noexcept { return position_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  std::uint64_t buffered_ = 0;
  bool has_buffered_ = false;
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace kbudget
