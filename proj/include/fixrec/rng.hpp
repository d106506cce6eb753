#pragma once

#include <cstdint>

namespace fixrec {

/// SplitMix64 (Steele, Lea, Flood 2014). One multiply-xor-shift mix per draw,
/// 64-bit state, period 2^64. Every seeded computation in this project uses
/// this generator rather than the platform default so that results are
/// bit-identical across platforms and standard-library versions.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 mantissa bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Lemire multiply-shift reduction; the tiny
  /// modulo bias (< 2^-32 for the n used here) is irrelevant and the result
  /// is fully deterministic.
  std::uint32_t next_below(std::uint32_t n) {
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(next_u64() >> 32) * n) >> 32);
  }

 private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and a stream index
/// (fold number, document index, ...). Defined as one SplitMix64 mix of
/// base XOR (golden-ratio * (index+1)) so that stream 0 differs from the
/// base stream itself.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  SplitMix64 g(base ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  return g.next_u64();
}

}  // namespace fixrec
