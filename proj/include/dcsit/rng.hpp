#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace dcsit {

// Independent randomness lanes within one slot.
enum class Lane : std::uint64_t {
  channel = 1,
  symbols = 2,
  noise = 3,
  beamformer = 4,
  synthetic = 5,
  component = 6,
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Hashes an ordered tuple of counters into a stream key. Distinct tuples give
// statistically independent streams, so every (seed, snr, trial, slot, lane)
// owns its own substream regardless of which worker evaluates it.
std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts) noexcept;

/// Counter-based generator: the n-th output is mix64(key + n * gamma).
/// Satisfies UniformRandomBitGenerator so <random> distributions work on it.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t key) noexcept : state_{key} {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  double standard_normal() { return normal_(*this); }

  // Circularly-symmetric complex Gaussian with E|x|^2 = variance.
  std::complex<double> complex_gaussian(double variance);

 private:
  std::uint64_t state_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace dcsit
