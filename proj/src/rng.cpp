#include "dcsit/rng.hpp"

#include <cmath>

namespace dcsit {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t p : parts) {
    h = mix64(h ^ mix64(p + 0x9e3779b97f4a7c15ULL));
  }
  return h;
}

std::complex<double> RngStream::complex_gaussian(double variance) {
  const double sigma = std::sqrt(variance / 2.0);
  const double re = standard_normal();
  const double im = standard_normal();
  return {sigma * re, sigma * im};
}

}  // namespace dcsit
