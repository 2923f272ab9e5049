#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace eprlab {

// splitmix64 finalizer; used to derive independent substream seeds so that
// worker/trial streams are reproducible regardless of execution order.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic random stream. Uniform and normal variates are produced
// from the raw 64-bit engine output with fixed arithmetic (no
// std::*_distribution, whose output is implementation-defined), so the
// same seed yields the same doubles bit-for-bit.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  // Independent stream for (base_seed, index); counter-based derivation,
  // no sequential state shared between substreams.
  static RandomStream substream(std::uint64_t base_seed, std::uint64_t index) {
    return RandomStream(splitmix64(base_seed) ^ splitmix64(0x9e3779b97f4a7c15ULL * (index + 1)));
  }

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1]; safe under log().
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  // Standard normal, Box-Muller. Consumes two uniforms per call.
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    return r * std::cos(2.0 * M_PI * uniform());
  }

  // Standard complex Gaussian with independent N(0,1) real/imag parts.
  std::complex<double> complex_normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double phi = 2.0 * M_PI * uniform();
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  std::uint64_t uniform_index(std::uint64_t n) { return engine_() % n; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace eprlab
