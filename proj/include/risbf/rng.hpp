#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "risbf/types.hpp"

namespace risbf {

/// SplitMix64 finalizer; used to derive independent per-run seeds.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

/// Reproducible random source: std::mt19937_64 (fully specified by the
/// standard) with hand-written uniform and Gaussian transforms, so a seed
/// yields identical streams on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Circularly-symmetric CN(0,1): real and imaginary parts are independent
  /// N(0, 1/2). Box-Muller in polar form: |z|^2 ~ Exp(1), arg z ~ U[0, 2pi).
  cplx complex_gaussian() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::polar(std::sqrt(-std::log(u1)), 2.0 * std::numbers::pi * u2);
  }

  CMat complex_gaussian(Eigen::Index rows, Eigen::Index cols) {
    CMat m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = complex_gaussian();
    return m;
  }

  /// e^{j phi} with phi ~ U[0, 2pi).
  cplx unit_phasor() { return std::polar(1.0, 2.0 * std::numbers::pi * uniform()); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace risbf
