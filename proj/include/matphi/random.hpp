#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "matphi/linalg.hpp"

namespace matphi {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return normal_(engine_); }
  Complex complex_normal();  // E|z|² = 1
  int rademacher() { return (engine_() >> 63) ? 1 : -1; }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Stream keyed by (seed, name, index): the same key always yields the same draws, independent of
// scheduling.
Rng make_rng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);
std::uint64_t mix_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index);

// (G + G†)/2 with complex Gaussian G, scaled by `scale`.
HermitianMatrix random_hermitian(int d, Rng& rng, double scale = 1.0);
// G†G + 1e-3·I with ‖·‖₂ ≤ 10 and λ_min ≥ 1e-3.
HermitianMatrix random_psd(int d, Rng& rng);
// Haar-like unitary from the QR factorization of a complex Gaussian matrix.
CMatrix random_unitary(int d, Rng& rng);
// Uniform eigenvalues in [lo, hi] in a random basis.
HermitianMatrix random_spectrum_in(int d, Rng& rng, double lo, double hi);
HermitianMatrix random_density(int d, Rng& rng);
std::vector<double> random_probability(int k, Rng& rng, double floor = 0.05);

}  // namespace matphi
