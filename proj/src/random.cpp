#include "matphi/random.hpp"

#include <cmath>

#include <Eigen/QR>

namespace matphi {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Complex Rng::complex_normal() {
  const double r = std::sqrt(0.5);
  const double a = normal();
  const double b = normal();
  return {r * a, r * b};
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ fnv1a(stream)) ^ index);
}

Rng make_rng(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
  return Rng(mix_seed(seed, stream, index));
}

HermitianMatrix random_hermitian(int d, Rng& rng, double scale) {
  CMatrix g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = rng.complex_normal();
  return HermitianMatrix::symmetrized(scale * g);
}

HermitianMatrix random_psd(int d, Rng& rng) {
  CMatrix g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = rng.complex_normal();
  CMatrix w = g.adjoint() * g;
  const double norm = w.norm();
  if (norm > 9.0) w *= 9.0 / norm;
  w += 1e-3 * CMatrix::Identity(d, d);
  return HermitianMatrix::symmetrized(w);
}

CMatrix random_unitary(int d, Rng& rng) {
  CMatrix g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR();
  for (int i = 0; i < d; ++i) {
    const double a = std::abs(r(i, i));
    if (a > 0) q.col(i) *= r(i, i) / a;
  }
  return q;
}

HermitianMatrix random_spectrum_in(int d, Rng& rng, double lo, double hi) {
  RVector lam(d);
  for (int i = 0; i < d; ++i) lam(i) = rng.uniform(lo, hi);
  return HermitianMatrix::from_spectrum(lam, random_unitary(d, rng));
}

HermitianMatrix random_density(int d, Rng& rng) {
  const HermitianMatrix w = random_psd(d, rng);
  return (1.0 / trace(w)) * w;
}

std::vector<double> random_probability(int k, Rng& rng, double floor) {
  std::vector<double> p(k);
  double sum = 0.0;
  for (auto& x : p) {
    x = floor + rng.uniform();
    sum += x;
  }
  for (auto& x : p) x /= sum;
  return p;
}

}  // namespace matphi
