#include "matphi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace matphi {

bool SpectralInterval::contains(double x) const {
  if (lo_open ? !(x > lo) : !(x >= lo)) return false;
  if (hi_open ? !(x < hi) : !(x <= hi)) return false;
  return true;
}

double tol_spec(int d) { return 1e-9 * std::max(d, 1); }

namespace {

double sup_entry(const CMatrix& m) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) s = std::max(s, std::abs(m(i, j)));
  return s;
}

}  // namespace

HermitianMatrix::HermitianMatrix(int d)
    : m_(CMatrix::Zero(d, d)), cache_(std::make_shared<Cache>()) {}

HermitianMatrix::HermitianMatrix(CMatrix m, Trusted) : m_(std::move(m)), cache_(std::make_shared<Cache>()) {}

HermitianMatrix::HermitianMatrix(const CMatrix& m) : cache_(std::make_shared<Cache>()) {
  if (m.rows() != m.cols()) throw NotHermitian("matrix is not square");
  const double tol = 1e-10 * (1.0 + sup_entry(m));
  const double dev = sup_entry(m - m.adjoint());
  if (!(dev <= tol)) {
    std::ostringstream os;
    os << "max |A - A^dagger| = " << dev << " exceeds " << tol;
    throw NotHermitian(os.str());
  }
  m_ = 0.5 * (m + m.adjoint());
}

HermitianMatrix HermitianMatrix::symmetrized(const CMatrix& m) {
  return HermitianMatrix(CMatrix(0.5 * (m + m.adjoint())), Trusted{});
}

HermitianMatrix HermitianMatrix::identity(int d) {
  return HermitianMatrix(CMatrix(CMatrix::Identity(d, d)), Trusted{});
}

HermitianMatrix HermitianMatrix::diagonal(const std::vector<double>& values) {
  const int d = static_cast<int>(values.size());
  CMatrix m = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) m(i, i) = values[i];
  return HermitianMatrix(std::move(m), Trusted{});
}

HermitianMatrix HermitianMatrix::from_spectrum(const RVector& values, const CMatrix& vectors) {
  CMatrix m = vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
  return symmetrized(m);
}

const Spectrum& HermitianMatrix::spectrum() const {
  std::call_once(cache_->once, [this] {
    const int d = dim();
    Spectrum s;
    if (d == 0) {
      s.values = RVector(0);
      s.vectors = CMatrix(0, 0);
    } else if (d == 1) {
      s.values = RVector::Constant(1, m_(0, 0).real());
      s.vectors = CMatrix::Identity(1, 1);
    } else {
      Eigen::SelfAdjointEigenSolver<CMatrix> solver(m_);
      s.values = solver.eigenvalues();
      s.vectors = solver.eigenvectors();
    }
    cache_->spectrum = std::move(s);
  });
  return cache_->spectrum;
}

double HermitianMatrix::min_eigenvalue() const {
  const auto& s = spectrum();
  return s.values.size() ? s.values(0) : 0.0;
}

double HermitianMatrix::max_eigenvalue() const {
  const auto& s = spectrum();
  return s.values.size() ? s.values(s.values.size() - 1) : 0.0;
}

double HermitianMatrix::tol_herm() const { return 1e-10 * (1.0 + sup_entry(m_)); }

HermitianMatrix HermitianMatrix::operator-() const { return HermitianMatrix(CMatrix(-m_), Trusted{}); }

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& other) {
  require_same_dim(*this, other, "operator+");
  m_ += other.m_;
  cache_ = std::make_shared<Cache>();
  return *this;
}

HermitianMatrix& HermitianMatrix::operator-=(const HermitianMatrix& other) {
  require_same_dim(*this, other, "operator-");
  m_ -= other.m_;
  cache_ = std::make_shared<Cache>();
  return *this;
}

HermitianMatrix& HermitianMatrix::operator*=(double c) {
  m_ *= c;
  cache_ = std::make_shared<Cache>();
  return *this;
}

HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
HermitianMatrix operator*(double c, HermitianMatrix a) { return a *= c; }
HermitianMatrix operator*(HermitianMatrix a, double c) { return a *= c; }

void require_same_dim(const HermitianMatrix& a, const HermitianMatrix& b, const char* where) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << where << ": " << a.dim() << " vs " << b.dim();
    throw DimensionMismatch(os.str());
  }
}

Spectrum spectral_decompose(const HermitianMatrix& a) { return a.spectrum(); }

HermitianMatrix apply_standard_function(const RealFunction& f, const HermitianMatrix& a,
                                        const SpectralInterval& domain) {
  const auto& s = a.spectrum();
  const double slack = tol_spec(a.dim());
  RVector mapped(s.values.size());
  std::vector<double> bad;
  for (Eigen::Index i = 0; i < s.values.size(); ++i) {
    double x = s.values(i);
    if (!domain.contains(x)) {
      if (!domain.lo_open && x < domain.lo && x >= domain.lo - slack) {
        x = domain.lo;
      } else if (!domain.hi_open && x > domain.hi && x <= domain.hi + slack) {
        x = domain.hi;
      } else {
        bad.push_back(x);
        continue;
      }
    }
    mapped(i) = f(x);
  }
  if (!bad.empty()) {
    std::ostringstream os;
    os << "eigenvalues outside [" << domain.lo << ", " << domain.hi << "]:";
    for (double x : bad) os << ' ' << x;
    throw SpectrumOutOfDomain(os.str());
  }
  return HermitianMatrix::from_spectrum(mapped, s.vectors);
}

double trace(const HermitianMatrix& a) { return a.matrix().trace().real(); }

double normalized_trace(const HermitianMatrix& a) {
  return a.dim() == 0 ? 0.0 : trace(a) / a.dim();
}

double schatten_norm(const HermitianMatrix& a, double p, bool normalized) {
  if (!(p >= 1.0)) throw InvalidExponent("p = " + std::to_string(p) + " < 1");
  const auto& s = a.spectrum();
  if (std::isinf(p)) return s.values.size() ? s.values.cwiseAbs().maxCoeff() : 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < s.values.size(); ++i) sum += std::pow(std::abs(s.values(i)), p);
  if (normalized && a.dim() > 0) sum /= a.dim();
  return std::pow(sum, 1.0 / p);
}

double operator_norm(const HermitianMatrix& a) {
  const auto& s = a.spectrum();
  return s.values.size() ? s.values.cwiseAbs().maxCoeff() : 0.0;
}

double frobenius_norm(const CMatrix& a) { return a.norm(); }

double hs_inner(const HermitianMatrix& a, const HermitianMatrix& b) {
  require_same_dim(a, b, "hs_inner");
  // Tr(AB) = sum_ij conj(A_ij) B_ij for Hermitian A.
  return a.matrix().cwiseProduct(b.matrix().conjugate()).sum().real();
}

double max_abs_entry(const CMatrix& a) { return sup_entry(a); }

HermitianMatrix positive_part(const HermitianMatrix& a) {
  const auto& s = a.spectrum();
  return HermitianMatrix::from_spectrum(s.values.cwiseMax(0.0), s.vectors);
}

HermitianMatrix negative_part(const HermitianMatrix& a) {
  const auto& s = a.spectrum();
  return HermitianMatrix::from_spectrum((-s.values).cwiseMax(0.0), s.vectors);
}

HermitianMatrix square(const HermitianMatrix& a) {
  return HermitianMatrix::symmetrized(a.matrix() * a.matrix());
}

HermitianMatrix jordan_product(const HermitianMatrix& a, const HermitianMatrix& b) {
  require_same_dim(a, b, "jordan_product");
  return HermitianMatrix::symmetrized(a.matrix() * b.matrix());
}

HermitianMatrix conjugate_by(const CMatrix& v, const HermitianMatrix& a) {
  return HermitianMatrix::symmetrized(v * a.matrix() * v.adjoint());
}

LoewnerResult loewner_leq(const HermitianMatrix& a, const HermitianMatrix& b, double tol) {
  require_same_dim(a, b, "loewner_leq");
  const HermitianMatrix diff = b - a;
  const auto& s = diff.spectrum();
  LoewnerResult r;
  if (s.values.size() == 0) return r;
  r.min_eigenvalue = s.values(0);
  r.holds = r.min_eigenvalue >= -tol;
  if (!r.holds) r.witness = s.vectors.col(0);
  return r;
}

}  // namespace matphi
