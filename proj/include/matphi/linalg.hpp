#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "matphi/errors.hpp"

namespace matphi {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Interval of admissible eigenvalues. Open ends exclude the endpoint itself.
struct SpectralInterval {
  double lo = -kInf;
  double hi = kInf;
  bool lo_open = false;
  bool hi_open = false;

  static SpectralInterval real_line() { return {}; }
  static SpectralInterval nonnegative() { return {0.0, kInf, false, false}; }
  static SpectralInterval positive() { return {0.0, kInf, true, false}; }
  static SpectralInterval unit() { return {0.0, 1.0, false, false}; }

  bool contains(double x) const;
};

struct Spectrum {
  RVector values;   // ascending
  CMatrix vectors;  // columns are eigenvectors
};

double tol_spec(int d);

class HermitianMatrix {
 public:
  HermitianMatrix() : HermitianMatrix(0) {}
  explicit HermitianMatrix(int d);
  // Validates hermiticity within tol_herm, then stores the symmetrized matrix.
  explicit HermitianMatrix(const CMatrix& m);

  // Stores (m + m†)/2 without validation; for results known to be Hermitian.
  static HermitianMatrix symmetrized(const CMatrix& m);
  static HermitianMatrix identity(int d);
  static HermitianMatrix diagonal(const std::vector<double>& values);
  static HermitianMatrix scalar(double value) { return diagonal({value}); }
  // U diag(values) U†
  static HermitianMatrix from_spectrum(const RVector& values, const CMatrix& vectors);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(int i, int j) const { return m_(i, j); }

  const Spectrum& spectrum() const;
  double min_eigenvalue() const;
  double max_eigenvalue() const;
  double tol_herm() const;

  HermitianMatrix operator-() const;
  HermitianMatrix& operator+=(const HermitianMatrix& other);
  HermitianMatrix& operator-=(const HermitianMatrix& other);
  HermitianMatrix& operator*=(double c);

 private:
  struct Cache {
    std::once_flag once;
    Spectrum spectrum;
  };
  struct Trusted {};
  HermitianMatrix(CMatrix m, Trusted);

  CMatrix m_;
  std::shared_ptr<Cache> cache_;
};

HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b);
HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b);
HermitianMatrix operator*(double c, HermitianMatrix a);
HermitianMatrix operator*(HermitianMatrix a, double c);

Spectrum spectral_decompose(const HermitianMatrix& a);

using RealFunction = std::function<double(double)>;

// U diag(f(λ)) U†; eigenvalues within tol_spec outside a closed end are clamped onto it.
HermitianMatrix apply_standard_function(const RealFunction& f, const HermitianMatrix& a,
                                        const SpectralInterval& domain = SpectralInterval{});

double trace(const HermitianMatrix& a);
double normalized_trace(const HermitianMatrix& a);
double schatten_norm(const HermitianMatrix& a, double p, bool normalized = false);
double operator_norm(const HermitianMatrix& a);
double frobenius_norm(const CMatrix& a);
// Re Tr(A B) for Hermitian A, B.
double hs_inner(const HermitianMatrix& a, const HermitianMatrix& b);
double max_abs_entry(const CMatrix& a);

HermitianMatrix positive_part(const HermitianMatrix& a);
HermitianMatrix negative_part(const HermitianMatrix& a);  // positive_part(-A)
HermitianMatrix square(const HermitianMatrix& a);
// (AB + BA)/2
HermitianMatrix jordan_product(const HermitianMatrix& a, const HermitianMatrix& b);
// V A V†
HermitianMatrix conjugate_by(const CMatrix& v, const HermitianMatrix& a);

struct LoewnerResult {
  bool holds = true;
  double min_eigenvalue = 0.0;  // of B - A
  CVector witness;              // eigenvector for min_eigenvalue when !holds
};

// A ⪯ B within tol.
LoewnerResult loewner_leq(const HermitianMatrix& a, const HermitianMatrix& b, double tol);

void require_same_dim(const HermitianMatrix& a, const HermitianMatrix& b, const char* where);

}  // namespace matphi
