#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "matphi/linalg.hpp"

namespace matphi {

// Scalar function with derivatives up to `max_order` on `domain`.
struct ScalarFunction {
  std::function<double(int order, double x)> eval;
  SpectralInterval domain;
  int max_order = 4;

  double operator()(double x) const { return eval(0, x); }
  double derivative(int k, double x) const;
  RealFunction value_fn() const {
    return [f = eval](double x) { return f(0, x); };
  }

  static ScalarFunction identity();
  // c0 + c1 x + c2 x^2 + ...
  static ScalarFunction polynomial(std::vector<double> coeffs);
  // x^p on [0, inf) (open at 0 when some used derivative blows up there).
  static ScalarFunction power(double p);
  static ScalarFunction xlogx();
  // log x + shift on (0, inf)
  static ScalarFunction log(double shift = 0.0);
  static ScalarFunction exp(double rate = 1.0);
};

double divided_difference(const ScalarFunction& f, std::span<const double> nodes, int order);

// [f^[1](λi, λj)]
RMatrix first_divided_difference_table(const ScalarFunction& f, const RVector& nodes);

// Df[A](E) by the Daleckii-Krein formula.
HermitianMatrix frechet_derivative(const ScalarFunction& f, const HermitianMatrix& a,
                                   const HermitianMatrix& e);
// D²f[A](E1, E2)
HermitianMatrix frechet_second(const ScalarFunction& f, const HermitianMatrix& a,
                               const HermitianMatrix& e1, const HermitianMatrix& e2);

// Linear map on d×d matrices, represented on column-stacked vectors.
struct Superoperator {
  int dim = 0;
  CMatrix matrix;

  HermitianMatrix apply(const HermitianMatrix& e) const;
  bool is_self_adjoint(double tol) const;
  static Superoperator identity(int d);
};

CVector vectorize(const CMatrix& m);
CMatrix unvectorize(const CVector& v, int d);

Superoperator superoperator_of_derivative(const ScalarFunction& f, const HermitianMatrix& a);
Superoperator invert_superoperator(const Superoperator& t, double cond_max = 1e12);
double frechet_norm(const ScalarFunction& f, const HermitianMatrix& a);
// Largest singular value.
double superoperator_norm(const Superoperator& t);

// Induced Hilbert-Schmidt norm of a real-linear map between Hermitian spaces, materialized on the
// orthonormal Hermitian basis.
double induced_norm(const std::function<HermitianMatrix(const HermitianMatrix&)>& map, int d_in);
// Orthonormal basis of the d² real-dimensional Hermitian space.
std::vector<HermitianMatrix> hermitian_basis(int d);

struct MultivariateFunction {
  int n = 1;
  std::function<double(std::span<const double>)> value;
  // Optional; central differences are used when empty.
  std::function<double(std::span<const double>, int)> partial;

  double operator()(std::span<const double> x) const { return value(x); }
  double partial_at(std::span<const double> x, int i) const;
};

// Symmetrized partial divided difference in coordinate i:
// ½[(f(x) − f(x with xi←yi)) + (f(y with yi←xi) − f(y))]/(xi − yi), and the average of the two
// partial derivatives when xi = yi.
double multivariate_divided_difference(const MultivariateFunction& f, std::span<const double> x,
                                       std::span<const double> y, int i);

struct JointSpectrum {
  CMatrix basis;             // common eigenvectors (columns)
  std::vector<RVector> eig;  // eig[i](k) = eigenvalue of X_i on basis column k
};

JointSpectrum joint_diagonalize(std::span<const HermitianMatrix> xs);

// f applied to a commuting tuple.
HermitianMatrix apply_multivariate(const MultivariateFunction& f, std::span<const HermitianMatrix> xs);

HermitianMatrix multivariate_partial_frechet(const MultivariateFunction& f,
                                             std::span<const HermitianMatrix> xs, int i,
                                             const HermitianMatrix& e);

// Table [φ_i(λ̄_k, λ̄_l)] in the common eigenbasis.
RMatrix multivariate_divided_difference_table(const MultivariateFunction& f, const JointSpectrum& js,
                                              int i);

struct InverseDerivatives {
  HermitianMatrix first;
  HermitianMatrix second;
};

// Derivatives of A ↦ G(A)⁻¹ given G(A), DG and D²G along a direction.
InverseDerivatives inverse_map_derivatives(const HermitianMatrix& g, const HermitianMatrix& dg,
                                           const HermitianMatrix& d2g, double cond_max = 1e12);

}  // namespace matphi
