#pragma once

#include <string>
#include <string_view>

#include "matphi/frechet.hpp"

namespace matphi {

// Convex Φ with derivatives up to order 5. `cubic` (x³) is a negative control outside the
// entropy class.
class PhiFunction {
 public:
  enum class Kind { affine, power, xlogx, cubic };

  static PhiFunction affine(double alpha, double beta);
  static PhiFunction power(double p);
  static PhiFunction xlogx();
  static PhiFunction cubic();
  // "power:1.5", "xlogx", "affine:a,b", "x2", "x3"
  static PhiFunction parse(std::string_view descriptor);

  Kind kind() const { return kind_; }
  double exponent() const { return p_; }
  std::string descriptor() const;

  double operator()(double x) const { return derivative(0, x); }
  double derivative(int k, double x) const;

  bool is_affine() const;
  bool in_entropy_class() const { return kind_ != Kind::cubic; }
  SpectralInterval domain() const;

  // Φ and Ψ = Φ' as scalar functions for the Fréchet calculus.
  ScalarFunction phi() const;
  ScalarFunction psi() const;

 private:
  PhiFunction(Kind k, double p, double a, double b) : kind_(k), p_(p), alpha_(a), beta_(b) {}
  Kind kind_;
  double p_ = 1.0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
};

}  // namespace matphi
