#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "matphi/frechet.hpp"
#include "matphi/phi_entropy.hpp"
#include "matphi/report.hpp"

namespace matphi {

// Independent matrix-valued inputs with outcomes in [0, I] and an evaluator L.
struct MatrixInputModel {
  using Evaluator = std::function<HermitianMatrix(std::span<const HermitianMatrix>)>;
  using Partial =
      std::function<HermitianMatrix(std::span<const HermitianMatrix>, int, const HermitianMatrix&)>;

  std::vector<std::vector<double>> probs;
  std::vector<std::vector<HermitianMatrix>> outcomes;
  Evaluator evaluator;
  Partial partial;  // D_{X_i}L[X](E); optional

  int n() const { return static_cast<int>(outcomes.size()); }
  int input_dim() const { return outcomes.front().front().dim(); }
  // Throws DomainError when an outcome leaves [0, I].
  void validate() const;
  std::vector<HermitianMatrix> tuple(const ProductModel& labels, std::size_t flat) const;
  ProductModel to_product_model() const;
  // Same inputs; evaluator returns the first input (used to build label models).
  ProductModel labels() const;
};

struct EfronSteinForms {
  double pairs = 0.0;        // ½ Σ tr E(Z − Z_i')²
  double conditional = 0.0;  // Σ tr E(Z − E_i Z)²
  double positive = 0.0;     // Σ tr E(Z − Z_i')_+²
  double discrepancy() const;
};

EfronSteinForms efron_stein_forms(const ProductModel& model);
double efron_stein_quantity(const ProductModel& model);
double efron_stein_quantity(const MatrixInputModel& model);

// tr[E Z² − (E Z)²]
double variance(const DiscreteRandomMatrix& z);

CheckReport check_efron_stein(const ProductModel& model, double rel = kEntropyRelTol);

// Identities relating |X − EX|^q, positive and negative parts, and an independent copy Y.
CheckReport check_plus_identities(const DiscreteRandomMatrix& x, int q);

enum class DerivativeMode { analytic, finite_difference };

struct PoincareOptions {
  DerivativeMode mode = DerivativeMode::analytic;
  bool spot_check_convexity = false;
  int probes_per_coordinate = 50;
  int random_directions = 200;
  std::uint64_t seed = 0;
  double rel = kEntropyRelTol;
};

// Var L(X) ≤ Σ_i E‖D_{X_i}L[X]‖² for separately convex L on [0, I]-valued inputs.
CheckReport check_poincare(const MatrixInputModel& model, const PoincareOptions& options = {});

// Commuting inputs and a multivariate scalar f: Var f(X) ≤ Σ_i E‖[φ_i(λ̄_k, λ̄_l)]‖_sup².
CheckReport check_poincare_commuting(const MatrixInputModel& model, const MultivariateFunction& f,
                                     double rel = kEntropyRelTol);

struct LipschitzReport {
  double variance = 0.0;
  double lipschitz_const = 0.0;  // grid estimate, a lower bound
  double ratio = 0.0;
  int grid_density = 0;
  bool lower_bound = true;
};

LipschitzReport lipschitz_report(const MatrixInputModel& model, const MultivariateFunction& f,
                                 int grid_density = 16);

HermitianMatrix sample_gue(int d, Rng& rng);
// (1/√m) Σ_j ε_j Y_j with Y_j = ((W + iW') + (W + iW')†)/2 for Rademacher W, W'.
HermitianMatrix gue_clt_sample(int d, int m, Rng& rng);

// Matrix function of n Gaussian inputs: GUE matrices of size d_in, or scalars when d_in = 1.
struct GaussianFunction {
  int n = 1;
  int d_in = 1;
  int d_out = 1;
  std::function<HermitianMatrix(std::span<const HermitianMatrix>)> value;
  // ‖D_{X_i}L[X]‖² (induced Hilbert-Schmidt norm); central differences when empty.
  std::function<double(std::span<const HermitianMatrix>, int)> derivative_norm2;

  double derivative_norm2_at(std::span<const HermitianMatrix> x, int i) const;
};

inline constexpr int kMonteCarloStreams = 64;

CheckReport check_gaussian_poincare(const GaussianFunction& f, std::int64_t samples, std::uint64_t seed,
                                    int jobs = 1);
CheckReport check_gaussian_sobolev(const GaussianFunction& f, double p, std::int64_t samples,
                                   std::uint64_t seed, int jobs = 1);
CheckReport check_gaussian_logsobolev(const GaussianFunction& f, std::int64_t samples,
                                      std::uint64_t seed, int jobs = 1);

// Σ Φ(λ) with Φ(x) = x log x and 0 log 0 = 0, eigenvalues below 1e-14 treated as zero.
double trace_xlogx(const HermitianMatrix& a);

}  // namespace matphi
