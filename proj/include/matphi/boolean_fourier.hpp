#pragma once

#include <cstdint>
#include <vector>

#include "matphi/phi_entropy.hpp"
#include "matphi/report.hpp"

namespace matphi {

inline constexpr int kMaxCubeDim = 12;

// Total map {0,1}ⁿ → M_d. Bit i of the table index is x_{i+1}.
struct MatrixBooleanFunction {
  int n = 0;
  int d = 1;
  std::vector<HermitianMatrix> table;

  std::size_t size() const { return table.size(); }
  // Throws DimensionMismatch on malformed tables and DomainError when `require_psd` fails.
  void validate(bool require_psd) const;
  static MatrixBooleanFunction constant(int n, const HermitianMatrix& c);
};

// f̂(S) indexed by the bitmask of S.
struct FourierTable {
  int n = 0;
  int d = 1;
  std::vector<HermitianMatrix> coeffs;
};

FourierTable fourier_transform(const MatrixBooleanFunction& f);
MatrixBooleanFunction inverse_fourier(const FourierTable& t);
// Coefficient S scaled by γ^|S|.
FourierTable noise_operator(const FourierTable& t, double gamma);

CheckReport parseval_check(const MatrixBooleanFunction& f);

struct DirichletForms {
  double spectral = 0.0;       // Σ_S |S| tr f̂(S)²
  double flip = 0.0;           // Σ_i 𝔼 tr g_i², g_i(x) = (f(x) − f(x ⊕ e_i))/2
  double efron_stein = 0.0;    // on the uniform product model
  double discrepancy() const;
};

DirichletForms dirichlet_forms(const MatrixBooleanFunction& f);
// Spectral form; throws std::logic_error when the forms disagree beyond 1e-10.
double dirichlet_energy(const MatrixBooleanFunction& f);

// Uniform inputs on the cube with f as the tabulated evaluator.
ProductModel uniform_cube_model(const MatrixBooleanFunction& f);

CheckReport check_bonami_beckner(const MatrixBooleanFunction& f, double p, double rel = kConvexityRelTol);
CheckReport check_phi_sobolev(const MatrixBooleanFunction& f, double p, double rel = kConvexityRelTol);
CheckReport check_log_sobolev(const MatrixBooleanFunction& f, double rel = kConvexityRelTol);

// tr𝔼[f² log f²] − tr[𝔼f² log 𝔼f²]
double entropy_of_square(const MatrixBooleanFunction& f);
// Sobolev slack rhs − lhs at exponent p, and the log-Sobolev slack.
double sobolev_slack(const MatrixBooleanFunction& f, double p);
double log_sobolev_slack(const MatrixBooleanFunction& f);

// 𝔼Z² − (𝔼Z^p)^{2/p}
HermitianMatrix p_variance(const DiscreteRandomMatrix& z, double p);
// ½𝔼[Z² log Z²] − ½𝔼[Z²] log 𝔼[Z²]
HermitianMatrix p_variance_limit(const DiscreteRandomMatrix& z);
CheckReport check_p_variance_limit(const DiscreteRandomMatrix& z, double tol = 1e-4);

struct LsiSearchOptions {
  int d = 2;
  int n = 1;
  int restarts = 20;
  int steps = 20000;
  double initial_step = 0.1;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct LsiSearchResult {
  bool found = false;
  bool verified = false;
  MatrixBooleanFunction f;  // scaled so that tr𝔼f² = 1
  double ent = 0.0;
  double energy = 0.0;
  double objective = 0.0;  // ent − 2·energy
  int best_restart = -1;
};

inline constexpr double kLsiFoundThreshold = 1e-6;

LsiSearchResult search_lsi_counterexample(const LsiSearchOptions& options);

Json function_to_json(const MatrixBooleanFunction& f);
MatrixBooleanFunction function_from_json(const Json& j);

}  // namespace matphi
