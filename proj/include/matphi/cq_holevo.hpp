#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "matphi/phi_entropy.hpp"
#include "matphi/report.hpp"

namespace matphi {

// {(μ(x), ρ_x)} with density-matrix states.
struct CQEnsemble {
  std::vector<double> mu;
  std::vector<HermitianMatrix> states;

  int dim() const { return states.empty() ? 0 : states.front().dim(); }
  std::size_t size() const { return states.size(); }
  // Σμ = 1 within 1e-12; states PSD with unit trace within tol_spec. With `require_positive`, μ > 0.
  void validate(bool require_positive = false) const;
  HermitianMatrix average() const;
  DiscreteRandomMatrix as_random_matrix() const { return {mu, states}; }
};

// Row-stochastic K(y|x); rows indexed by x.
struct MarkovKernel {
  std::vector<std::vector<double>> rows;

  std::size_t inputs() const { return rows.size(); }
  std::size_t outputs() const { return rows.empty() ? 0 : rows.front().size(); }
  void validate() const;
  double operator()(std::size_t x, std::size_t y) const { return rows[x][y]; }
  static MarkovKernel identity(std::size_t k);
  static MarkovKernel constant(std::size_t inputs, const std::vector<double>& q);
  static MarkovKernel binary_symmetric(double delta);
};

std::vector<double> kernel_push(std::span<const double> mu, const MarkovKernel& k);
// K*(x|y) = K(y|x)μ(x)/(μK)(y), returned with rows indexed by y.
MarkovKernel backward_channel(std::span<const double> mu, const MarkovKernel& k);
// (K*f)(y) = Σ_x K*(x|y) f(x)
std::vector<HermitianMatrix> backward_apply(const MarkovKernel& backward, std::span<const HermitianMatrix> f);
CQEnsemble evolve_ensemble(const CQEnsemble& ens, const MarkovKernel& k);

inline constexpr double kSupportCutoff = 1e-13;
inline constexpr double kChiFloor = 1e-10;

// Σ μ(x) Tr ρ_x(log ρ_x − log ρ̄), restricted to the support of ρ̄; exactly 0 when all states agree
// within tol_spec.
double holevo_chi(const CQEnsemble& ens);

// H_Φ of the table f under the law μ; exactly 0 when all values agree within tol_spec.
double functional_entropy(const PhiFunction& phi, std::span<const double> mu, std::span<const HermitianMatrix> f);

// H(K*f; μK)/H(f; μ) for Φ = x log x. Empty when H(f; μ) ≤ kChiFloor. For unit-trace states this is
// χ(evolved)/χ(original). Throws std::logic_error if the ratio exceeds 1 + 1e-9.
std::optional<double> eta_ratio(std::span<const double> mu, const MarkovKernel& k,
                                std::span<const HermitianMatrix> f);

// D(νK‖μK)/D(ν‖μ)
double classical_sdpi_ratio(std::span<const double> nu, std::span<const double> mu, const MarkovKernel& k);

struct EtaOptions {
  int d = 2;  // state dimension; d = 1 searches positive scalar functions
  bool grid = true;
  double grid_step = 0.05;
  int restarts = 50;
  int steps = 200;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct EtaResult {
  double eta_hat = 0.0;
  std::vector<HermitianMatrix> witness;  // states (d ≥ 2) or the function values (d = 1)
  std::string method;
  std::int64_t evaluations = 0;
  bool lower_bound = true;
};

EtaResult eta_phi(std::span<const double> mu, const MarkovKernel& k, const EtaOptions& options = {});

CheckReport check_data_processing(const CQEnsemble& ens, const MarkovKernel& k,
                                  const PhiFunction& phi = PhiFunction::xlogx(),
                                  double rel = kEntropyRelTol);

struct JointAtom {
  double p = 0.0;
  HermitianMatrix z;
  int y = 0;
};

// H_Φ(Z) = 𝔼_Y H_Φ(Z|Y) + H_Φ(𝔼[Z|Y])
CheckReport check_law_total_variance(const PhiFunction& phi, const std::vector<JointAtom>& atoms,
                                     double tol = 1e-10);

// H_Φ(f(X)) ≤ 𝔼 H_Φ(f(X)|Y)/(1−c) together with H_Φ(K*f) ≤ c·H_Φ(f).
CheckReport check_functional_sdpi(std::span<const double> mu, const MarkovKernel& k,
                                  std::span<const HermitianMatrix> f, double c,
                                  const PhiFunction& phi = PhiFunction::xlogx(),
                                  double rel = kEntropyRelTol);

Json ensemble_to_json(const CQEnsemble& ens);
CQEnsemble ensemble_from_json(const Json& j);
Json kernel_to_json(const MarkovKernel& k);
MarkovKernel kernel_from_json(const Json& j);

}  // namespace matphi
