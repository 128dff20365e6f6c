#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "matphi/phi.hpp"
#include "matphi/report.hpp"

namespace matphi {

inline constexpr std::size_t kMaxEnumeration = 1'000'000;
inline constexpr double kEntropyRelTol = 1e-9;
inline constexpr double kConvexityRelTol = 1e-8;

// Finite-support law {(p_k, Z_k)}.
struct DiscreteRandomMatrix {
  std::vector<double> probs;
  std::vector<HermitianMatrix> values;

  int dim() const { return values.empty() ? 0 : values.front().dim(); }
  std::size_t size() const { return values.size(); }
  HermitianMatrix mean() const;
  // Throws DimensionMismatch / DomainError on malformed laws.
  void validate(bool require_psd) const;
  static DiscreteRandomMatrix constant(const HermitianMatrix& z) { return {{1.0}, {z}}; }
};

// Independent finite inputs X_1..X_n with outcome labels 0..k_i-1 and a tabulated evaluator.
// Flat index = Σ o_i·stride_i with stride_0 = 1.
class ProductModel {
 public:
  using Evaluator = std::function<HermitianMatrix(std::span<const int>)>;

  ProductModel(std::vector<std::vector<double>> laws, std::vector<HermitianMatrix> table);
  static ProductModel from_evaluator(std::vector<std::vector<double>> laws, const Evaluator& eval);
  static std::size_t enumeration_size(const std::vector<std::vector<double>>& laws);

  int n() const { return static_cast<int>(laws_.size()); }
  int dim() const { return table_.front().dim(); }
  std::size_t size() const { return table_.size(); }
  const std::vector<double>& law(int i) const { return laws_.at(static_cast<std::size_t>(i)); }
  const std::vector<std::vector<double>>& laws() const { return laws_; }
  const HermitianMatrix& value(std::size_t flat) const { return table_[flat]; }
  const std::vector<HermitianMatrix>& table() const { return table_; }
  double prob(std::size_t flat) const { return probs_[flat]; }
  std::size_t stride(int i) const { return strides_[static_cast<std::size_t>(i)]; }
  int outcome(std::size_t flat, int i) const;
  std::size_t with_outcome(std::size_t flat, int i, int o) const;
  DiscreteRandomMatrix distribution() const;

 private:
  std::vector<std::vector<double>> laws_;
  std::vector<HermitianMatrix> table_;
  std::vector<std::size_t> strides_;
  std::vector<double> probs_;
};

// Σ_i Φ(λ_i(Z)) with the Φ domain check.
double trace_phi(const PhiFunction& phi, const HermitianMatrix& z);

double phi_entropy(const PhiFunction& phi, const DiscreteRandomMatrix& z);
double phi_entropy(const PhiFunction& phi, std::span<const double> probs,
                   std::span<const HermitianMatrix> values);

struct ConditionalEntropyTable {
  std::vector<double> probs;   // law of X_{-i}
  std::vector<double> values;  // H computed over the i-th law
  double expectation() const;
};

ConditionalEntropyTable conditional_phi_entropy(const PhiFunction& phi, const ProductModel& model, int i);

CheckReport check_subadditivity(const PhiFunction& phi, const ProductModel& model,
                                double rel = kEntropyRelTol);

struct BregmanValues {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

BregmanValues bregman_maps(const PhiFunction& phi, const HermitianMatrix& u, const HermitianMatrix& v);
double bregman_a(const PhiFunction& phi, const HermitianMatrix& u, const HermitianMatrix& v);
double bregman_b(const PhiFunction& phi, const HermitianMatrix& u, const HermitianMatrix& v);
double bregman_c(const PhiFunction& phi, const HermitianMatrix& u, const HermitianMatrix& v);
// Tr[tΦ(u) + (1−t)Φ(v) − Φ(tu + (1−t)v)]
double jensen_gap(const PhiFunction& phi, double t, const HermitianMatrix& u, const HermitianMatrix& v);

using MatrixPairMap = std::function<double(const HermitianMatrix&, const HermitianMatrix&)>;
using PairSampler = std::function<std::pair<HermitianMatrix, HermitianMatrix>(Rng&)>;

// One chord test of joint convexity: t·m(u1,v1) + (1−t)·m(u2,v2) ≥ m(t-mixture).
TrialOutcome joint_convexity_trial(const MatrixPairMap& map, const PairSampler& sampler, Rng& rng,
                                   double t, double rel = kConvexityRelTol);

// Falsifier: trials alternate between t = ½ and uniform t.
CheckReport check_joint_convexity(const std::string& name, const MatrixPairMap& map,
                                  const PairSampler& sampler, std::int64_t trials,
                                  std::uint64_t seed, int jobs = 1, double rel = kConvexityRelTol);

// (DΨ[X])⁻¹ as a d²×d² matrix.
Superoperator inverse_derivative_superoperator(const PhiFunction& phi, const HermitianMatrix& x);

// Midpoint concavity of X ↦ (DΨ[X])⁻¹ for one pair.
TrialOutcome char_a_trial(const PhiFunction& phi, const HermitianMatrix& a, const HermitianMatrix& b,
                          double rel = kConvexityRelTol);
CheckReport check_char_a(const PhiFunction& phi, std::int64_t trials, int d, std::uint64_t seed,
                         int jobs = 1);

struct CharEValues {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
};

CharEValues check_char_e(const PhiFunction& phi, const HermitianMatrix& a, const HermitianMatrix& h,
                         const HermitianMatrix& k, double rel = kConvexityRelTol);
CheckReport check_char_e_sweep(const PhiFunction& phi, std::int64_t trials, int d, std::uint64_t seed,
                               int jobs = 1);

// tr E[(Φ'(T) − Φ'(ET))(Z − T)] + H_Φ(T) for Z, T on the same support indexing.
double duality_lower_bound(const PhiFunction& phi, const DiscreteRandomMatrix& z,
                           const DiscreteRandomMatrix& t);

// E_1 H_Φ(Z | X_1) ≥ H_Φ(E_1 Z) on a two-input model.
CheckReport check_char_g(const PhiFunction& phi, const ProductModel& model,
                         double rel = kEntropyRelTol);

// H_Φ(tZ1 + (1−t)Z2) ≤ t·H_Φ(Z1) + (1−t)·H_Φ(Z2) on a shared support.
CheckReport check_char_h(const PhiFunction& phi, const DiscreteRandomMatrix& z1,
                         const DiscreteRandomMatrix& z2, double t, double rel = kEntropyRelTol);

}  // namespace matphi
