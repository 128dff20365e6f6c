#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "matphi/boolean_fourier.hpp"
#include "matphi/concentration.hpp"
#include "matphi/cq_holevo.hpp"
#include "matphi/phi_entropy.hpp"
#include "matphi/report.hpp"

namespace matphi {

inline constexpr const char* kArtifactVersion = "matphi-1.0";

struct SweepParams {
  std::int64_t trials = 100;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::optional<double> rel;  // overrides each check's default relative tolerance

  double rel_or(double fallback) const { return rel.value_or(fallback); }
};

// ---- random instances -------------------------------------------------------------------------

DiscreteRandomMatrix random_law(int d, int support, Rng& rng);
ProductModel random_product_model(int d, int n, int outcomes, Rng& rng);
MatrixBooleanFunction random_boolean_function(int d, int n, Rng& rng);
CQEnsemble random_ensemble(int d, int size, Rng& rng);
MarkovKernel random_kernel(int inputs, int outputs, Rng& rng);

// Folds a one-instance report into a trial outcome.
TrialOutcome outcome_of(const CheckReport& r);

// ---- characterizations ------------------------------------------------------------------------

CheckReport sweep_char_a(const PhiFunction& phi, int d, const SweepParams& p);
CheckReport sweep_char_b(const PhiFunction& phi, int d, const SweepParams& p);
CheckReport sweep_char_c(const PhiFunction& phi, int d, const SweepParams& p);
CheckReport sweep_char_d(const PhiFunction& phi, int d, const SweepParams& p);
CheckReport sweep_char_e(const PhiFunction& phi, int d, const SweepParams& p);
CheckReport sweep_char_f(const PhiFunction& phi, int d, const SweepParams& p);
CheckReport sweep_char_g(const PhiFunction& phi, int d, const SweepParams& p);
CheckReport sweep_char_h(const PhiFunction& phi, int d, const SweepParams& p);
CheckReport sweep_char_i(const PhiFunction& phi, int d, const SweepParams& p);
CheckReport sweep_char_j(const PhiFunction& phi, int d, const SweepParams& p);

// ---- concentration ----------------------------------------------------------------------------

CheckReport sweep_efron_stein(int d, int n, const SweepParams& p);
CheckReport sweep_efron_stein_forms(int d, int n, const SweepParams& p);
CheckReport sweep_plus_identities(int d, int q, const SweepParams& p);
CheckReport sweep_poincare(int d, int n, DerivativeMode mode, const SweepParams& p);
CheckReport sweep_poincare_commuting(int d, int n, const SweepParams& p);
CheckReport sweep_lipschitz(int d, const SweepParams& p);  // report only; never fails

// Documented Gaussian test functions, one report each.
std::vector<CheckReport> gaussian_checks(std::int64_t samples, std::uint64_t seed, int jobs);

// ---- Boolean cube -----------------------------------------------------------------------------

CheckReport sweep_fourier_roundtrip(int d, int n, const SweepParams& p);
CheckReport sweep_noise_semigroup(int d, int n, const SweepParams& p);
CheckReport sweep_parseval(int d, int n, const SweepParams& p);
CheckReport sweep_dirichlet(int d, int n, const SweepParams& p);
CheckReport sweep_bonami_beckner(int d, int n, double exponent, const SweepParams& p);
CheckReport sweep_phi_sobolev(int d, int n, double exponent, const SweepParams& p);
CheckReport sweep_log_sobolev(int d, int n, const SweepParams& p);
CheckReport sweep_sobolev_limit(int d, int n, const SweepParams& p);
CheckReport sweep_p_variance(int d, const SweepParams& p);

// ---- classical-quantum ------------------------------------------------------------------------

CheckReport sweep_holevo_dual_path(int d, const SweepParams& p);
CheckReport sweep_average_state(int d, const SweepParams& p);
CheckReport sweep_data_processing(const PhiFunction& phi, int d, const SweepParams& p);
CheckReport sweep_law_total_variance(const PhiFunction& phi, int d, const SweepParams& p);
CheckReport sweep_eta_bounds(int d, const SweepParams& p);
CheckReport sweep_functional_sdpi(int d, const SweepParams& p);

// ---- orchestration ----------------------------------------------------------------------------

struct RunConfig {
  std::uint64_t seed = 0;
  std::int64_t trials = 100;
  std::int64_t samples = 100000;
  std::optional<double> tol;
  std::optional<int> d;
  std::optional<int> n;
  std::vector<std::string> phis;  // empty: the in-class defaults
  int jobs = 1;

  // Throws ConfigError on invalid values.
  void validate() const;
  Json to_json() const;
};

struct TimedReport {
  CheckReport report;
  double seconds = 0.0;
};

struct SuiteReport {
  std::string version = kArtifactVersion;
  std::string suite;
  Json config;
  std::vector<TimedReport> reports;  // sorted by (check, phi, d, n)
  std::vector<std::string> skipped;
  bool pass = true;
};

const std::vector<std::string>& suite_names();
std::vector<std::string> default_phis();

SuiteReport run_suite(const RunConfig& config, const std::string& suite);

// Timing lives under "timing" so that determinism comparisons can drop one key.
Json suite_to_json(const SuiteReport& r, bool with_timing = true);
std::string suite_to_csv(const SuiteReport& r);

// ---- instance generation ----------------------------------------------------------------------

struct GenerateParams {
  int d = 2;
  int n = 2;
  int size = 2;     // support / alphabet size
  int outputs = 2;  // kernel output alphabet
};

const std::vector<std::string>& instance_kinds();
Json generate_instance(const std::string& kind, const GenerateParams& params, std::uint64_t seed);

Json law_to_json(const DiscreteRandomMatrix& z);
DiscreteRandomMatrix law_from_json(const Json& j);
Json product_model_to_json(const ProductModel& m);
ProductModel product_model_from_json(const Json& j);

}  // namespace matphi
