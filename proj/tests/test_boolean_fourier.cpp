#include <gtest/gtest.h>

#include <bit>
#include <cmath>

#include "matphi/boolean_fourier.hpp"
#include "matphi/errors.hpp"
#include "matphi/suites.hpp"
#include "oracle.hpp"

using namespace matphi;

namespace {

int chi(std::size_t s, std::size_t x) { return (std::popcount(s & x) % 2) ? -1 : 1; }

// Direct O(4ⁿ) transform.
std::vector<CMatrix> brute_fourier(const MatrixBooleanFunction& f) {
  std::vector<CMatrix> out;
  for (std::size_t s = 0; s < f.size(); ++s) {
    CMatrix acc = CMatrix::Zero(f.d, f.d);
    for (std::size_t x = 0; x < f.size(); ++x) acc += static_cast<double>(chi(s, x)) * f.table[x].matrix();
    out.push_back(acc / static_cast<double>(f.size()));
  }
  return out;
}

MatrixBooleanFunction psd_function(int d, int n, Rng& rng) {
  MatrixBooleanFunction f;
  f.n = n;
  f.d = d;
  for (std::size_t x = 0; x < (std::size_t{1} << n); ++x) f.table.push_back(random_psd(d, rng));
  return f;
}

MatrixBooleanFunction hermitian_function(int d, int n, Rng& rng) {
  MatrixBooleanFunction f;
  f.n = n;
  f.d = d;
  for (std::size_t x = 0; x < (std::size_t{1} << n); ++x) f.table.push_back(random_hermitian(d, rng));
  return f;
}

MatrixBooleanFunction dictator(int n, int d) {
  MatrixBooleanFunction f;
  f.n = n;
  f.d = d;
  for (std::size_t x = 0; x < (std::size_t{1} << n); ++x)
    f.table.push_back(((x & 1) ? -1.0 : 1.0) * HermitianMatrix::identity(d));
  return f;
}

// Ent(f²) and E(f) straight from the table with the Schur-Parlett logarithm.
std::pair<double, double> oracle_lsi_sides(const MatrixBooleanFunction& f) {
  const int d = f.d;
  const double size = static_cast<double>(f.size());
  CMatrix mean_sq = CMatrix::Zero(d, d);
  double first = 0.0;
  for (const auto& m : f.table) {
    const CMatrix sq = m.matrix() * m.matrix();
    mean_sq += sq / size;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(sq);
    for (int k = 0; k < d; ++k) first += oracle::xlogx_scalar(es.eigenvalues()(k)) / (size * d);
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(mean_sq);
  double second = 0.0;
  for (int k = 0; k < d; ++k) second += oracle::xlogx_scalar(es.eigenvalues()(k)) / d;
  double energy = 0.0;
  const auto coeffs = brute_fourier(f);
  for (std::size_t s = 0; s < coeffs.size(); ++s)
    energy += std::popcount(s) * oracle::ntr(coeffs[s] * coeffs[s]);
  return {first - second, energy};
}

}  // namespace

TEST(Fourier, Examples) {
  Rng rng = make_rng(1, "ft");
  const HermitianMatrix c = random_hermitian(2, rng);
  const FourierTable ct = fourier_transform(MatrixBooleanFunction::constant(3, c));
  EXPECT_LT(oracle::max_dev(ct.coeffs[0].matrix(), c.matrix()), 1e-15);
  for (std::size_t s = 1; s < 8; ++s) EXPECT_LT(max_abs_entry(ct.coeffs[s].matrix()), 1e-15);

  const FourierTable dt = fourier_transform(dictator(3, 2));
  for (std::size_t s = 0; s < 8; ++s)
    EXPECT_LT(oracle::max_dev(dt.coeffs[s].matrix(), (s == 1 ? 1.0 : 0.0) * CMatrix::Identity(2, 2)), 1e-15);

  const FourierTable one{0, 2, {c}};
  const MatrixBooleanFunction back = inverse_fourier(one);
  ASSERT_EQ(back.size(), 1U);
  EXPECT_LT(oracle::max_dev(back.table[0].matrix(), c.matrix()), 1e-15);

  const FourierTable single{1, 2, {HermitianMatrix(2), HermitianMatrix::identity(2)}};
  const MatrixBooleanFunction s1 = inverse_fourier(single);
  EXPECT_LT(oracle::max_dev(s1.table[0].matrix(), CMatrix::Identity(2, 2)), 1e-15);
  EXPECT_LT(oracle::max_dev(s1.table[1].matrix(), -CMatrix::Identity(2, 2)), 1e-15);
}

TEST(Fourier, MatchesDirectTransform) {
  for (int t = 0; t < 20; ++t) {
    Rng rng = make_rng(2, "ft-direct", t);
    const MatrixBooleanFunction f = hermitian_function(1 + t % 3, t % 6, rng);
    const FourierTable ft = fourier_transform(f);
    const auto want = brute_fourier(f);
    for (std::size_t s = 0; s < f.size(); ++s) EXPECT_LT(oracle::max_dev(ft.coeffs[s].matrix(), want[s]), 1e-13);
  }
}

TEST(Fourier, RoundTripUpToTwelveBits) {
  for (int n = 0; n <= 12; n += 3) {
    for (int d : {1, 3, 6}) {
      Rng rng = make_rng(3, "ft-rt", static_cast<std::uint64_t>(n * 10 + d));
      const MatrixBooleanFunction f = hermitian_function(d, n, rng);
      const MatrixBooleanFunction g = inverse_fourier(fourier_transform(f));
      double dev = 0.0;
      for (std::size_t x = 0; x < f.size(); ++x)
        dev = std::max(dev, oracle::max_dev(f.table[x].matrix(), g.table[x].matrix()));
      EXPECT_LT(dev, 1e-12) << "n=" << n << " d=" << d;
    }
  }
}

TEST(NoiseOperator, Examples) {
  Rng rng = make_rng(4, "noise");
  const MatrixBooleanFunction f = hermitian_function(2, 4, rng);
  const FourierTable t = fourier_transform(f);
  const FourierTable id = noise_operator(t, 1.0);
  for (std::size_t s = 0; s < t.coeffs.size(); ++s)
    EXPECT_LT(oracle::max_dev(id.coeffs[s].matrix(), t.coeffs[s].matrix()), 1e-15);

  const MatrixBooleanFunction avg = inverse_fourier(noise_operator(t, 0.0));
  CMatrix mean = CMatrix::Zero(2, 2);
  for (const auto& m : f.table) mean += m.matrix() / static_cast<double>(f.size());
  for (const auto& m : avg.table) EXPECT_LT(oracle::max_dev(m.matrix(), mean), 1e-14);

  for (int k = 0; k < 20; ++k) {
    const double g = rng.uniform(-1, 1);
    const double h = rng.uniform(-1, 1);
    const FourierTable a = noise_operator(noise_operator(t, g), h);
    const FourierTable b = noise_operator(t, g * h);
    for (std::size_t s = 0; s < t.coeffs.size(); ++s)
      EXPECT_LT(oracle::max_dev(a.coeffs[s].matrix(), b.coeffs[s].matrix()), 1e-12);
  }
}

TEST(Parseval, Examples) {
  Rng rng = make_rng(5, "parseval");
  EXPECT_TRUE(parseval_check(MatrixBooleanFunction::constant(2, random_hermitian(3, rng))).pass);
  EXPECT_TRUE(parseval_check(dictator(2, 3)).pass);
  for (int t = 0; t < 20; ++t) {
    Rng g = make_rng(5, "parseval-rand", t);
    const CheckReport r = parseval_check(hermitian_function(3, 6, g));
    EXPECT_TRUE(r.pass);
    EXPECT_LT(r.details["max_entry_deviation"].get<double>(), 1e-10);
  }
}

TEST(Dirichlet, Examples) {
  Rng rng = make_rng(6, "dir");
  EXPECT_NEAR(dirichlet_energy(MatrixBooleanFunction::constant(3, random_hermitian(2, rng))), 0.0, 1e-15);
  EXPECT_NEAR(dirichlet_energy(dictator(1, 3)), 1.0, 1e-15);
  for (int t = 0; t < 50; ++t) {
    Rng g = make_rng(6, "dir-rand", t);
    const MatrixBooleanFunction f = hermitian_function(1 + t % 3, 1 + t % 5, g);
    const DirichletForms forms = dirichlet_forms(f);
    EXPECT_NEAR(forms.spectral, forms.flip, 1e-10);
    EXPECT_NEAR(forms.spectral, forms.efron_stein, 1e-10);
    double energy = 0.0;
    const auto coeffs = brute_fourier(f);
    for (std::size_t s = 0; s < coeffs.size(); ++s) energy += std::popcount(s) * oracle::ntr(coeffs[s] * coeffs[s]);
    EXPECT_NEAR(forms.spectral, energy, 1e-10);
  }
}

TEST(BonamiBeckner, Boundaries) {
  for (int t = 0; t < 20; ++t) {
    Rng rng = make_rng(7, "bb", t);
    const MatrixBooleanFunction f = hermitian_function(2, 3, rng);
    const CheckReport two = check_bonami_beckner(f, 2.0);
    EXPECT_NEAR(two.details["lhs"].get<double>(), two.details["rhs"].get<double>(), 1e-12);
    const CheckReport one = check_bonami_beckner(f, 1.0);
    const FourierTable ft = fourier_transform(f);
    EXPECT_NEAR(one.details["lhs"].get<double>(), schatten_norm(ft.coeffs[0], 1.0, true), 1e-12);
    EXPECT_TRUE(one.pass);
  }
  Rng rng = make_rng(7, "bb-bad");
  EXPECT_THROW(check_bonami_beckner(hermitian_function(2, 2, rng), 2.5), InvalidExponent);
}

TEST(BonamiBeckner, ThousandRandomPsdFunctions) {
  std::int64_t violations = 0;
  for (int t = 0; t < 1000; ++t) {
    Rng rng = make_rng(8, "bb-sweep", t);
    if (!check_bonami_beckner(psd_function(3, 5, rng), 1.5).pass) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(BonamiBeckner, HoldsAcrossExponentGrid) {
  for (int t = 0; t < 50; ++t) {
    Rng rng = make_rng(9, "bb-grid", t);
    const MatrixBooleanFunction f = hermitian_function(2, 3, rng);
    double prev = 0.0;
    for (double p : {1.0, 1.25, 1.5, 1.75, 2.0}) {
      const CheckReport r = check_bonami_beckner(f, p);
      EXPECT_TRUE(r.pass) << p;
      const double lhs = r.details["lhs"].get<double>();
      EXPECT_GE(lhs, prev - 1e-12);
      prev = lhs;
    }
  }
}

TEST(PhiSobolev, Examples) {
  Rng rng = make_rng(10, "sob");
  // d=1: H ≤ (2−p)E(f).
  const MatrixBooleanFunction s = psd_function(1, 3, rng);
  for (double p : {1.1, 1.5, 1.9}) {
    const CheckReport r = check_phi_sobolev(s, p);
    EXPECT_NEAR(r.details["rhs"].get<double>(), (2 - p) * dirichlet_energy(s), 1e-12);
    EXPECT_TRUE(r.pass);
  }
  const HermitianMatrix c = random_psd(2, rng);
  const CheckReport rc = check_phi_sobolev(MatrixBooleanFunction::constant(2, c), 1.5);
  EXPECT_NEAR(rc.details["lhs"].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(rc.details["rhs"].get<double>(), oracle::ntr(c.matrix() * c.matrix()) * (1 - std::pow(2.0, 1 - 2 / 1.5)),
              1e-12);
  EXPECT_THROW(check_phi_sobolev(hermitian_function(2, 2, rng), 1.5), DomainError);
}

TEST(PhiSobolev, ThousandRandomFunctionsPerExponent) {
  for (double p : {1.1, 1.5, 1.9}) {
    std::int64_t violations = 0;
    for (int t = 0; t < 1000; ++t) {
      Rng rng = make_rng(11, "sob-sweep", t);
      if (!check_phi_sobolev(psd_function(2, 4, rng), p).pass) ++violations;
    }
    EXPECT_EQ(violations, 0) << p;
  }
}

TEST(LogSobolev, Examples) {
  Rng rng = make_rng(12, "lsi");
  const HermitianMatrix c = random_psd(3, rng);
  const CheckReport rc = check_log_sobolev(MatrixBooleanFunction::constant(2, c));
  EXPECT_NEAR(rc.details["ent"].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(rc.details["rhs"].get<double>(), std::log(3.0) * oracle::ntr(c.matrix() * c.matrix()), 1e-12);

  for (auto [a, b] : {std::pair{1.0, 2.0}, {0.3, 0.9}, {1.0, 0.0}}) {
    MatrixBooleanFunction f{1, 1, {HermitianMatrix::scalar(a), HermitianMatrix::scalar(b)}};
    const double m = (a * a + b * b) / 2;
    const double ent = 0.5 * (oracle::xlogx_scalar(a * a) + oracle::xlogx_scalar(b * b)) - m * std::log(m);
    const CheckReport r = check_log_sobolev(f);
    EXPECT_NEAR(r.details["ent"].get<double>(), ent, 1e-13);
    EXPECT_NEAR(r.details["rhs"].get<double>(), (a - b) * (a - b) / 2, 1e-13);
    EXPECT_TRUE(r.pass);
  }
  for (int t = 0; t < 200; ++t) {
    Rng g = make_rng(12, "lsi-rand", t);
    const MatrixBooleanFunction f = psd_function(2, 3, g);
    const CheckReport r = check_log_sobolev(f);
    EXPECT_TRUE(r.pass);
    const auto [ent, energy] = oracle_lsi_sides(f);
    EXPECT_NEAR(r.details["ent"].get<double>(), ent, 1e-10);
    EXPECT_NEAR(r.details["energy"].get<double>(), energy, 1e-10);
  }
}

TEST(LogSobolev, SobolevSlackApproachesLogSobolevSlack) {
  for (int t = 0; t < 20; ++t) {
    Rng rng = make_rng(13, "limit", t);
    const MatrixBooleanFunction f = psd_function(1 + t % 3, 3, rng);
    const double target = 0.5 * log_sobolev_slack(f);
    const double coarse = std::abs(sobolev_slack(f, 1.9) / 0.1 - target);
    const double fine = std::abs(sobolev_slack(f, 1.99) / 0.01 - target);
    const double scale = 1 + std::abs(target);
    EXPECT_LT(coarse, 2 * 0.1 * scale);
    EXPECT_LT(fine, 2 * 0.01 * scale);
  }
}

TEST(PVariance, Examples) {
  Rng rng = make_rng(14, "pvar");
  const HermitianMatrix c = random_psd(2, rng);
  const CheckReport rc = check_p_variance_limit(DiscreteRandomMatrix::constant(c));
  EXPECT_TRUE(rc.pass);
  EXPECT_LT(max_abs_entry(p_variance_limit(DiscreteRandomMatrix::constant(c)).matrix()), 1e-12);

  const DiscreteRandomMatrix z{{0.5, 0.5}, {HermitianMatrix::scalar(1.0), HermitianMatrix::scalar(2.0)}};
  const double want = 0.5 * (0.5 * 4 * std::log(4.0)) - 0.5 * 2.5 * std::log(2.5);
  EXPECT_NEAR(want, 0.2409, 1e-4);
  EXPECT_NEAR(p_variance_limit(z)(0, 0).real(), want, 1e-14);
  const CheckReport rz = check_p_variance_limit(z);
  EXPECT_TRUE(rz.pass) << to_json(rz).dump();

  // 𝔼Z² − (𝔼Z^p)^{2/p} directly.
  const double p = 1.9;
  const double direct = 2.5 - std::pow(0.5 * (1 + std::pow(2.0, p)), 2 / p);
  EXPECT_NEAR(p_variance(z, p)(0, 0).real(), direct, 1e-14);

  for (int t = 0; t < 50; ++t) {
    Rng g = make_rng(14, "pvar-rand", t);
    const DiscreteRandomMatrix law{random_probability(2, g), {random_psd(2, g), random_psd(2, g)}};
    EXPECT_TRUE(check_p_variance_limit(law).pass);
  }
  const DiscreteRandomMatrix singular{{0.5, 0.5}, {HermitianMatrix::scalar(0.0), HermitianMatrix::scalar(1.0)}};
  EXPECT_THROW(check_p_variance_limit(singular), DomainError);
}

TEST(LsiSearch, ScalarCaseNeverFindsCounterexample) {
  LsiSearchOptions o;
  o.d = 1;
  o.n = 2;
  o.restarts = 5;
  o.steps = 2000;
  o.seed = 15;
  const LsiSearchResult r = search_lsi_counterexample(o);
  EXPECT_FALSE(r.found);
  EXPECT_LE(r.objective, 1e-9);
}

TEST(LsiSearch, MatrixCaseFindsVerifiedWitness) {
  LsiSearchOptions o;
  o.d = 2;
  o.n = 1;
  o.restarts = 4;
  o.seed = 16;
  const LsiSearchResult r = search_lsi_counterexample(o);
  EXPECT_TRUE(r.found);
  EXPECT_TRUE(r.verified);
  EXPECT_GT(r.objective, kLsiFoundThreshold);
  const auto [ent, energy] = oracle_lsi_sides(r.f);
  EXPECT_NEAR(r.ent, ent, 1e-10);
  EXPECT_NEAR(r.energy, energy, 1e-10);
  EXPECT_NEAR(r.objective, ent - 2 * energy, 1e-10);
  // The witness violates the (1, 0) constants but not the (1, log d) ones.
  EXPECT_TRUE(check_log_sobolev(r.f).pass);
}

TEST(LsiSearch, ConstantFunctionHasZeroObjective) {
  Rng rng = make_rng(17, "lsi-const");
  const auto [ent, energy] = oracle_lsi_sides(MatrixBooleanFunction::constant(2, random_psd(2, rng)));
  EXPECT_NEAR(ent - 2 * energy, 0.0, 1e-13);
}

TEST(LsiSearch, IndependentOfWorkerCount) {
  LsiSearchOptions o;
  o.d = 2;
  o.n = 1;
  o.restarts = 4;
  o.steps = 500;
  o.seed = 18;
  const LsiSearchResult a = search_lsi_counterexample(o);
  o.jobs = 3;
  const LsiSearchResult b = search_lsi_counterexample(o);
  EXPECT_EQ(a.best_restart, b.best_restart);
  EXPECT_EQ(function_to_json(a.f).dump(), function_to_json(b.f).dump());
}

TEST(FunctionJson, RoundTripAndRejections) {
  Rng rng = make_rng(19, "json");
  const MatrixBooleanFunction f = hermitian_function(2, 3, rng);
  const MatrixBooleanFunction g = function_from_json(function_to_json(f));
  ASSERT_EQ(g.size(), f.size());
  for (std::size_t x = 0; x < f.size(); ++x) EXPECT_LT(oracle::max_dev(f.table[x].matrix(), g.table[x].matrix()), 1e-15);

  Json missing = function_to_json(f);
  missing["points"].erase(missing["points"].begin());
  EXPECT_THROW(function_from_json(missing), ConfigError);
  Json dup = function_to_json(f);
  dup["points"][1]["x"] = dup["points"][0]["x"];
  EXPECT_THROW(function_from_json(dup), ConfigError);
  Json badbits = function_to_json(f);
  badbits["points"][0]["x"] = "01";
  EXPECT_THROW(function_from_json(badbits), ConfigError);
  EXPECT_THROW(function_from_json(Json{{"n", 1}}), ConfigError);
}
