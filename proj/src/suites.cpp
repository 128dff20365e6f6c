#include "matphi/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace matphi {

namespace {

std::string stream_key(const std::string& name, const std::string& phi, int d, int n) {
  std::ostringstream os;
  os << name << '/' << phi << "/d" << d << "/n" << n;
  return os.str();
}

CheckReport sweep(const std::string& name, const std::string& phi, int d, int n, const SweepParams& p,
                  const std::function<TrialOutcome(Rng&, std::int64_t)>& trial) {
  CheckReport r = run_trials(stream_key(name, phi, d, n), phi, d, p.trials, p.seed, p.jobs, trial);
  r.check = name;
  r.n = n;
  return r;
}

TrialOutcome bounded(double gap, double tol, const std::function<Json()>& witness) {
  TrialOutcome o{gap, tol, Json()};
  if (!o.holds()) o.witness = witness();
  return o;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

using Pair = std::pair<HermitianMatrix, HermitianMatrix>;

// (u, w − u) with u, w PSD, so that u and u + v stay in the domain.
Pair bregman_pair(int d, Rng& rng) {
  HermitianMatrix u = random_psd(d, rng);
  const HermitianMatrix w = random_psd(d, rng);
  return {u, w - u};
}

}  // namespace

DiscreteRandomMatrix random_law(int d, int support, Rng& rng) {
  DiscreteRandomMatrix z;
  z.probs = random_probability(support, rng);
  for (int k = 0; k < support; ++k) z.values.push_back(random_psd(d, rng));
  return z;
}

ProductModel random_product_model(int d, int n, int outcomes, Rng& rng) {
  std::vector<std::vector<double>> laws;
  for (int i = 0; i < n; ++i) laws.push_back(random_probability(outcomes, rng));
  std::vector<HermitianMatrix> table;
  const std::size_t size = ProductModel::enumeration_size(laws);
  for (std::size_t f = 0; f < size; ++f) table.push_back(random_psd(d, rng));
  return ProductModel(std::move(laws), std::move(table));
}

MatrixBooleanFunction random_boolean_function(int d, int n, Rng& rng) {
  MatrixBooleanFunction f{n, d, {}};
  for (std::size_t x = 0; x < (std::size_t{1} << n); ++x) f.table.push_back(random_psd(d, rng));
  return f;
}

CQEnsemble random_ensemble(int d, int size, Rng& rng) {
  CQEnsemble e;
  e.mu = random_probability(size, rng);
  for (int x = 0; x < size; ++x) e.states.push_back(random_density(d, rng));
  return e;
}

MarkovKernel random_kernel(int inputs, int outputs, Rng& rng) {
  MarkovKernel k;
  for (int x = 0; x < inputs; ++x) k.rows.push_back(random_probability(outputs, rng));
  return k;
}

TrialOutcome outcome_of(const CheckReport& r) {
  TrialOutcome o{r.max_gap, r.pass ? kInf : -kInf, Json()};
  if (!r.pass) o.witness = r.violations.empty() ? r.details : r.violations.front().witness;
  return o;
}

// ---- characterizations ------------------------------------------------------------------------

CheckReport sweep_char_a(const PhiFunction& phi, int d, const SweepParams& p) {
  const double rel = p.rel_or(kConvexityRelTol);
  return sweep("char-a", phi.descriptor(), d, -1, p, [&](Rng& rng, std::int64_t) {
    const HermitianMatrix a = random_psd(d, rng);
    const HermitianMatrix b = random_psd(d, rng);
    return char_a_trial(phi, a, b, rel);
  });
}

namespace {

CheckReport convexity_sweep(const std::string& name, const PhiFunction& phi, int d, const SweepParams& p,
                            const MatrixPairMap& map, const PairSampler& sampler) {
  const double rel = p.rel_or(kConvexityRelTol);
  CheckReport r = sweep(name, phi.descriptor(), d, -1, p, [&](Rng& rng, std::int64_t t) {
    const double s = (t % 2 == 0) ? 0.5 : rng.uniform();
    return joint_convexity_trial(map, sampler, rng, s, rel);
  });
  r.details = Json{{"note", "no violation in " + std::to_string(r.trials) + " trials is evidence, not proof"}};
  return r;
}

}  // namespace

CheckReport sweep_char_b(const PhiFunction& phi, int d, const SweepParams& p) {
  return convexity_sweep(
      "char-b", phi, d, p, [&](const auto& u, const auto& v) { return bregman_a(phi, u, v); },
      [d](Rng& rng) { return bregman_pair(d, rng); });
}

CheckReport sweep_char_c(const PhiFunction& phi, int d, const SweepParams& p) {
  return convexity_sweep(
      "char-c", phi, d, p, [&](const auto& u, const auto& v) { return bregman_b(phi, u, v); },
      [d](Rng& rng) { return bregman_pair(d, rng); });
}

CheckReport sweep_char_d(const PhiFunction& phi, int d, const SweepParams& p) {
  return convexity_sweep(
      "char-d", phi, d, p, [&](const auto& u, const auto& v) { return bregman_c(phi, u, v); },
      [d](Rng& rng) { return Pair{random_psd(d, rng), random_hermitian(d, rng)}; });
}

CheckReport sweep_char_e(const PhiFunction& phi, int d, const SweepParams& p) {
  const double rel = p.rel_or(kConvexityRelTol);
  return sweep("char-e", phi.descriptor(), d, -1, p, [&](Rng& rng, std::int64_t) {
    const HermitianMatrix a = random_psd(d, rng);
    HermitianMatrix h = random_hermitian(d, rng);
    HermitianMatrix k = random_hermitian(d, rng);
    h *= 1.0 / frobenius_norm(h.matrix());
    k *= 1.0 / frobenius_norm(k.matrix());
    const CharEValues v = check_char_e(phi, a, h, k, rel);
    return bounded(v.rhs - v.lhs, rel_tol(rel, v.lhs, v.rhs), [&] {
      return Json{{"A", matrix_to_json(a)}, {"h", matrix_to_json(h)}, {"k", matrix_to_json(k)},
                  {"lhs", v.lhs}, {"rhs", v.rhs}};
    });
  });
}

CheckReport sweep_char_f(const PhiFunction& phi, int d, const SweepParams& p) {
  const double rel = p.rel_or(kConvexityRelTol);
  return sweep("char-f", phi.descriptor(), d, -1, p, [&](Rng& rng, std::int64_t t) {
    const double weight = rng.uniform();
    const double s = (t % 2 == 0) ? 0.5 : rng.uniform();
    auto map = [&](const HermitianMatrix& u, const HermitianMatrix& v) { return jensen_gap(phi, weight, u, v); };
    auto sampler = [d](Rng& g) { return Pair{random_psd(d, g), random_psd(d, g)}; };
    TrialOutcome o = joint_convexity_trial(map, sampler, rng, s, rel);
    if (!o.holds()) o.witness["weight"] = weight;
    return o;
  });
}

CheckReport sweep_char_g(const PhiFunction& phi, int d, const SweepParams& p) {
  const double rel = p.rel_or(kEntropyRelTol);
  return sweep("char-g", phi.descriptor(), d, 2, p, [&](Rng& rng, std::int64_t) {
    const int k = rng.uniform_int(2, 3);
    return outcome_of(check_char_g(phi, random_product_model(d, 2, k, rng), rel));
  });
}

CheckReport sweep_char_h(const PhiFunction& phi, int d, const SweepParams& p) {
  const double rel = p.rel_or(kEntropyRelTol);
  return sweep("char-h", phi.descriptor(), d, -1, p, [&](Rng& rng, std::int64_t) {
    const DiscreteRandomMatrix z1 = random_law(d, 3, rng);
    DiscreteRandomMatrix z2{z1.probs, {}};
    for (std::size_t k = 0; k < z1.size(); ++k) z2.values.push_back(random_psd(d, rng));
    return outcome_of(check_char_h(phi, z1, z2, rng.uniform(), rel));
  });
}

CheckReport sweep_char_i(const PhiFunction& phi, int d, const SweepParams& p) {
  const double rel = p.rel_or(kEntropyRelTol);
  return sweep("char-i", phi.descriptor(), d, -1, p, [&](Rng& rng, std::int64_t) {
    const DiscreteRandomMatrix z = random_law(d, 3, rng);
    DiscreteRandomMatrix t{z.probs, {}};
    for (std::size_t k = 0; k < z.size(); ++k) t.values.push_back(random_psd(d, rng));
    const double h = phi_entropy(phi, z);
    const double lower = duality_lower_bound(phi, z, t);
    const double attained = duality_lower_bound(phi, z, z);
    // The bound never exceeds H(Z) and is attained at T = Z.
    const double gap = std::max(lower - h, std::abs(attained - h));
    return bounded(gap, rel_tol(rel, h, lower), [&] {
      return Json{{"entropy", h}, {"lower_bound", lower}, {"at_T_equals_Z", attained}};
    });
  });
}

CheckReport sweep_char_j(const PhiFunction& phi, int d, const SweepParams& p) {
  const double rel = p.rel_or(kEntropyRelTol);
  CheckReport r = sweep("char-j", phi.descriptor(), d, 3, p, [&](Rng& rng, std::int64_t) {
    return outcome_of(check_subadditivity(phi, random_product_model(d, 3, 2, rng), rel));
  });
  return r;
}

// ---- concentration ----------------------------------------------------------------------------

CheckReport sweep_efron_stein(int d, int n, const SweepParams& p) {
  const double rel = p.rel_or(kEntropyRelTol);
  return sweep("efron-stein", "", d, n, p, [&](Rng& rng, std::int64_t) {
    return outcome_of(check_efron_stein(random_product_model(d, n, 2, rng), rel));
  });
}

CheckReport sweep_efron_stein_forms(int d, int n, const SweepParams& p) {
  return sweep("efron-stein-forms", "", d, n, p, [&](Rng& rng, std::int64_t) {
    const EfronSteinForms f = efron_stein_forms(random_product_model(d, n, 2, rng));
    return bounded(f.discrepancy(), 1e-10 * (1.0 + std::abs(f.pairs)), [&] {
      return Json{{"pairs", f.pairs}, {"conditional", f.conditional}, {"positive", f.positive}};
    });
  });
}

CheckReport sweep_plus_identities(int d, int q, const SweepParams& p) {
  return sweep("plus-identities[q=" + std::to_string(q) + "]", "", d, -1, p, [&](Rng& rng, std::int64_t) {
    DiscreteRandomMatrix x;
    const int support = rng.uniform_int(2, 4);
    x.probs = random_probability(support, rng);
    for (int k = 0; k < support; ++k) x.values.push_back(random_hermitian(d, rng));
    return outcome_of(check_plus_identities(x, q));
  });
}

namespace {

MatrixInputModel square_sum_model(int d, int n, Rng& rng) {
  MatrixInputModel m;
  for (int i = 0; i < n; ++i) {
    m.probs.push_back(random_probability(2, rng));
    m.outcomes.push_back({random_spectrum_in(d, rng, 0.0, 1.0), random_spectrum_in(d, rng, 0.0, 1.0)});
  }
  m.evaluator = [d](std::span<const HermitianMatrix> xs) {
    HermitianMatrix s(d);
    for (const auto& x : xs) s += square(x);
    return s;
  };
  m.partial = [](std::span<const HermitianMatrix> xs, int i, const HermitianMatrix& e) {
    return 2.0 * jordan_product(xs[static_cast<std::size_t>(i)], e);
  };
  return m;
}

MultivariateFunction square_sum_function(int n) {
  MultivariateFunction f;
  f.n = n;
  f.value = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  };
  f.partial = [](std::span<const double> x, int i) { return 2.0 * x[static_cast<std::size_t>(i)]; };
  return f;
}

MatrixInputModel diagonal_model(int d, int n, Rng& rng) {
  MatrixInputModel m;
  for (int i = 0; i < n; ++i) {
    m.probs.push_back(random_probability(2, rng));
    std::vector<HermitianMatrix> outs;
    for (int o = 0; o < 2; ++o) {
      std::vector<double> diag(static_cast<std::size_t>(d));
      for (auto& v : diag) v = rng.uniform();
      outs.push_back(HermitianMatrix::diagonal(diag));
    }
    m.outcomes.push_back(outs);
  }
  m.evaluator = [](std::span<const HermitianMatrix> xs) { return xs.front(); };
  return m;
}

}  // namespace

CheckReport sweep_poincare(int d, int n, DerivativeMode mode, const SweepParams& p) {
  const bool fd = mode == DerivativeMode::finite_difference;
  const double rel = p.rel_or(kEntropyRelTol);
  CheckReport r = sweep(fd ? "poincare-fd" : "poincare", "", d, n, p, [&](Rng& rng, std::int64_t t) {
    PoincareOptions opt;
    opt.mode = mode;
    opt.rel = rel;
    opt.seed = mix_seed(p.seed, "poincare-probes", static_cast<std::uint64_t>(t));
    opt.spot_check_convexity = fd;
    if (fd) {
      opt.probes_per_coordinate = 10;
      opt.random_directions = 20;
    }
    return outcome_of(check_poincare(square_sum_model(d, n, rng), opt));
  });
  if (fd) r.details = Json{{"bound_is_estimate", true}};
  return r;
}

CheckReport sweep_poincare_commuting(int d, int n, const SweepParams& p) {
  const double rel = p.rel_or(kEntropyRelTol);
  const MultivariateFunction f = square_sum_function(n);
  return sweep("poincare-commuting", "", d, n, p, [&](Rng& rng, std::int64_t) {
    return outcome_of(check_poincare_commuting(diagonal_model(d, n, rng), f, rel));
  });
}

CheckReport sweep_lipschitz(int d, const SweepParams& p) {
  MultivariateFunction f;
  f.n = 2;
  f.value = [](std::span<const double> x) { return std::abs(x[0] - x[1]); };
  CheckReport r;
  r.check = "lipschitz-ratio";
  r.d = d;
  r.n = 2;
  r.seed = p.seed;
  Json ratios = Json::array();
  const std::int64_t count = std::min<std::int64_t>(p.trials, 20);
  for (std::int64_t t = 0; t < count; ++t) {
    Rng rng = make_rng(p.seed, stream_key("lipschitz-ratio", "", d, 2), static_cast<std::uint64_t>(t));
    const LipschitzReport rep = lipschitz_report(diagonal_model(d, 2, rng), f, 16);
    ratios.push_back(rep.ratio);
  }
  r.details = Json{{"ratios", ratios},
                   {"lipschitz_constant_is_lower_bound", true},
                   {"note", "report only: the universal constant is unspecified"}};
  return r;
}

std::vector<CheckReport> gaussian_checks(std::int64_t samples, std::uint64_t seed, int jobs) {
  std::vector<CheckReport> out;
  auto tag = [](CheckReport r, const std::string& fn) {
    r.phi = fn;
    return r;
  };
  {
    GaussianFunction f;
    f.n = 3;
    f.value = [](std::span<const HermitianMatrix> x) {
      return HermitianMatrix::scalar(x[0](0, 0).real() + x[1](0, 0).real() + x[2](0, 0).real());
    };
    f.derivative_norm2 = [](std::span<const HermitianMatrix>, int) { return 1.0; };
    out.push_back(tag(check_gaussian_poincare(f, samples, seed, jobs), "sum"));
  }
  {
    GaussianFunction f;
    f.value = [](std::span<const HermitianMatrix> x) {
      const double v = x[0](0, 0).real();
      return HermitianMatrix::scalar(v * v);
    };
    f.derivative_norm2 = [](std::span<const HermitianMatrix> x, int) {
      const double v = x[0](0, 0).real();
      return 4.0 * v * v;
    };
    out.push_back(tag(check_gaussian_poincare(f, samples, seed, jobs), "square"));
  }
  const HermitianMatrix a = HermitianMatrix(CMatrix{{{1.0, 0.0}, {0.5, -0.5}}, {{0.5, 0.5}, {-0.3, 0.0}}});
  const HermitianMatrix b = HermitianMatrix::diagonal({0.2, 1.1});
  {
    GaussianFunction f;
    f.n = 2;
    f.d_out = 2;
    f.value = [a, b](std::span<const HermitianMatrix> x) {
      return x[0](0, 0).real() * a + std::sin(x[1](0, 0).real()) * b;
    };
    out.push_back(tag(check_gaussian_poincare(f, samples, seed, jobs), "matrix-affine-sine"));
  }
  const HermitianMatrix pmat = HermitianMatrix(CMatrix{{{2.0, 0.0}, {0.5, 0.25}}, {{0.5, -0.25}, {1.0, 0.0}}});
  const double pnorm2 = pmat.matrix().squaredNorm();
  GaussianFunction expo;
  expo.d_out = 2;
  expo.value = [pmat](std::span<const HermitianMatrix> x) { return std::exp(x[0](0, 0).real() / 4.0) * pmat; };
  expo.derivative_norm2 = [pnorm2](std::span<const HermitianMatrix> x, int) {
    return std::exp(x[0](0, 0).real() / 2.0) * pnorm2 / 16.0;
  };
  out.push_back(tag(check_gaussian_sobolev(expo, 1.5, samples, seed, jobs), "exp-quarter-psd"));
  GaussianFunction scalar_exp;
  scalar_exp.value = [](std::span<const HermitianMatrix> x) { return HermitianMatrix::scalar(std::exp(x[0](0, 0).real() / 4.0)); };
  scalar_exp.derivative_norm2 = [](std::span<const HermitianMatrix> x, int) {
    return std::exp(x[0](0, 0).real() / 2.0) / 16.0;
  };
  out.push_back(tag(check_gaussian_sobolev(scalar_exp, 1.5, samples, seed, jobs), "exp-quarter"));
  {
    // exp(λx/2) with λ = 1: the classical equality family.
    GaussianFunction f;
    f.value = [](std::span<const HermitianMatrix> x) { return HermitianMatrix::scalar(std::exp(x[0](0, 0).real() / 2.0)); };
    f.derivative_norm2 = [](std::span<const HermitianMatrix> x, int) { return std::exp(x[0](0, 0).real()) / 4.0; };
    out.push_back(tag(check_gaussian_logsobolev(f, samples, seed, jobs), "exp-half"));
  }
  out.push_back(tag(check_gaussian_logsobolev(expo, samples, seed, jobs), "exp-quarter-psd"));
  {
    const HermitianMatrix c0 = HermitianMatrix::diagonal({1.0, 0.5});
    const HermitianMatrix c1 = HermitianMatrix(CMatrix{{{0.0, 0.0}, {0.3, 0.2}}, {{0.3, -0.2}, {0.1, 0.0}}});
    const HermitianMatrix c2 = HermitianMatrix::diagonal({0.2, -0.4});
    GaussianFunction f;
    f.n = 2;
    f.d_out = 2;
    f.value = [c0, c1, c2](std::span<const HermitianMatrix> x) {
      const double u = x[0](0, 0).real();
      const double v = x[1](0, 0).real();
      return positive_part(c0 + u * c1 + (v * v) * c2);
    };
    out.push_back(tag(check_gaussian_logsobolev(f, samples, seed, jobs), "clipped-polynomial"));
  }
  return out;
}

// ---- Boolean cube -----------------------------------------------------------------------------

CheckReport sweep_fourier_roundtrip(int d, int n, const SweepParams& p) {
  return sweep("fourier-roundtrip", "", d, n, p, [&](Rng& rng, std::int64_t) {
    const MatrixBooleanFunction f = random_boolean_function(d, n, rng);
    const MatrixBooleanFunction g = inverse_fourier(fourier_transform(f));
    double dev = 0.0;
    double scale = 0.0;
    for (std::size_t x = 0; x < f.size(); ++x) {
      dev = std::max(dev, max_abs_entry(f.table[x].matrix() - g.table[x].matrix()));
      scale = std::max(scale, max_abs_entry(f.table[x].matrix()));
    }
    return bounded(dev, 1e-12 * (1.0 + scale), [&] { return Json{{"deviation", dev}}; });
  });
}

CheckReport sweep_noise_semigroup(int d, int n, const SweepParams& p) {
  return sweep("noise-semigroup", "", d, n, p, [&](Rng& rng, std::int64_t) {
    const FourierTable t = fourier_transform(random_boolean_function(d, n, rng));
    const double g = rng.uniform();
    const double h = rng.uniform();
    const FourierTable two = noise_operator(noise_operator(t, h), g);
    const FourierTable one = noise_operator(t, g * h);
    double dev = 0.0;
    double scale = 0.0;
    for (std::size_t s = 0; s < t.coeffs.size(); ++s) {
      dev = std::max(dev, max_abs_entry(two.coeffs[s].matrix() - one.coeffs[s].matrix()));
      scale = std::max(scale, max_abs_entry(t.coeffs[s].matrix()));
    }
    return bounded(dev, 1e-12 * (1.0 + scale), [&] { return Json{{"deviation", dev}, {"gamma", g}, {"delta", h}}; });
  });
}

CheckReport sweep_parseval(int d, int n, const SweepParams& p) {
  return sweep("parseval", "", d, n, p,
               [&](Rng& rng, std::int64_t) { return outcome_of(parseval_check(random_boolean_function(d, n, rng))); });
}

CheckReport sweep_dirichlet(int d, int n, const SweepParams& p) {
  return sweep("dirichlet-identity", "", d, n, p, [&](Rng& rng, std::int64_t) {
    const DirichletForms f = dirichlet_forms(random_boolean_function(d, n, rng));
    return bounded(f.discrepancy(), 1e-10 * (1.0 + std::abs(f.spectral)), [&] {
      return Json{{"spectral", f.spectral}, {"flip", f.flip}, {"efron_stein", f.efron_stein}};
    });
  });
}

CheckReport sweep_bonami_beckner(int d, int n, double exponent, const SweepParams& p) {
  const double rel = p.rel_or(kConvexityRelTol);
  return sweep("bonami-beckner[p=" + fmt(exponent) + "]", "", d, n, p, [&](Rng& rng, std::int64_t) {
    return outcome_of(check_bonami_beckner(random_boolean_function(d, n, rng), exponent, rel));
  });
}

CheckReport sweep_phi_sobolev(int d, int n, double exponent, const SweepParams& p) {
  const double rel = p.rel_or(kConvexityRelTol);
  return sweep("phi-sobolev[p=" + fmt(exponent) + "]", "", d, n, p, [&](Rng& rng, std::int64_t) {
    return outcome_of(check_phi_sobolev(random_boolean_function(d, n, rng), exponent, rel));
  });
}

CheckReport sweep_log_sobolev(int d, int n, const SweepParams& p) {
  const double rel = p.rel_or(kConvexityRelTol);
  return sweep("log-sobolev", "", d, n, p, [&](Rng& rng, std::int64_t) {
    return outcome_of(check_log_sobolev(random_boolean_function(d, n, rng), rel));
  });
}

namespace {
constexpr double kSobolevLimitRate = 2.0;
}  // namespace

CheckReport sweep_sobolev_limit(int d, int n, const SweepParams& p) {
  return sweep("sobolev-to-log-sobolev", "", d, n, p, [&](Rng& rng, std::int64_t) {
    const MatrixBooleanFunction f = random_boolean_function(d, n, rng);
    const double target = 0.5 * log_sobolev_slack(f);
    const double coarse = std::abs(sobolev_slack(f, 1.9) / 0.1 - target);
    const double fine = std::abs(sobolev_slack(f, 1.99) / 0.01 - target);
    // O(ε) convergence with the constant pinned at kSobolevLimitRate relative to 1 + |target|.
    const double scale = kSobolevLimitRate * (1.0 + std::abs(target));
    const double gap = std::max(coarse - 0.1 * scale, fine - 0.01 * scale);
    return bounded(gap, 0.0, [&] {
      return Json{{"target", target}, {"error_eps_0.1", coarse}, {"error_eps_0.01", fine}};
    });
  });
}

CheckReport sweep_p_variance(int d, const SweepParams& p) {
  return sweep("p-variance-limit", "", d, -1, p,
               [&](Rng& rng, std::int64_t) { return outcome_of(check_p_variance_limit(random_law(d, 2, rng))); });
}

// ---- classical-quantum ------------------------------------------------------------------------

CheckReport sweep_holevo_dual_path(int d, const SweepParams& p) {
  return sweep("holevo-dual-path", "", d, -1, p, [&](Rng& rng, std::int64_t) {
    const CQEnsemble e = random_ensemble(d, 3, rng);
    const double chi = holevo_chi(e);
    const double dual = d * phi_entropy(PhiFunction::xlogx(), e.as_random_matrix());
    return bounded(std::abs(chi - dual), 1e-9, [&] { return Json{{"chi", chi}, {"d_times_entropy", dual}}; });
  });
}

CheckReport sweep_average_state(int d, const SweepParams& p) {
  return sweep("average-state", "", d, -1, p, [&](Rng& rng, std::int64_t) {
    const CQEnsemble e = random_ensemble(d, 3, rng);
    const CQEnsemble out = evolve_ensemble(e, random_kernel(3, 3, rng));
    const double dev = max_abs_entry(out.average().matrix() - e.average().matrix());
    return bounded(dev, 1e-12, [&] { return Json{{"deviation", dev}}; });
  });
}

CheckReport sweep_data_processing(const PhiFunction& phi, int d, const SweepParams& p) {
  const double rel = p.rel_or(kEntropyRelTol);
  return sweep("data-processing", phi.descriptor(), d, -1, p, [&](Rng& rng, std::int64_t) {
    const int nx = rng.uniform_int(2, 4);
    const int ny = rng.uniform_int(2, 4);
    const CQEnsemble e = random_ensemble(d, nx, rng);
    return outcome_of(check_data_processing(e, random_kernel(nx, ny, rng), phi, rel));
  });
}

CheckReport sweep_law_total_variance(const PhiFunction& phi, int d, const SweepParams& p) {
  return sweep("law-total-variance", phi.descriptor(), d, -1, p, [&](Rng& rng, std::int64_t) {
    const int atoms = rng.uniform_int(3, 6);
    const std::vector<double> probs = random_probability(atoms, rng);
    std::vector<JointAtom> joint;
    for (int a = 0; a < atoms; ++a) joint.push_back({probs[static_cast<std::size_t>(a)], random_psd(d, rng), rng.uniform_int(0, 2)});
    return outcome_of(check_law_total_variance(phi, joint));
  });
}

CheckReport sweep_eta_bounds(int d, const SweepParams& p) {
  return sweep("eta-bounds", "xlogx", d, -1, p, [&](Rng& rng, std::int64_t t) {
    EtaOptions opt;
    opt.d = d;
    opt.restarts = 4;
    opt.steps = 40;
    opt.grid_step = 0.1;
    opt.seed = rng.next();
    std::vector<double> mu = random_probability(2, rng);
    double gap = 0.0;
    double eta = 0.0;
    std::string kind;
    if (t == 0) {
      kind = "identity";
      eta = eta_phi(mu, MarkovKernel::identity(2), opt).eta_hat;
      gap = std::abs(eta - 1.0);
    } else if (t == 1) {
      kind = "constant";
      eta = eta_phi(mu, MarkovKernel::constant(2, random_probability(2, rng)), opt).eta_hat;
      gap = std::abs(eta);
    } else {
      kind = "random";
      eta = eta_phi(mu, random_kernel(2, 2, rng), opt).eta_hat;
      gap = std::max(eta - 1.0, -eta);
    }
    return bounded(gap, 0.0, [&] { return Json{{"kernel", kind}, {"eta_hat", eta}}; });
  });
}

CheckReport sweep_functional_sdpi(int d, const SweepParams& p) {
  const double rel = p.rel_or(kEntropyRelTol);
  const std::vector<double> mu{0.5, 0.5};
  const MarkovKernel k = MarkovKernel::binary_symmetric(0.1);
  EtaOptions opt;
  opt.d = d;
  opt.seed = p.seed;
  opt.jobs = p.jobs;
  const double eta = eta_phi(mu, k, opt).eta_hat;
  const double c = std::min(eta + 0.05, 0.999);
  CheckReport r = sweep("functional-sdpi", "xlogx", d, -1, p, [&](Rng& rng, std::int64_t) {
    const std::vector<HermitianMatrix> f{random_density(d, rng), random_density(d, rng)};
    return outcome_of(check_functional_sdpi(mu, k, f, c, PhiFunction::xlogx(), rel));
  });
  r.details = Json{{"kernel", "binary-symmetric 0.1"}, {"eta_hat", eta}, {"c", c}};
  return r;
}

// ---- orchestration ----------------------------------------------------------------------------

void RunConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (samples < 1) throw ConfigError("samples must be at least 1");
  if (d && (*d < 1 || *d > 8)) throw ConfigError("d must lie in [1, 8]");
  if (n && (*n < 0 || *n > kMaxCubeDim)) throw ConfigError("n must lie in [0, 12]");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  if (tol && !(*tol > 0.0)) throw ConfigError("tol must be positive");
  for (const auto& s : phis) PhiFunction::parse(s);
}

Json RunConfig::to_json() const {
  Json j{{"seed", seed}, {"trials", trials}, {"samples", samples}};
  j["tol"] = tol ? Json(*tol) : Json(nullptr);
  j["d"] = d ? Json(*d) : Json(nullptr);
  j["n"] = n ? Json(*n) : Json(nullptr);
  j["phi"] = phis;
  return j;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"characterizations", "efron-stein", "poincare", "gaussian",
                                              "fourier",           "sobolev",     "holevo",   "all"};
  return names;
}

std::vector<std::string> default_phis() { return {"power:1.2", "power:1.5", "power:2", "xlogx"}; }

namespace {

using Task = std::function<CheckReport()>;

struct Plan {
  std::vector<Task> tasks;
  std::vector<std::string> skipped;
};

std::vector<int> dims(const RunConfig& c, std::vector<int> fallback) {
  return c.d ? std::vector<int>{*c.d} : fallback;
}

std::vector<PhiFunction> parsed_phis(const RunConfig& c) {
  std::vector<PhiFunction> out;
  for (const auto& s : c.phis.empty() ? default_phis() : c.phis) out.push_back(PhiFunction::parse(s));
  return out;
}

void plan_characterizations(const RunConfig& c, const SweepParams& sp, Plan& plan) {
  using Sweep = CheckReport (*)(const PhiFunction&, int, const SweepParams&);
  const std::vector<std::pair<char, Sweep>> all{{'a', sweep_char_a}, {'b', sweep_char_b}, {'c', sweep_char_c},
                                                {'d', sweep_char_d}, {'e', sweep_char_e}, {'f', sweep_char_f},
                                                {'g', sweep_char_g}, {'h', sweep_char_h}, {'i', sweep_char_i},
                                                {'j', sweep_char_j}};
  for (const PhiFunction& phi : parsed_phis(c))
    for (int d : dims(c, {1, 2, 3}))
      for (const auto& [letter, fn] : all) {
        const std::string name = std::string("char-") + letter;
        const bool needs_curvature = letter == 'a' || letter == 'e';
        if (!phi.in_entropy_class() && letter != 'a' && letter != 'd' && letter != 'e') {
          plan.skipped.push_back(name + " " + phi.descriptor() + " d=" + std::to_string(d) + ": outside the entropy class");
          continue;
        }
        if (needs_curvature && phi.is_affine()) {
          plan.skipped.push_back(name + " " + phi.descriptor() + " d=" + std::to_string(d) + ": affine phi");
          continue;
        }
        plan.tasks.push_back([phi, d, sp, fn = fn] { return fn(phi, d, sp); });
      }
}

void plan_efron_stein(const RunConfig& c, const SweepParams& sp, Plan& plan) {
  const int n = c.n.value_or(3);
  for (int d : dims(c, {1, 2, 3})) {
    plan.tasks.push_back([=] { return sweep_efron_stein(d, n, sp); });
    plan.tasks.push_back([=] { return sweep_efron_stein_forms(d, n, sp); });
    for (int q : {1, 2, 3}) plan.tasks.push_back([=] { return sweep_plus_identities(d, q, sp); });
  }
}

void plan_poincare(const RunConfig& c, const SweepParams& sp, Plan& plan) {
  const int n = std::max(1, std::min(c.n.value_or(2), 4));
  for (int d : dims(c, {1, 2, 3})) {
    plan.tasks.push_back([=] { return sweep_poincare(d, n, DerivativeMode::analytic, sp); });
    plan.tasks.push_back([=] { return sweep_poincare(d, n, DerivativeMode::finite_difference, sp); });
    plan.tasks.push_back([=] { return sweep_poincare_commuting(d, n, sp); });
    plan.tasks.push_back([=] { return sweep_lipschitz(d, sp); });
  }
}

void plan_gaussian(const RunConfig& c, Plan& plan) {
  // One task; the individual reports are split out after it runs.
  plan.tasks.push_back([=] {
    CheckReport bundle;
    bundle.check = "__gaussian_bundle";
    Json parts = Json::array();
    for (const auto& r : gaussian_checks(c.samples, c.seed, c.jobs)) parts.push_back(to_json(r));
    bundle.details = Json{{"parts", parts}};
    return bundle;
  });
}

void plan_fourier(const RunConfig& c, const SweepParams& sp, Plan& plan) {
  const int n = c.n.value_or(3);
  for (int d : dims(c, {1, 2, 3})) {
    plan.tasks.push_back([=] { return sweep_fourier_roundtrip(d, n, sp); });
    plan.tasks.push_back([=] { return sweep_noise_semigroup(d, n, sp); });
    plan.tasks.push_back([=] { return sweep_parseval(d, n, sp); });
    plan.tasks.push_back([=] { return sweep_dirichlet(d, n, sp); });
    for (double p : {1.0, 1.25, 1.5, 1.75, 2.0}) plan.tasks.push_back([=] { return sweep_bonami_beckner(d, n, p, sp); });
  }
}

void plan_sobolev(const RunConfig& c, const SweepParams& sp, Plan& plan) {
  const int n = c.n.value_or(3);
  for (int d : dims(c, {1, 2, 3})) {
    for (double p : {1.1, 1.5, 1.9}) plan.tasks.push_back([=] { return sweep_phi_sobolev(d, n, p, sp); });
    plan.tasks.push_back([=] { return sweep_log_sobolev(d, n, sp); });
    plan.tasks.push_back([=] { return sweep_sobolev_limit(d, n, sp); });
    plan.tasks.push_back([=] { return sweep_p_variance(d, sp); });
  }
}

void plan_holevo(const RunConfig& c, const SweepParams& sp, Plan& plan, bool skip_out_of_class) {
  const std::vector<int> ds = dims(c, {1, 2, 3});
  for (int d : ds) {
    plan.tasks.push_back([=] { return sweep_holevo_dual_path(d, sp); });
    plan.tasks.push_back([=] { return sweep_average_state(d, sp); });
    for (const PhiFunction& phi : parsed_phis(c)) {
      if (!phi.in_entropy_class()) {
        if (skip_out_of_class) {
          plan.skipped.push_back("data-processing " + phi.descriptor() + ": outside the entropy class");
          plan.skipped.push_back("law-total-variance " + phi.descriptor() + ": outside the entropy class");
        }
        continue;
      }
      plan.tasks.push_back([=] { return sweep_data_processing(phi, d, sp); });
      plan.tasks.push_back([=] { return sweep_law_total_variance(phi, d, sp); });
    }
    if (d <= 2) {
      SweepParams eta_params = sp;
      eta_params.trials = std::max<std::int64_t>(2, sp.trials / 5);
      plan.tasks.push_back([=] { return sweep_eta_bounds(d, eta_params); });
    }
    if (d == 2) plan.tasks.push_back([=] { return sweep_functional_sdpi(d, sp); });
  }
}

void reject_out_of_class(const RunConfig& c, const std::string& suite) {
  for (const PhiFunction& phi : parsed_phis(c))
    if (!phi.in_entropy_class())
      throw ConfigError(phi.descriptor() + " is outside the entropy class; it is usable only in the characterizations suite (suite " + suite + ")");
}

auto sort_key(const CheckReport& r) { return std::tie(r.check, r.phi, r.d, r.n); }

}  // namespace

SuiteReport run_suite(const RunConfig& config, const std::string& suite) {
  config.validate();
  if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
    throw ConfigError("unknown suite \"" + suite + "\"");
  SweepParams sp{config.trials, config.seed, config.jobs, config.tol};
  Plan plan;
  const bool all = suite == "all";
  if (!all && suite != "characterizations" && suite != "gaussian") reject_out_of_class(config, suite);
  if (all || suite == "characterizations") plan_characterizations(config, sp, plan);
  if (all || suite == "efron-stein") plan_efron_stein(config, sp, plan);
  if (all || suite == "poincare") plan_poincare(config, sp, plan);
  if (all || suite == "gaussian") plan_gaussian(config, plan);
  if (all || suite == "fourier") plan_fourier(config, sp, plan);
  if (all || suite == "sobolev") plan_sobolev(config, sp, plan);
  if (all || suite == "holevo") plan_holevo(config, sp, plan, all);

  SuiteReport out;
  out.suite = suite;
  out.config = config.to_json();
  out.skipped = plan.skipped;
  for (const auto& task : plan.tasks) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckReport r;
    try {
      r = task();
    } catch (const std::exception& e) {
      r = CheckReport{};
      r.check = "error";
      r.pass = false;
      r.details = Json{{"error", e.what()}};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.check == "__gaussian_bundle") {
      const auto& parts = r.details.at("parts");
      for (const auto& part : parts)
        out.reports.push_back({check_report_from_json(part), secs / static_cast<double>(parts.size())});
      continue;
    }
    out.reports.push_back({std::move(r), secs});
  }
  std::stable_sort(out.reports.begin(), out.reports.end(),
                   [](const TimedReport& a, const TimedReport& b) { return sort_key(a.report) < sort_key(b.report); });
  out.pass = std::all_of(out.reports.begin(), out.reports.end(), [](const TimedReport& t) { return t.report.pass; });
  return out;
}

Json suite_to_json(const SuiteReport& r, bool with_timing) {
  Json reports = Json::array();
  Json timing = Json::array();
  for (const auto& t : r.reports) {
    reports.push_back(to_json(t.report));
    timing.push_back({{"check", t.report.check}, {"phi", t.report.phi}, {"d", t.report.d}, {"seconds", t.seconds}});
  }
  Json j{{"version", r.version}, {"suite", r.suite}, {"config", r.config}, {"pass", r.pass},
         {"reports", reports}, {"skipped", r.skipped}};
  if (with_timing) j["timing"] = timing;
  return j;
}

std::string suite_to_csv(const SuiteReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "check,phi,d,n,trials,max_gap,pass,seed\n";
  for (const auto& t : r.reports) {
    const CheckReport& c = t.report;
    os << '"' << c.check << "\"," << '"' << c.phi << "\"," << c.d << ',';
    if (c.n >= 0) os << c.n;
    os << ',' << c.trials << ',';
    if (c.trials > 0 && std::isfinite(c.max_gap)) os << c.max_gap;
    os << ',' << (c.pass ? "true" : "false") << ',' << c.seed << '\n';
  }
  return os.str();
}

// ---- instance generation ----------------------------------------------------------------------

const std::vector<std::string>& instance_kinds() {
  static const std::vector<std::string> kinds{"hermitian", "psd",           "ensemble",
                                              "kernel",    "boolean-function", "product-model"};
  return kinds;
}

Json law_to_json(const DiscreteRandomMatrix& z) {
  Json items = Json::array();
  for (std::size_t k = 0; k < z.size(); ++k) items.push_back({{"p", z.probs[k]}, {"z", matrix_to_json(z.values[k])}});
  return Json{{"d", z.dim()}, {"items", items}};
}

DiscreteRandomMatrix law_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("items")) throw ConfigError("law file needs \"items\"");
  DiscreteRandomMatrix z;
  for (const auto& it : j.at("items")) {
    z.probs.push_back(it.at("p").get<double>());
    z.values.push_back(matrix_from_json(it.at("z")));
  }
  z.validate(false);
  return z;
}

Json product_model_to_json(const ProductModel& m) {
  Json table = Json::array();
  for (const auto& v : m.table()) table.push_back(matrix_to_json(v));
  return Json{{"laws", m.laws()}, {"table", table}};
}

ProductModel product_model_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("laws") || !j.contains("table"))
    throw ConfigError("product model needs \"laws\" and \"table\"");
  std::vector<HermitianMatrix> table;
  for (const auto& m : j.at("table")) table.push_back(matrix_from_json(m));
  return ProductModel(j.at("laws").get<std::vector<std::vector<double>>>(), std::move(table));
}

Json generate_instance(const std::string& kind, const GenerateParams& gp, std::uint64_t seed) {
  if (gp.d < 1 || gp.n < 0 || gp.n > kMaxCubeDim || gp.size < 1 || gp.outputs < 1)
    throw ConfigError("instance parameters out of range");
  Rng rng = make_rng(seed, "generate/" + kind);
  if (kind == "hermitian") return matrix_to_json(random_hermitian(gp.d, rng));
  if (kind == "psd") return matrix_to_json(random_psd(gp.d, rng));
  if (kind == "ensemble") return ensemble_to_json(random_ensemble(gp.d, gp.size, rng));
  if (kind == "kernel") return kernel_to_json(random_kernel(gp.size, gp.outputs, rng));
  if (kind == "boolean-function") return function_to_json(random_boolean_function(gp.d, gp.n, rng));
  if (kind == "product-model") return product_model_to_json(random_product_model(gp.d, gp.n, gp.size, rng));
  throw ConfigError("unknown instance kind \"" + kind + "\"");
}

}  // namespace matphi
