#include "matphi/boolean_fourier.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "matphi/concentration.hpp"
#include "matphi/parallel.hpp"

namespace matphi {

namespace {

void check_cube(int n) {
  if (n < 0 || n > kMaxCubeDim)
    throw DimensionMismatch("cube dimension must lie in [0, " + std::to_string(kMaxCubeDim) + "]");
}

// In-place butterflies over the index bits; `scale` multiplies the result.
std::vector<CMatrix> walsh_hadamard(std::vector<CMatrix> a, double scale) {
  for (std::size_t h = 1; h < a.size(); h <<= 1)
    for (std::size_t i = 0; i < a.size(); i += h << 1)
      for (std::size_t j = i; j < i + h; ++j) {
        CMatrix u = a[j];
        a[j] += a[j + h];
        a[j + h] = u - a[j + h];
      }
  for (auto& m : a) m *= scale;
  return a;
}

std::vector<CMatrix> raw(const std::vector<HermitianMatrix>& v) {
  std::vector<CMatrix> out;
  out.reserve(v.size());
  for (const auto& m : v) out.push_back(m.matrix());
  return out;
}

std::vector<HermitianMatrix> cooked(const std::vector<CMatrix>& v) {
  std::vector<HermitianMatrix> out;
  out.reserve(v.size());
  for (const auto& m : v) out.push_back(HermitianMatrix::symmetrized(m));
  return out;
}

HermitianMatrix mean_of(const std::vector<HermitianMatrix>& v, int d) {
  HermitianMatrix s(d);
  for (const auto& m : v) s += m;
  return (1.0 / static_cast<double>(v.size())) * s;
}

double mean_tr_square(const MatrixBooleanFunction& f) {
  double s = 0.0;
  for (const auto& m : f.table) s += m.matrix().squaredNorm();
  return s / (static_cast<double>(f.size()) * f.d);
}

HermitianMatrix psd_power(const HermitianMatrix& a, double q) {
  return apply_standard_function([q](double x) { return std::pow(x, q); }, a, SpectralInterval::nonnegative());
}

TrialOutcome inequality(double lhs, double rhs, double rel, const Json& details) {
  TrialOutcome o{lhs - rhs, rel_tol(rel, lhs, rhs), Json()};
  if (!o.holds()) o.witness = details;
  return o;
}

CheckReport single_report(const std::string& name, const MatrixBooleanFunction& f, const TrialOutcome& o,
                          Json details) {
  CheckReport r;
  r.check = name;
  r.d = f.d;
  r.n = f.n;
  r.details = std::move(details);
  r.record(o);
  return r;
}

}  // namespace

void MatrixBooleanFunction::validate(bool require_psd) const {
  check_cube(n);
  if (table.size() != (std::size_t{1} << n)) throw DimensionMismatch("table must have 2^n entries");
  for (const auto& m : table) {
    if (m.dim() != d) throw DimensionMismatch("table entry has the wrong dimension");
    if (require_psd && m.min_eigenvalue() < -tol_spec(d))
      throw DomainError("function value is not positive semidefinite");
  }
}

MatrixBooleanFunction MatrixBooleanFunction::constant(int n, const HermitianMatrix& c) {
  check_cube(n);
  return {n, c.dim(), std::vector<HermitianMatrix>(std::size_t{1} << n, c)};
}

FourierTable fourier_transform(const MatrixBooleanFunction& f) {
  f.validate(false);
  return {f.n, f.d, cooked(walsh_hadamard(raw(f.table), 1.0 / static_cast<double>(f.size())))};
}

MatrixBooleanFunction inverse_fourier(const FourierTable& t) {
  check_cube(t.n);
  if (t.coeffs.size() != (std::size_t{1} << t.n)) throw DimensionMismatch("table must have 2^n coefficients");
  return {t.n, t.d, cooked(walsh_hadamard(raw(t.coeffs), 1.0))};
}

FourierTable noise_operator(const FourierTable& t, double gamma) {
  FourierTable out = t;
  for (std::size_t s = 0; s < out.coeffs.size(); ++s)
    out.coeffs[s] *= std::pow(gamma, std::popcount(s));
  return out;
}

CheckReport parseval_check(const MatrixBooleanFunction& f) {
  const FourierTable t = fourier_transform(f);
  CMatrix lhs = CMatrix::Zero(f.d, f.d);
  for (const auto& m : f.table) lhs += m.matrix() * m.matrix();
  lhs /= static_cast<double>(f.size());
  CMatrix rhs = CMatrix::Zero(f.d, f.d);
  for (const auto& c : t.coeffs) rhs += c.matrix() * c.matrix();
  const double dev = max_abs_entry(lhs - rhs);
  TrialOutcome o{dev, 1e-10 * (1.0 + max_abs_entry(lhs)), Json()};
  if (!o.holds()) o.witness = Json{{"max_entry_deviation", dev}};
  return single_report("parseval", f, o, Json{{"max_entry_deviation", dev}});
}

double DirichletForms::discrepancy() const {
  return std::max({std::abs(spectral - flip), std::abs(spectral - efron_stein), std::abs(flip - efron_stein)});
}

ProductModel uniform_cube_model(const MatrixBooleanFunction& f) {
  f.validate(false);
  return ProductModel(std::vector<std::vector<double>>(static_cast<std::size_t>(f.n), {0.5, 0.5}), f.table);
}

DirichletForms dirichlet_forms(const MatrixBooleanFunction& f) {
  DirichletForms forms;
  const FourierTable t = fourier_transform(f);
  for (std::size_t s = 0; s < t.coeffs.size(); ++s)
    forms.spectral += std::popcount(s) * t.coeffs[s].matrix().squaredNorm() / f.d;
  for (int i = 0; i < f.n; ++i)
    for (std::size_t x = 0; x < f.size(); ++x) {
      const CMatrix g = 0.5 * (f.table[x].matrix() - f.table[x ^ (std::size_t{1} << i)].matrix());
      forms.flip += g.squaredNorm() / f.d;
    }
  forms.flip /= static_cast<double>(f.size());
  forms.efron_stein = f.n == 0 ? 0.0 : efron_stein_quantity(uniform_cube_model(f));
  return forms;
}

double dirichlet_energy(const MatrixBooleanFunction& f) {
  const DirichletForms forms = dirichlet_forms(f);
  if (forms.discrepancy() > 1e-10 * (1.0 + std::abs(forms.spectral)))
    throw std::logic_error("Dirichlet energy forms disagree");
  return forms.spectral;
}

CheckReport check_bonami_beckner(const MatrixBooleanFunction& f, double p, double rel) {
  if (!(p >= 1.0 && p <= 2.0)) throw InvalidExponent("p must lie in [1, 2]");
  const FourierTable t = fourier_transform(f);
  double lhs = 0.0;
  for (std::size_t s = 0; s < t.coeffs.size(); ++s) {
    const double nrm = schatten_norm(t.coeffs[s], p, true);
    lhs += std::pow(p - 1.0, std::popcount(s)) * nrm * nrm;
  }
  lhs = std::sqrt(lhs);
  double rhs = 0.0;
  for (const auto& m : f.table) rhs += std::pow(schatten_norm(m, p, true), p);
  rhs = std::pow(rhs / static_cast<double>(f.size()), 1.0 / p);
  const Json details{{"p", p}, {"lhs", lhs}, {"rhs", rhs}};
  return single_report("bonami-beckner", f, inequality(lhs, rhs, rel, details), details);
}

namespace {

struct SobolevSides {
  double lhs = 0.0;
  double rhs = 0.0;
};

SobolevSides sobolev_sides(const MatrixBooleanFunction& f, double p) {
  f.validate(true);
  const double second = mean_tr_square(f);
  std::vector<HermitianMatrix> powers;
  powers.reserve(f.size());
  for (const auto& m : f.table) powers.push_back(psd_power(m, p));
  const double lhs = second - normalized_trace(psd_power(mean_of(powers, f.d), 2.0 / p));
  const double factor = std::pow(static_cast<double>(f.d), 1.0 - 2.0 / p);
  const double energy = dirichlet_energy(f);
  return {lhs, (2.0 - p) * energy * factor + second * (1.0 - factor)};
}

}  // namespace

double sobolev_slack(const MatrixBooleanFunction& f, double p) {
  const SobolevSides s = sobolev_sides(f, p);
  return s.rhs - s.lhs;
}

CheckReport check_phi_sobolev(const MatrixBooleanFunction& f, double p, double rel) {
  if (!(p > 1.0 && p < 2.0)) throw InvalidExponent("p must lie in (1, 2)");
  const SobolevSides s = sobolev_sides(f, p);
  const Json details{{"p", p}, {"lhs", s.lhs}, {"rhs", s.rhs}};
  return single_report("phi-sobolev", f, inequality(s.lhs, s.rhs, rel, details), details);
}

double entropy_of_square(const MatrixBooleanFunction& f) {
  f.validate(true);
  std::vector<HermitianMatrix> squares;
  squares.reserve(f.size());
  double first = 0.0;
  for (const auto& m : f.table) {
    squares.push_back(square(m));
    first += trace_xlogx(squares.back());
  }
  first /= static_cast<double>(f.size()) * f.d;
  return first - trace_xlogx(mean_of(squares, f.d)) / f.d;
}

double log_sobolev_slack(const MatrixBooleanFunction& f) {
  return 2.0 * dirichlet_energy(f) + std::log(static_cast<double>(f.d)) * mean_tr_square(f) -
         entropy_of_square(f);
}

CheckReport check_log_sobolev(const MatrixBooleanFunction& f, double rel) {
  const double ent = entropy_of_square(f);
  const double energy = dirichlet_energy(f);
  const double rhs = 2.0 * energy + std::log(static_cast<double>(f.d)) * mean_tr_square(f);
  const Json details{{"ent", ent}, {"energy", energy}, {"rhs", rhs}, {"gap", rhs - ent}};
  return single_report("log-sobolev", f, inequality(ent, rhs, rel, details), details);
}

HermitianMatrix p_variance(const DiscreteRandomMatrix& z, double p) {
  const int d = z.dim();
  HermitianMatrix second(d), pw(d);
  for (std::size_t k = 0; k < z.size(); ++k) {
    second += z.probs[k] * square(z.values[k]);
    pw += z.probs[k] * psd_power(z.values[k], p);
  }
  return second - psd_power(pw, 2.0 / p);
}

HermitianMatrix p_variance_limit(const DiscreteRandomMatrix& z) {
  const int d = z.dim();
  const auto xlogx = [](double x) { return x > 1e-14 ? x * std::log(x) : 0.0; };
  HermitianMatrix ent(d), second(d);
  for (std::size_t k = 0; k < z.size(); ++k) {
    const HermitianMatrix sq = square(z.values[k]);
    second += z.probs[k] * sq;
    ent += z.probs[k] * apply_standard_function(xlogx, sq, SpectralInterval::nonnegative());
  }
  // ½𝔼Z² log 𝔼Z²: 𝔼Z² commutes with its own logarithm.
  return 0.5 * (ent - apply_standard_function(xlogx, second, SpectralInterval::nonnegative()));
}

CheckReport check_p_variance_limit(const DiscreteRandomMatrix& z, double tol) {
  z.validate(true);
  for (const auto& v : z.values)
    if (v.min_eigenvalue() <= 0.0) throw DomainError("support values must be positive definite");
  const std::array<double, 3> ps{1.9, 1.99, 1.999};
  std::array<HermitianMatrix, 3> g;
  for (std::size_t k = 0; k < ps.size(); ++k) g[k] = (1.0 / (2.0 - ps[k])) * p_variance(z, ps[k]);
  const HermitianMatrix limit = p_variance_limit(z);
  const double e1 = 2.0 - ps[1];
  const double e2 = 2.0 - ps[2];
  const HermitianMatrix extrapolated = (1.0 / (e1 - e2)) * (e1 * g[2] - e2 * g[1]);
  const double deviation = operator_norm(extrapolated - limit);
  std::array<double, 3> residuals{};
  for (std::size_t k = 0; k < ps.size(); ++k) residuals[k] = operator_norm(g[k] - limit);
  // Each tenfold step toward 2 should shrink the residual about tenfold; allow a factor 2.5 and a
  // roundoff floor.
  const double floor = 1e-9 * (1.0 + operator_norm(limit));
  bool linear = true;
  for (std::size_t k = 1; k < ps.size(); ++k)
    if (residuals[k] > 0.25 * residuals[k - 1] + floor) linear = false;
  CheckReport r;
  r.check = "p-variance-limit";
  r.d = z.dim();
  r.details = Json{{"deviation", deviation},
                   {"residuals", residuals},
                   {"p_grid", ps},
                   {"residuals_linear", linear},
                   {"limit", matrix_to_json(limit)}};
  TrialOutcome o{linear ? deviation : kInf, tol, Json()};
  if (!o.holds()) o.witness = r.details;
  r.record(o);
  return r;
}

namespace {

struct LsiValues {
  double second = 0.0;
  double ent = 0.0;
  double energy = 0.0;
};

double xlogx_sum_of_squares(const RVector& eig) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < eig.size(); ++k) {
    const double x = eig(k) * eig(k);
    if (x > 1e-14) s += x * std::log(x);
  }
  return s;
}

// Direct evaluation on raw matrices; used in the inner search loop.
LsiValues lsi_values(const std::vector<CMatrix>& f, int n, int d) {
  LsiValues v;
  const auto count = static_cast<double>(f.size());
  CMatrix mean_sq = CMatrix::Zero(d, d);
  Eigen::SelfAdjointEigenSolver<CMatrix> es;
  for (const auto& m : f) {
    v.second += m.squaredNorm();
    mean_sq += m * m;
    es.compute(m, Eigen::EigenvaluesOnly);
    v.ent += xlogx_sum_of_squares(es.eigenvalues());
  }
  mean_sq /= count;
  es.compute(0.5 * (mean_sq + mean_sq.adjoint()), Eigen::EigenvaluesOnly);
  RVector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  v.ent = v.ent / (count * d) - xlogx_sum_of_squares(roots) / d;
  v.second /= count * d;
  for (int i = 0; i < n; ++i)
    for (std::size_t x = 0; x < f.size(); ++x)
      v.energy += (0.5 * (f[x] - f[x ^ (std::size_t{1} << i)])).squaredNorm();
  v.energy /= count * d;
  return v;
}

double normalized_objective(const LsiValues& v) {
  return v.second > 0.0 ? (v.ent - 2.0 * v.energy) / v.second : 0.0;
}

struct RestartResult {
  double objective = -kInf;
  std::vector<CMatrix> f;
};

RestartResult lsi_restart(const LsiSearchOptions& opt, Rng& rng) {
  const std::size_t points = std::size_t{1} << opt.n;
  const int d = opt.d;
  auto random_g = [&] {
    CMatrix g(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) g(a, b) = rng.complex_normal();
    return g;
  };
  std::vector<CMatrix> gs(points);
  for (auto& g : gs) g = random_g();
  auto values_of = [&](const std::vector<CMatrix>& gv) {
    std::vector<CMatrix> f(points);
    for (std::size_t x = 0; x < points; ++x) f[x] = gv[x].adjoint() * gv[x];
    return f;
  };
  std::vector<CMatrix> f = values_of(gs);
  double best = normalized_objective(lsi_values(f, opt.n, d));
  double step = opt.initial_step;
  for (int s = 0; s < opt.steps; ++s) {
    const auto x = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(points) - 1));
    CMatrix old = gs[x];
    const double scale = step * (1.0 + std::sqrt(old.squaredNorm() / d));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) gs[x](a, b) += scale * rng.complex_normal();
    const CMatrix old_f = f[x];
    f[x] = gs[x].adjoint() * gs[x];
    const double obj = normalized_objective(lsi_values(f, opt.n, d));
    if (obj > best) {
      best = obj;
      step = std::min(step * 1.5, 1.0);
    } else {
      gs[x] = old;
      f[x] = old_f;
      step *= 0.5;
      if (step < 1e-6) step = opt.initial_step;
    }
  }
  return {best, f};
}

}  // namespace

LsiSearchResult search_lsi_counterexample(const LsiSearchOptions& opt) {
  if (opt.d < 1) throw DimensionMismatch("d must be positive");
  check_cube(opt.n);
  if (opt.restarts < 1) throw ConfigError("restarts must be positive");
  std::vector<RestartResult> results(static_cast<std::size_t>(opt.restarts));
  parallel_for(opt.restarts, opt.jobs, [&](std::int64_t r) {
    Rng rng = make_rng(opt.seed, "lsi-search", static_cast<std::uint64_t>(r));
    results[static_cast<std::size_t>(r)] = lsi_restart(opt, rng);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r)
    if (results[r].objective > results[best].objective) best = r;

  LsiSearchResult out;
  out.best_restart = static_cast<int>(best);
  std::vector<CMatrix> raw_f = results[best].f;
  const LsiValues v = lsi_values(raw_f, opt.n, opt.d);
  const double scale = v.second > 0 ? 1.0 / std::sqrt(v.second) : 1.0;
  out.f = {opt.n, opt.d, {}};
  for (auto& m : raw_f) out.f.table.push_back(HermitianMatrix::symmetrized(scale * m));
  // Re-evaluate through the general-purpose entropy and Fourier paths.
  out.ent = entropy_of_square(out.f);
  out.energy = dirichlet_energy(out.f);
  out.objective = out.ent - 2.0 * out.energy;
  const double fast = normalized_objective(v);
  out.verified = std::abs(out.objective - fast) <= 1e-9 * (1.0 + std::abs(fast));
  out.found = out.verified && out.objective > kLsiFoundThreshold;
  return out;
}

Json function_to_json(const MatrixBooleanFunction& f) {
  f.validate(false);
  Json points = Json::array();
  for (std::size_t x = 0; x < f.size(); ++x) {
    std::string bits(static_cast<std::size_t>(f.n), '0');
    for (int i = 0; i < f.n; ++i)
      if ((x >> i) & 1U) bits[static_cast<std::size_t>(i)] = '1';
    Json p{{"x", bits}};
    const Json m = matrix_to_json(f.table[x]);
    for (const auto& [k, v] : m.items()) p[k] = v;
    points.push_back(p);
  }
  return Json{{"n", f.n}, {"d", f.d}, {"points", points}};
}

MatrixBooleanFunction function_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("d") || !j.contains("points"))
    throw ConfigError("function file needs \"n\", \"d\" and \"points\"");
  MatrixBooleanFunction f;
  f.n = j.at("n").get<int>();
  f.d = j.at("d").get<int>();
  if (f.n < 0 || f.n > kMaxCubeDim) throw ConfigError("n out of range");
  if (f.d < 1) throw ConfigError("d must be positive");
  const std::size_t size = std::size_t{1} << f.n;
  std::vector<std::optional<HermitianMatrix>> slots(size);
  for (const auto& p : j.at("points")) {
    const auto bits = p.at("x").get<std::string>();
    if (bits.size() != static_cast<std::size_t>(f.n)) throw ConfigError("bitstring \"" + bits + "\" has wrong length");
    std::size_t x = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] != '0' && bits[i] != '1') throw ConfigError("bitstring \"" + bits + "\" is not binary");
      if (bits[i] == '1') x |= std::size_t{1} << i;
    }
    if (slots[x]) throw ConfigError("duplicate point " + bits);
    HermitianMatrix m = matrix_from_json(p);
    if (m.dim() != f.d) throw ConfigError("point " + bits + " has the wrong dimension");
    slots[x] = std::move(m);
  }
  for (std::size_t x = 0; x < size; ++x) {
    if (!slots[x]) throw ConfigError("missing point " + std::to_string(x) + " (function must be total)");
    f.table.push_back(*slots[x]);
  }
  return f;
}

}  // namespace matphi
