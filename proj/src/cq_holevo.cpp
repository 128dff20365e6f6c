#include "matphi/cq_holevo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "matphi/parallel.hpp"

namespace matphi {

namespace {

constexpr double kLawTol = 1e-12;

void check_distribution(std::span<const double> p, const char* what) {
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw DomainError(std::string(what) + " has a negative entry");
    s += v;
  }
  if (std::abs(s - 1.0) > kLawTol) throw DomainError(std::string(what) + " does not sum to 1");
}

bool all_equal(std::span<const HermitianMatrix> f) {
  for (const auto& m : f)
    if (max_abs_entry(m.matrix() - f.front().matrix()) > tol_spec(m.dim())) return false;
  return true;
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Σμφ(v) − φ(Σμv) for φ = x log x.
double scalar_entropy(std::span<const double> mu, std::span<const double> v) {
  double avg = 0.0;
  double mean = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    avg += mu[k] * xlogx(v[k]);
    mean += mu[k] * v[k];
  }
  return avg - xlogx(mean);
}

// Functional x log x entropy of a table of diagonal matrices given as columns of `cols`
// (cols[k][x] = k-th diagonal entry of f(x)).
double diagonal_entropy(std::span<const double> mu, const std::vector<std::vector<double>>& cols) {
  const double tol = tol_spec(static_cast<int>(cols.size()));
  bool equal = true;
  for (const auto& c : cols)
    for (double v : c)
      if (std::abs(v - c.front()) > tol) equal = false;
  if (equal) return 0.0;
  double s = 0.0;
  for (const auto& c : cols) s += scalar_entropy(mu, c);
  return s / static_cast<double>(cols.size());
}

double enforce_contraction(double num, double den) {
  double r = num / den;
  if (r > 1.0 + 1e-9) {
    std::ostringstream os;
    os << "data processing violated: ratio " << r;
    throw std::logic_error(os.str());
  }
  return std::clamp(r, 0.0, 1.0);
}

}  // namespace

void CQEnsemble::validate(bool require_positive) const {
  if (states.empty() || mu.size() != states.size()) throw DimensionMismatch("ensemble needs matching mu and states");
  check_distribution(mu, "ensemble law");
  for (std::size_t x = 0; x < states.size(); ++x) {
    require_same_dim(states.front(), states[x], "ensemble states");
    if (require_positive && !(mu[x] > 0.0)) throw NotAdmissible("mu(" + std::to_string(x) + ") = 0");
    const double tol = tol_spec(dim());
    if (states[x].min_eigenvalue() < -tol) throw DomainError("state " + std::to_string(x) + " is not PSD");
    if (std::abs(trace(states[x]) - 1.0) > tol)
      throw DomainError("state " + std::to_string(x) + " does not have unit trace");
  }
}

HermitianMatrix CQEnsemble::average() const {
  HermitianMatrix s(dim());
  for (std::size_t x = 0; x < size(); ++x) s += mu[x] * states[x];
  return s;
}

void MarkovKernel::validate() const {
  if (rows.empty() || rows.front().empty()) throw DimensionMismatch("kernel needs at least one row and column");
  for (std::size_t x = 0; x < rows.size(); ++x) {
    if (rows[x].size() != outputs()) throw DimensionMismatch("kernel rows differ in length");
    check_distribution(rows[x], ("kernel row " + std::to_string(x)).c_str());
  }
}

MarkovKernel MarkovKernel::identity(std::size_t k) {
  MarkovKernel m{std::vector<std::vector<double>>(k, std::vector<double>(k, 0.0))};
  for (std::size_t i = 0; i < k; ++i) m.rows[i][i] = 1.0;
  return m;
}

MarkovKernel MarkovKernel::constant(std::size_t inputs, const std::vector<double>& q) {
  return {std::vector<std::vector<double>>(inputs, q)};
}

MarkovKernel MarkovKernel::binary_symmetric(double delta) {
  return {{{1.0 - delta, delta}, {delta, 1.0 - delta}}};
}

std::vector<double> kernel_push(std::span<const double> mu, const MarkovKernel& k) {
  k.validate();
  if (mu.size() != k.inputs()) throw DimensionMismatch("distribution and kernel input sizes differ");
  std::vector<double> out(k.outputs(), 0.0);
  for (std::size_t x = 0; x < mu.size(); ++x)
    for (std::size_t y = 0; y < out.size(); ++y) out[y] += mu[x] * k(x, y);
  return out;
}

MarkovKernel backward_channel(std::span<const double> mu, const MarkovKernel& k) {
  const std::vector<double> pushed = kernel_push(mu, k);
  std::ostringstream zeros;
  for (std::size_t x = 0; x < mu.size(); ++x)
    if (!(mu[x] > 0.0)) zeros << " mu(" << x << ")";
  for (std::size_t y = 0; y < pushed.size(); ++y)
    if (!(pushed[y] > 0.0)) zeros << " muK(" << y << ")";
  if (!zeros.str().empty()) throw NotAdmissible("zero entries:" + zeros.str());
  MarkovKernel back{std::vector<std::vector<double>>(pushed.size(), std::vector<double>(mu.size()))};
  for (std::size_t y = 0; y < pushed.size(); ++y)
    for (std::size_t x = 0; x < mu.size(); ++x) back.rows[y][x] = k(x, y) * mu[x] / pushed[y];
  return back;
}

std::vector<HermitianMatrix> backward_apply(const MarkovKernel& backward, std::span<const HermitianMatrix> f) {
  if (f.size() != backward.outputs()) throw DimensionMismatch("function table and backward kernel differ");
  std::vector<HermitianMatrix> out;
  out.reserve(backward.inputs());
  for (std::size_t y = 0; y < backward.inputs(); ++y) {
    HermitianMatrix s(f.front().dim());
    for (std::size_t x = 0; x < f.size(); ++x) s += backward(y, x) * f[x];
    out.push_back(std::move(s));
  }
  return out;
}

CQEnsemble evolve_ensemble(const CQEnsemble& ens, const MarkovKernel& k) {
  ens.validate(true);
  const MarkovKernel back = backward_channel(ens.mu, k);
  return {kernel_push(ens.mu, k), backward_apply(back, ens.states)};
}

double holevo_chi(const CQEnsemble& ens) {
  ens.validate();
  if (all_equal(ens.states)) return 0.0;
  const int d = ens.dim();
  const HermitianMatrix avg = ens.average();
  const Spectrum& s = avg.spectrum();
  double chi = 0.0;
  for (std::size_t x = 0; x < ens.size(); ++x) {
    if (ens.mu[x] == 0.0) continue;
    const CMatrix rot = s.vectors.adjoint() * ens.states[x].matrix() * s.vectors;
    double outside = 0.0;
    double cross = 0.0;
    for (int k = 0; k < d; ++k) {
      if (s.values(k) >= kSupportCutoff)
        cross += rot(k, k).real() * std::log(s.values(k));
      else
        outside += rot(k, k).real();
    }
    if (outside > tol_spec(d))
      throw SupportError("state " + std::to_string(x) + " leaves the support of the average state");
    double self = 0.0;
    const auto& ev = ens.states[x].spectrum().values;
    for (Eigen::Index k = 0; k < ev.size(); ++k) self += xlogx(ev(k));
    chi += ens.mu[x] * (self - cross);
  }
  return chi;
}

double functional_entropy(const PhiFunction& phi, std::span<const double> mu, std::span<const HermitianMatrix> f) {
  if (f.empty() || mu.size() != f.size()) throw DimensionMismatch("law and table differ in length");
  if (all_equal(f)) return 0.0;
  return phi_entropy(phi, mu, f);
}

namespace {

// Ratio evaluation that rejects candidates whose denominator d·H(f; μ) is at most `floor`.
std::optional<double> ratio_above(std::span<const double> mu, const MarkovKernel& k,
                                  std::span<const HermitianMatrix> f, double floor) {
  const PhiFunction phi = PhiFunction::xlogx();
  const double den = functional_entropy(phi, mu, f);
  if (f.front().dim() * den <= floor) return std::nullopt;
  const MarkovKernel back = backward_channel(mu, k);
  const std::vector<double> pushed = kernel_push(mu, k);
  const double num = functional_entropy(phi, pushed, backward_apply(back, f));
  return enforce_contraction(num, den);
}

// Near ν = μ the entropy difference cancels to roundoff; the climber stays where the ratio is
// accurate to about 1e-10.
constexpr double kClimbFloor = 1e-6;

}  // namespace

std::optional<double> eta_ratio(std::span<const double> mu, const MarkovKernel& k,
                                std::span<const HermitianMatrix> f) {
  return ratio_above(mu, k, f, kChiFloor);
}

double classical_sdpi_ratio(std::span<const double> nu, std::span<const double> mu, const MarkovKernel& k) {
  auto kl = [](std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] > 0.0) s += p[i] * std::log(p[i] / q[i]);
    return s;
  };
  const auto nk = kernel_push(nu, k);
  const auto mk = kernel_push(mu, k);
  return kl(nk, mk) / kl(nu, mu);
}

namespace {

struct Candidate {
  double ratio = -kInf;
  std::vector<HermitianMatrix> f;
};

// Diagonal grid: d = 1 uses positive scalars {step, …, 1}; d = 2 uses states diag(a, 1 − a).
Candidate grid_search(std::span<const double> mu, const MarkovKernel& k, const EtaOptions& opt,
                      std::int64_t& evaluations) {
  const std::size_t nx = mu.size();
  const int d = opt.d;
  std::vector<double> levels;
  const int steps = static_cast<int>(std::lround(1.0 / opt.grid_step));
  for (int i = (d == 1 ? 1 : 0); i <= steps; ++i) levels.push_back(i * opt.grid_step);
  const MarkovKernel back = backward_channel(mu, k);
  const std::vector<double> pushed = kernel_push(mu, k);
  const std::size_t ny = pushed.size();

  std::vector<std::size_t> idx(nx, 0);
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(d), std::vector<double>(nx));
  std::vector<std::vector<double>> out_cols(static_cast<std::size_t>(d), std::vector<double>(ny));
  Candidate best;
  std::vector<std::size_t> best_idx;
  while (true) {
    for (std::size_t x = 0; x < nx; ++x) {
      const double a = levels[idx[x]];
      cols[0][x] = a;
      if (d == 2) cols[1][x] = 1.0 - a;
    }
    ++evaluations;
    const double den = diagonal_entropy(mu, cols);
    if (d * den > kChiFloor) {
      for (int c = 0; c < d; ++c)
        for (std::size_t y = 0; y < ny; ++y) {
          double s = 0.0;
          for (std::size_t x = 0; x < nx; ++x) s += back(y, x) * cols[static_cast<std::size_t>(c)][x];
          out_cols[static_cast<std::size_t>(c)][y] = s;
        }
      const double r = enforce_contraction(diagonal_entropy(pushed, out_cols), den);
      if (r > best.ratio) {
        best.ratio = r;
        best_idx = idx;
      }
    }
    std::size_t pos = 0;
    while (pos < nx && ++idx[pos] == levels.size()) idx[pos++] = 0;
    if (pos == nx) break;
  }
  if (!best_idx.empty())
    for (std::size_t x = 0; x < nx; ++x) {
      const double a = levels[best_idx[x]];
      best.f.push_back(d == 1 ? HermitianMatrix::scalar(a) : HermitianMatrix::diagonal({a, 1.0 - a}));
    }
  return best;
}

Candidate hill_climb(std::span<const double> mu, const MarkovKernel& k, const EtaOptions& opt, Rng& rng) {
  const std::size_t nx = mu.size();
  const int d = opt.d;
  std::vector<CMatrix> params(nx);
  for (auto& g : params) {
    g.resize(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) g(a, b) = d == 1 ? Complex(rng.normal(), 0.0) : rng.complex_normal();
  }
  auto state_of = [d](const CMatrix& g) {
    if (d == 1) return HermitianMatrix::scalar(std::exp(g(0, 0).real()));
    const CMatrix r = g * g.adjoint();
    return HermitianMatrix::symmetrized(r / r.trace().real());
  };
  std::vector<HermitianMatrix> f;
  for (const auto& g : params) f.push_back(state_of(g));
  auto score = [&](const std::vector<HermitianMatrix>& v) {
    return ratio_above(mu, k, v, kClimbFloor).value_or(-kInf);
  };
  Candidate best{score(f), f};
  double step = 0.1;
  for (int s = 0; s < opt.steps; ++s) {
    const auto x = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(nx) - 1));
    const CMatrix old = params[x];
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        params[x](a, b) += step * (d == 1 ? Complex(rng.normal(), 0.0) : rng.complex_normal());
    f[x] = state_of(params[x]);
    const double r = score(f);
    if (r > best.ratio) {
      best = {r, f};
      step = std::min(step * 1.5, 1.0);
    } else {
      params[x] = old;
      f[x] = state_of(old);
      step *= 0.5;
      if (step < 1e-6) step = 0.1;
    }
  }
  return best;
}

}  // namespace

EtaResult eta_phi(std::span<const double> mu, const MarkovKernel& k, const EtaOptions& opt) {
  if (opt.d < 1) throw DimensionMismatch("state dimension must be positive");
  backward_channel(mu, k);  // admissibility
  EtaResult res;
  Candidate best;
  std::vector<std::string> methods;
  const bool grid_ok = opt.grid && opt.d <= 2 && mu.size() <= 4;
  if (grid_ok) {
    best = grid_search(mu, k, opt, res.evaluations);
    methods.push_back("diagonal-grid");
  }
  if (opt.restarts > 0) {
    std::vector<Candidate> climbs(static_cast<std::size_t>(opt.restarts));
    parallel_for(opt.restarts, opt.jobs, [&](std::int64_t r) {
      Rng rng = make_rng(opt.seed, "eta-search", static_cast<std::uint64_t>(r));
      climbs[static_cast<std::size_t>(r)] = hill_climb(mu, k, opt, rng);
    });
    res.evaluations += static_cast<std::int64_t>(opt.restarts) * (opt.steps + 1);
    for (auto& c : climbs)
      if (c.ratio > best.ratio) best = std::move(c);
    methods.push_back("hill-climb");
  }
  std::string joined;
  for (const auto& m : methods) joined += (joined.empty() ? "" : "+") + m;
  res.method = (opt.d == 1 ? "functional:" : "states:") + joined;
  if (best.f.empty()) return res;  // every candidate was degenerate
  res.witness = best.f;
  res.eta_hat = eta_ratio(mu, k, best.f).value_or(0.0);
  return res;
}

CheckReport check_data_processing(const CQEnsemble& ens, const MarkovKernel& k, const PhiFunction& phi,
                                  double rel) {
  ens.validate(true);
  const MarkovKernel back = backward_channel(ens.mu, k);
  const std::vector<double> pushed = kernel_push(ens.mu, k);
  const double before = functional_entropy(phi, ens.mu, ens.states);
  const double after = functional_entropy(phi, pushed, backward_apply(back, ens.states));
  CheckReport r;
  r.check = "data-processing";
  r.phi = phi.descriptor();
  r.d = ens.dim();
  r.details = Json{{"before", before}, {"after", after}};
  if (phi.kind() == PhiFunction::Kind::xlogx) {
    r.details["chi_before"] = holevo_chi(ens);
    r.details["chi_after"] = holevo_chi(evolve_ensemble(ens, k));
  }
  TrialOutcome o{after - before, rel_tol(rel, before, after), Json()};
  if (!o.holds()) o.witness = r.details;
  r.record(o);
  return r;
}

CheckReport check_law_total_variance(const PhiFunction& phi, const std::vector<JointAtom>& atoms, double tol) {
  if (atoms.empty()) throw DimensionMismatch("joint law has no atoms");
  std::vector<double> p;
  std::vector<HermitianMatrix> z;
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    p.push_back(atoms[a].p);
    z.push_back(atoms[a].z);
    groups[atoms[a].y].push_back(a);
  }
  check_distribution(p, "joint law");
  const double total = phi_entropy(phi, p, z);
  double within = 0.0;
  std::vector<double> py;
  std::vector<HermitianMatrix> means;
  for (const auto& [y, members] : groups) {
    double mass = 0.0;
    for (auto a : members) mass += atoms[a].p;
    if (mass == 0.0) continue;
    std::vector<double> cp;
    std::vector<HermitianMatrix> cz;
    HermitianMatrix m(z.front().dim());
    for (auto a : members) {
      cp.push_back(atoms[a].p / mass);
      cz.push_back(atoms[a].z);
      m += cp.back() * atoms[a].z;
    }
    within += mass * phi_entropy(phi, cp, cz);
    py.push_back(mass);
    means.push_back(m);
  }
  const double between = phi_entropy(phi, py, means);
  CheckReport r;
  r.check = "law-total-variance";
  r.phi = phi.descriptor();
  r.d = z.front().dim();
  r.details = Json{{"total", total}, {"within", within}, {"between", between}};
  const double dev = std::abs(total - within - between);
  TrialOutcome o{dev, tol * (1.0 + std::abs(total)), Json()};
  if (!o.holds()) o.witness = r.details;
  r.record(o);
  return r;
}

CheckReport check_functional_sdpi(std::span<const double> mu, const MarkovKernel& k,
                                  std::span<const HermitianMatrix> f, double c, const PhiFunction& phi,
                                  double rel) {
  if (!(c >= 0.0 && c < 1.0)) throw InvalidC("c must lie in [0, 1)");
  if (f.size() != mu.size()) throw DimensionMismatch("function table and law differ in length");
  const MarkovKernel back = backward_channel(mu, k);
  const std::vector<double> pushed = kernel_push(mu, k);
  const double h = functional_entropy(phi, mu, f);
  const double contracted = functional_entropy(phi, pushed, backward_apply(back, f));
  // 𝔼_Y H_Φ(f(X) | Y) with X | Y = y distributed as K*(· | y).
  double conditional = 0.0;
  for (std::size_t y = 0; y < pushed.size(); ++y) conditional += pushed[y] * functional_entropy(phi, back.rows[y], f);
  const double bound = conditional / (1.0 - c);
  CheckReport r;
  r.check = "functional-sdpi";
  r.phi = phi.descriptor();
  r.d = f.front().dim();
  r.details = Json{{"c", c},
                   {"entropy", h},
                   {"conditional_entropy", conditional},
                   {"bound", bound},
                   {"contracted", contracted},
                   {"contraction_bound", c * h}};
  const TrialOutcome functional{h - bound, rel_tol(rel, h, bound), Json()};
  const TrialOutcome chain{contracted - c * h, rel_tol(rel, contracted, c * h), Json()};
  const bool ok = functional.holds() && chain.holds();
  r.details["functional_holds"] = functional.holds();
  r.details["contraction_holds"] = chain.holds();
  TrialOutcome o{std::max(functional.gap - functional.tol, chain.gap - chain.tol), 0.0, Json()};
  if (!ok) o.witness = r.details;
  r.record(o);
  return r;
}

Json ensemble_to_json(const CQEnsemble& ens) {
  Json items = Json::array();
  for (std::size_t x = 0; x < ens.size(); ++x) items.push_back({{"p", ens.mu[x]}, {"rho", matrix_to_json(ens.states[x])}});
  return Json{{"d", ens.dim()}, {"items", items}};
}

CQEnsemble ensemble_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("d") || !j.contains("items"))
    throw ConfigError("ensemble file needs \"d\" and \"items\"");
  CQEnsemble ens;
  const int d = j.at("d").get<int>();
  for (const auto& it : j.at("items")) {
    ens.mu.push_back(it.at("p").get<double>());
    ens.states.push_back(matrix_from_json(it.at("rho")));
    if (ens.states.back().dim() != d) throw ConfigError("ensemble state has the wrong dimension");
  }
  if (ens.states.empty()) throw ConfigError("ensemble has no items");
  ens.validate();
  return ens;
}

Json kernel_to_json(const MarkovKernel& k) { return Json{{"rows", k.rows}}; }

MarkovKernel kernel_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("rows")) throw ConfigError("kernel file needs \"rows\"");
  MarkovKernel k{j.at("rows").get<std::vector<std::vector<double>>>()};
  k.validate();
  return k;
}

}  // namespace matphi
