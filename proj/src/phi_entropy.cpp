#include "matphi/phi_entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace matphi {

namespace {

void check_law(const std::vector<double>& p, const char* what) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) throw DomainError(std::string(what) + ": negative probability");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream os;
    os << what << ": probabilities sum to " << sum;
    throw DomainError(os.str());
  }
}

double clamp_to_domain(const SpectralInterval& dom, double x, int d) {
  if (dom.contains(x)) return x;
  const double slack = tol_spec(d);
  if (!dom.lo_open && x < dom.lo && x >= dom.lo - slack) return dom.lo;
  if (!dom.hi_open && x > dom.hi && x <= dom.hi + slack) return dom.hi;
  std::ostringstream os;
  os << "eigenvalue " << x << " outside the domain of phi";
  throw DomainError(os.str());
}

HermitianMatrix apply_phi_derivative(const PhiFunction& phi, int k, const HermitianMatrix& z) {
  const auto& s = z.spectrum();
  const auto dom = k == 0 ? phi.domain() : phi.psi().domain;
  RVector v(s.values.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = phi.derivative(k, clamp_to_domain(dom, s.values(i), z.dim()));
  return HermitianMatrix::from_spectrum(v, s.vectors);
}

// tr(XY) for Hermitian X, Y.
double normalized_hs(const HermitianMatrix& x, const HermitianMatrix& y) {
  return hs_inner(x, y) / x.dim();
}

Json pair_witness(const HermitianMatrix& a, const HermitianMatrix& b) {
  return Json{{"A", matrix_to_json(a)}, {"B", matrix_to_json(b)}};
}

}  // namespace

HermitianMatrix DiscreteRandomMatrix::mean() const {
  if (values.empty()) throw DimensionMismatch("empty law");
  HermitianMatrix m(dim());
  for (std::size_t k = 0; k < values.size(); ++k) m += probs[k] * values[k];
  return m;
}

void DiscreteRandomMatrix::validate(bool require_psd) const {
  if (values.empty() || probs.size() != values.size())
    throw DimensionMismatch("law needs matching, nonempty probs and values");
  check_law(probs, "random matrix");
  for (const auto& v : values) {
    require_same_dim(values.front(), v, "random matrix support");
    if (require_psd && v.min_eigenvalue() < -tol_spec(v.dim()))
      throw DomainError("support value is not positive semidefinite");
  }
}

std::size_t ProductModel::enumeration_size(const std::vector<std::vector<double>>& laws) {
  std::size_t total = 1;
  for (const auto& l : laws) {
    if (l.empty()) throw DimensionMismatch("input law with empty support");
    if (total > kMaxEnumeration / l.size())
      throw EnumerationTooLarge("product space exceeds " + std::to_string(kMaxEnumeration));
    total *= l.size();
  }
  return total;
}

ProductModel::ProductModel(std::vector<std::vector<double>> laws, std::vector<HermitianMatrix> table)
    : laws_(std::move(laws)), table_(std::move(table)) {
  const std::size_t total = enumeration_size(laws_);
  if (table_.size() != total)
    throw DimensionMismatch("table has " + std::to_string(table_.size()) + " entries, expected " +
                            std::to_string(total));
  for (const auto& l : laws_) check_law(l, "input law");
  for (const auto& v : table_) require_same_dim(table_.front(), v, "product model table");
  strides_.resize(laws_.size());
  std::size_t s = 1;
  for (std::size_t i = 0; i < laws_.size(); ++i) {
    strides_[i] = s;
    s *= laws_[i].size();
  }
  probs_.assign(total, 1.0);
  for (std::size_t f = 0; f < total; ++f)
    for (int i = 0; i < n(); ++i) probs_[f] *= laws_[i][static_cast<std::size_t>(outcome(f, i))];
}

ProductModel ProductModel::from_evaluator(std::vector<std::vector<double>> laws, const Evaluator& eval) {
  const std::size_t total = enumeration_size(laws);
  std::vector<HermitianMatrix> table;
  table.reserve(total);
  std::vector<int> o(laws.size(), 0);
  for (std::size_t f = 0; f < total; ++f) {
    table.push_back(eval(o));
    for (std::size_t i = 0; i < o.size(); ++i) {
      if (++o[i] < static_cast<int>(laws[i].size())) break;
      o[i] = 0;
    }
  }
  return ProductModel(std::move(laws), std::move(table));
}

int ProductModel::outcome(std::size_t flat, int i) const {
  return static_cast<int>((flat / strides_[static_cast<std::size_t>(i)]) % laws_[static_cast<std::size_t>(i)].size());
}

std::size_t ProductModel::with_outcome(std::size_t flat, int i, int o) const {
  const auto s = strides_[static_cast<std::size_t>(i)];
  return flat - static_cast<std::size_t>(outcome(flat, i)) * s + static_cast<std::size_t>(o) * s;
}

DiscreteRandomMatrix ProductModel::distribution() const { return {probs_, table_}; }

double trace_phi(const PhiFunction& phi, const HermitianMatrix& z) {
  const auto& s = z.spectrum();
  const auto dom = phi.domain();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < s.values.size(); ++i) sum += phi(clamp_to_domain(dom, s.values(i), z.dim()));
  return sum;
}

double phi_entropy(const PhiFunction& phi, std::span<const double> probs,
                   std::span<const HermitianMatrix> values) {
  if (values.empty() || probs.size() != values.size()) throw DimensionMismatch("phi_entropy law");
  const int d = values.front().dim();
  HermitianMatrix mean(d);
  double avg = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    mean += probs[k] * values[k];
    avg += probs[k] * trace_phi(phi, values[k]);
  }
  return (avg - trace_phi(phi, mean)) / d;
}

double phi_entropy(const PhiFunction& phi, const DiscreteRandomMatrix& z) {
  return phi_entropy(phi, z.probs, z.values);
}

double ConditionalEntropyTable::expectation() const {
  double s = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) s += probs[k] * values[k];
  return s;
}

ConditionalEntropyTable conditional_phi_entropy(const PhiFunction& phi, const ProductModel& model, int i) {
  if (i < 0 || i >= model.n()) throw IndexOutOfRange("input " + std::to_string(i));
  ConditionalEntropyTable t;
  const auto& law = model.law(i);
  std::vector<HermitianMatrix> slice(law.size());
  for (std::size_t f = 0; f < model.size(); ++f) {
    if (model.outcome(f, i) != 0) continue;
    double rest = 1.0;
    for (int j = 0; j < model.n(); ++j)
      if (j != i) rest *= model.law(j)[static_cast<std::size_t>(model.outcome(f, j))];
    for (std::size_t o = 0; o < law.size(); ++o)
      slice[o] = model.value(model.with_outcome(f, i, static_cast<int>(o)));
    t.probs.push_back(rest);
    t.values.push_back(phi_entropy(phi, law, slice));
  }
  return t;
}

CheckReport check_subadditivity(const PhiFunction& phi, const ProductModel& model, double rel) {
  const double lhs = phi_entropy(phi, model.distribution());
  double rhs = 0.0;
  for (int i = 0; i < model.n(); ++i) rhs += conditional_phi_entropy(phi, model, i).expectation();
  CheckReport r;
  r.check = "subadditivity";
  r.phi = phi.descriptor();
  r.d = model.dim();
  r.n = model.n();
  r.details = Json{{"entropy", lhs}, {"bound", rhs}};
  TrialOutcome o{lhs - rhs, rel_tol(rel, lhs, rhs), Json()};
  if (!o.holds()) o.witness = Json{{"entropy", lhs}, {"bound", rhs}};
  r.record(o);
  return r;
}

double bregman_a(const PhiFunction& phi, const HermitianMatrix& u, const HermitianMatrix& v) {
  const HermitianMatrix dphi_u = apply_phi_derivative(phi, 1, u);
  return trace_phi(phi, u + v) - trace_phi(phi, u) - hs_inner(dphi_u, v);
}

double bregman_b(const PhiFunction& phi, const HermitianMatrix& u, const HermitianMatrix& v) {
  const HermitianMatrix diff = apply_phi_derivative(phi, 1, u + v) - apply_phi_derivative(phi, 1, u);
  return hs_inner(diff, v);
}

double bregman_c(const PhiFunction& phi, const HermitianMatrix& u, const HermitianMatrix& v) {
  return trace(frechet_second(phi.phi(), u, v, v));
}

BregmanValues bregman_maps(const PhiFunction& phi, const HermitianMatrix& u, const HermitianMatrix& v) {
  require_same_dim(u, v, "bregman_maps");
  return {bregman_a(phi, u, v), bregman_b(phi, u, v), bregman_c(phi, u, v)};
}

double jensen_gap(const PhiFunction& phi, double t, const HermitianMatrix& u, const HermitianMatrix& v) {
  return t * trace_phi(phi, u) + (1.0 - t) * trace_phi(phi, v) - trace_phi(phi, t * u + (1.0 - t) * v);
}

TrialOutcome joint_convexity_trial(const MatrixPairMap& map, const PairSampler& sampler, Rng& rng,
                                   double t, double rel) {
  const auto [u1, v1] = sampler(rng);
  const auto [u2, v2] = sampler(rng);
  const double m1 = map(u1, v1);
  const double m2 = map(u2, v2);
  const double mid = map(t * u1 + (1.0 - t) * u2, t * v1 + (1.0 - t) * v2);
  const double chord = t * m1 + (1.0 - t) * m2;
  TrialOutcome o{mid - chord, rel_tol(rel, std::max(std::abs(m1), std::abs(m2)), mid), Json()};
  if (!o.holds()) {
    o.witness = Json{{"u1", matrix_to_json(u1)}, {"v1", matrix_to_json(v1)}, {"u2", matrix_to_json(u2)},
                     {"v2", matrix_to_json(v2)}, {"t", t}, {"chord", chord}, {"value", mid}};
  }
  return o;
}

CheckReport check_joint_convexity(const std::string& name, const MatrixPairMap& map,
                                  const PairSampler& sampler, std::int64_t trials, std::uint64_t seed,
                                  int jobs, double rel) {
  CheckReport r = run_trials(name, "", 0, trials, seed, jobs, [&](Rng& rng, std::int64_t t) {
    const double s = (t % 2 == 0) ? 0.5 : rng.uniform();
    return joint_convexity_trial(map, sampler, rng, s, rel);
  });
  r.details = Json{{"note", "no violation in " + std::to_string(r.trials) + " trials is evidence, not proof"}};
  return r;
}

Superoperator inverse_derivative_superoperator(const PhiFunction& phi, const HermitianMatrix& x) {
  if (phi.is_affine()) throw DomainError("affine phi has a singular derivative map");
  return invert_superoperator(superoperator_of_derivative(phi.psi(), x));
}

TrialOutcome char_a_trial(const PhiFunction& phi, const HermitianMatrix& a, const HermitianMatrix& b,
                          double rel) {
  const Superoperator ma = inverse_derivative_superoperator(phi, a);
  const Superoperator mb = inverse_derivative_superoperator(phi, b);
  const Superoperator mm = inverse_derivative_superoperator(phi, 0.5 * (a + b));
  const CMatrix diff = mm.matrix - 0.5 * (ma.matrix + mb.matrix);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  const double lam_min = es.eigenvalues()(0);
  const double scale = std::max({ma.matrix.norm(), mb.matrix.norm(), mm.matrix.norm()});
  TrialOutcome o{-lam_min, rel * scale, Json()};
  if (!o.holds()) {
    o.witness = pair_witness(a, b);
    o.witness["min_eigenvalue"] = lam_min;
  }
  return o;
}

CheckReport check_char_a(const PhiFunction& phi, std::int64_t trials, int d, std::uint64_t seed, int jobs) {
  const std::string name = "char-a";
  CheckReport r = run_trials(name, phi.descriptor(), d, trials, seed, jobs, [&](Rng& rng, std::int64_t) {
    const HermitianMatrix a = random_psd(d, rng);
    const HermitianMatrix b = random_psd(d, rng);
    return char_a_trial(phi, a, b);
  });
  return r;
}

CharEValues check_char_e(const PhiFunction& phi, const HermitianMatrix& a, const HermitianMatrix& h,
                         const HermitianMatrix& k, double rel) {
  require_same_dim(a, h, "check_char_e");
  require_same_dim(a, k, "check_char_e");
  const ScalarFunction psi = phi.psi();
  const Superoperator tinv = inverse_derivative_superoperator(phi, a);
  const HermitianMatrix u = tinv.apply(h);

  // D³Ψ[A](k, k, u) as the derivative of t ↦ D²Ψ[A + tk](k, u), Richardson-extrapolated central
  // differences. The step stays well inside the domain of Ψ.
  double step = 1e-4 * (1.0 + frobenius_norm(a.matrix()));
  const double knorm = operator_norm(k);
  if (std::isfinite(psi.domain.lo) && knorm > 0) {
    const double room = a.min_eigenvalue() - psi.domain.lo;
    step = std::min(step, 1e-2 * room / knorm);
  }
  auto central = [&](double s) {
    const HermitianMatrix up = frechet_second(psi, a + s * k, k, u);
    const HermitianMatrix down = frechet_second(psi, a - s * k, k, u);
    return (1.0 / (2.0 * s)) * (up - down);
  };
  HermitianMatrix d3 = a;
  if (knorm == 0.0) {
    d3 = HermitianMatrix(a.dim());
  } else {
    const HermitianMatrix coarse = central(step);
    const HermitianMatrix fine = central(0.5 * step);
    d3 = (4.0 / 3.0) * fine - (1.0 / 3.0) * coarse;
  }
  CharEValues v;
  v.lhs = hs_inner(h, tinv.apply(d3));
  const HermitianMatrix inner = tinv.apply(frechet_second(psi, a, k, u));
  v.rhs = 2.0 * hs_inner(h, tinv.apply(frechet_second(psi, a, k, inner)));
  v.holds = v.lhs >= v.rhs - rel_tol(rel, v.lhs, v.rhs);
  return v;
}

CheckReport check_char_e_sweep(const PhiFunction& phi, std::int64_t trials, int d, std::uint64_t seed,
                               int jobs) {
  return run_trials("char-e", phi.descriptor(), d, trials, seed, jobs, [&](Rng& rng, std::int64_t) {
    const HermitianMatrix a = random_psd(d, rng);
    HermitianMatrix h = random_hermitian(d, rng);
    HermitianMatrix k = random_hermitian(d, rng);
    h *= 1.0 / frobenius_norm(h.matrix());
    k *= 1.0 / frobenius_norm(k.matrix());
    const CharEValues v = check_char_e(phi, a, h, k);
    TrialOutcome o{v.rhs - v.lhs, rel_tol(kConvexityRelTol, v.lhs, v.rhs), Json()};
    if (!o.holds())
      o.witness = Json{{"A", matrix_to_json(a)}, {"h", matrix_to_json(h)}, {"k", matrix_to_json(k)},
                       {"lhs", v.lhs}, {"rhs", v.rhs}};
    return o;
  });
}

double duality_lower_bound(const PhiFunction& phi, const DiscreteRandomMatrix& z,
                           const DiscreteRandomMatrix& t) {
  if (z.size() != t.size()) throw DimensionMismatch("Z and T must share the support indexing");
  for (std::size_t k = 0; k < z.size(); ++k)
    if (std::abs(z.probs[k] - t.probs[k]) > 1e-15)
      throw DimensionMismatch("Z and T must share probabilities");
  const HermitianMatrix dphi_mean = apply_phi_derivative(phi, 1, t.mean());
  double s = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const HermitianMatrix left = apply_phi_derivative(phi, 1, t.values[k]) - dphi_mean;
    s += t.probs[k] * normalized_hs(left, z.values[k] - t.values[k]);
  }
  return s + phi_entropy(phi, t);
}

CheckReport check_char_g(const PhiFunction& phi, const ProductModel& model, double rel) {
  if (model.n() != 2) throw DimensionMismatch("check_char_g needs a two-input model");
  const double lhs = conditional_phi_entropy(phi, model, 1).expectation();
  const auto& law1 = model.law(0);
  const auto& law2 = model.law(1);
  std::vector<HermitianMatrix> averaged;
  for (std::size_t o2 = 0; o2 < law2.size(); ++o2) {
    HermitianMatrix m(model.dim());
    for (std::size_t o1 = 0; o1 < law1.size(); ++o1)
      m += law1[o1] * model.value(o1 * model.stride(0) + o2 * model.stride(1));
    averaged.push_back(m);
  }
  const double rhs = phi_entropy(phi, law2, averaged);
  CheckReport r;
  r.check = "char-g";
  r.phi = phi.descriptor();
  r.d = model.dim();
  r.n = 2;
  r.details = Json{{"conditional_entropy", lhs}, {"entropy_of_average", rhs}};
  TrialOutcome o{rhs - lhs, rel_tol(rel, lhs, rhs), Json()};
  if (!o.holds()) o.witness = r.details;
  r.record(o);
  return r;
}

CheckReport check_char_h(const PhiFunction& phi, const DiscreteRandomMatrix& z1,
                         const DiscreteRandomMatrix& z2, double t, double rel) {
  if (z1.size() != z2.size()) throw DimensionMismatch("Z1 and Z2 must share the support indexing");
  DiscreteRandomMatrix mix{z1.probs, {}};
  for (std::size_t k = 0; k < z1.size(); ++k) mix.values.push_back(t * z1.values[k] + (1.0 - t) * z2.values[k]);
  const double lhs = phi_entropy(phi, mix);
  const double rhs = t * phi_entropy(phi, z1) + (1.0 - t) * phi_entropy(phi, z2);
  CheckReport r;
  r.check = "char-h";
  r.phi = phi.descriptor();
  r.d = z1.dim();
  r.details = Json{{"entropy_of_mixture", lhs}, {"mixture_of_entropies", rhs}, {"t", t}};
  TrialOutcome o{lhs - rhs, rel_tol(rel, lhs, rhs), Json()};
  if (!o.holds()) o.witness = r.details;
  r.record(o);
  return r;
}

}  // namespace matphi
