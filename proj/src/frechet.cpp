#include "matphi/frechet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace matphi {

namespace {

double falling_factorial(double p, int k) {
  double c = 1.0;
  for (int j = 0; j < k; ++j) c *= (p - j);
  return c;
}

double factorial(int k) {
  double c = 1.0;
  for (int j = 2; j <= k; ++j) c *= j;
  return c;
}

double tol_dd(double a, double b) { return 1e-7 * (1.0 + std::abs(a) + std::abs(b)); }

double checked_node(const ScalarFunction& f, double x, int d) {
  if (f.domain.contains(x)) return x;
  const double slack = tol_spec(d);
  if (!f.domain.lo_open && x < f.domain.lo && x >= f.domain.lo - slack) return f.domain.lo;
  if (!f.domain.hi_open && x > f.domain.hi && x <= f.domain.hi + slack) return f.domain.hi;
  std::ostringstream os;
  os << "node " << x << " outside [" << f.domain.lo << ", " << f.domain.hi << "]";
  throw DomainError(os.str());
}

RVector checked_nodes(const ScalarFunction& f, const HermitianMatrix& a) {
  RVector v = a.spectrum().values;
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = checked_node(f, v(i), a.dim());
  return v;
}

double dd1(const ScalarFunction& f, double a, double b) {
  if (std::abs(a - b) <= tol_dd(a, b)) return f.derivative(1, 0.5 * (a + b));
  return (f(a) - f(b)) / (a - b);
}

double dd2(const ScalarFunction& f, double a, double b, double c) {
  std::array<double, 3> s{a, b, c};
  std::sort(s.begin(), s.end());
  const double spread = s[2] - s[0];
  const double m = (s[0] + s[1] + s[2]) / 3.0;
  if (spread <= tol_dd(s[0], s[2])) return 0.5 * f.derivative(2, m);
  // Taylor expansion about the centroid; the first-order term vanishes there.
  if (f.max_order >= 4 && spread <= 1e-3 * std::max(std::abs(s[0]), std::abs(s[2]))) {
    double q = 0.0;
    for (double x : s) q += (x - m) * (x - m);
    return 0.5 * f.derivative(2, m) + f.derivative(4, m) * q / 48.0;
  }
  return (dd1(f, s[0], s[1]) - dd1(f, s[1], s[2])) / (s[0] - s[2]);
}

CMatrix schur(const RMatrix& table, const CMatrix& m) {
  return (table.cast<Complex>().array() * m.array()).matrix();
}

}  // namespace

double ScalarFunction::derivative(int k, double x) const {
  if (k > max_order) throw DomainError("derivative order " + std::to_string(k) + " unavailable");
  return eval(k, x);
}

ScalarFunction ScalarFunction::identity() { return polynomial({0.0, 1.0}); }

ScalarFunction ScalarFunction::polynomial(std::vector<double> coeffs) {
  ScalarFunction f;
  f.max_order = 8;
  f.eval = [c = std::move(coeffs)](int k, double x) {
    double sum = 0.0;
    double xp = 1.0;
    for (std::size_t j = static_cast<std::size_t>(k); j < c.size(); ++j) {
      sum += c[j] * falling_factorial(static_cast<double>(j), k) * xp;
      xp *= x;
    }
    return sum;
  };
  return f;
}

ScalarFunction ScalarFunction::power(double p) {
  ScalarFunction f;
  f.max_order = 6;
  f.domain = SpectralInterval::nonnegative();
  f.eval = [p](int k, double x) {
    const double c = falling_factorial(p, k);
    if (c == 0.0) return 0.0;
    if (x == 0.0) {
      const double e = p - k;
      if (e > 0) return 0.0;
      if (e == 0) return c;
      return c > 0 ? kInf : -kInf;
    }
    return c * std::pow(x, p - k);
  };
  return f;
}

ScalarFunction ScalarFunction::xlogx() {
  ScalarFunction f;
  f.max_order = 6;
  f.domain = SpectralInterval::nonnegative();
  f.eval = [](int k, double x) {
    switch (k) {
      case 0:
        return x > 0 ? x * std::log(x) : 0.0;
      case 1:
        return std::log(x) + 1.0;
      default: {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        return sign * factorial(k - 2) / std::pow(x, k - 1);
      }
    }
  };
  return f;
}

ScalarFunction ScalarFunction::log(double shift) {
  ScalarFunction f;
  f.max_order = 6;
  f.domain = SpectralInterval::positive();
  f.eval = [shift](int k, double x) {
    if (k == 0) return std::log(x) + shift;
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    return sign * factorial(k - 1) / std::pow(x, k);
  };
  return f;
}

ScalarFunction ScalarFunction::exp(double rate) {
  ScalarFunction f;
  f.max_order = 8;
  f.eval = [rate](int k, double x) { return std::pow(rate, k) * std::exp(rate * x); };
  return f;
}

double divided_difference(const ScalarFunction& f, std::span<const double> nodes, int order) {
  if (order < 1 || order > 2) throw DomainError("divided difference order must be 1 or 2");
  if (nodes.size() != static_cast<std::size_t>(order + 1))
    throw DimensionMismatch("divided difference of order " + std::to_string(order) + " needs " +
                            std::to_string(order + 1) + " nodes");
  std::array<double, 3> x{};
  for (std::size_t i = 0; i < nodes.size(); ++i) x[i] = checked_node(f, nodes[i], 1);
  return order == 1 ? dd1(f, x[0], x[1]) : dd2(f, x[0], x[1], x[2]);
}

RMatrix first_divided_difference_table(const ScalarFunction& f, const RVector& nodes) {
  const Eigen::Index d = nodes.size();
  RMatrix t(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      t(i, j) = dd1(f, nodes(i), nodes(j));
      t(j, i) = t(i, j);
    }
  }
  return t;
}

HermitianMatrix frechet_derivative(const ScalarFunction& f, const HermitianMatrix& a,
                                   const HermitianMatrix& e) {
  require_same_dim(a, e, "frechet_derivative");
  const RVector nodes = checked_nodes(f, a);
  const CMatrix& u = a.spectrum().vectors;
  const CMatrix et = u.adjoint() * e.matrix() * u;
  return HermitianMatrix::symmetrized(u * schur(first_divided_difference_table(f, nodes), et) *
                                      u.adjoint());
}

HermitianMatrix frechet_second(const ScalarFunction& f, const HermitianMatrix& a,
                               const HermitianMatrix& e1, const HermitianMatrix& e2) {
  require_same_dim(a, e1, "frechet_second");
  require_same_dim(a, e2, "frechet_second");
  const RVector nodes = checked_nodes(f, a);
  const int d = a.dim();
  const CMatrix& u = a.spectrum().vectors;
  const CMatrix x = u.adjoint() * e1.matrix() * u;
  const CMatrix y = u.adjoint() * e2.matrix() * u;
  std::vector<double> table(static_cast<std::size_t>(d) * d * d);
  auto at = [d](int i, int k, int j) { return (static_cast<std::size_t>(i) * d + k) * d + j; };
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      for (int j = 0; j < d; ++j) table[at(i, k, j)] = dd2(f, nodes(i), nodes(k), nodes(j));
  CMatrix r = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Complex s = 0.0;
      for (int k = 0; k < d; ++k) s += table[at(i, k, j)] * (x(i, k) * y(k, j) + y(i, k) * x(k, j));
      r(i, j) = s;
    }
  return HermitianMatrix::symmetrized(u * r * u.adjoint());
}

CVector vectorize(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix unvectorize(const CVector& v, int d) { return Eigen::Map<const CMatrix>(v.data(), d, d); }

HermitianMatrix Superoperator::apply(const HermitianMatrix& e) const {
  if (e.dim() != dim) throw DimensionMismatch("superoperator dimension");
  return HermitianMatrix::symmetrized(unvectorize(matrix * vectorize(e.matrix()), dim));
}

bool Superoperator::is_self_adjoint(double tol) const {
  return max_abs_entry(matrix - matrix.adjoint()) <= tol;
}

Superoperator Superoperator::identity(int d) {
  return {d, CMatrix::Identity(static_cast<Eigen::Index>(d) * d, static_cast<Eigen::Index>(d) * d)};
}

Superoperator superoperator_of_derivative(const ScalarFunction& f, const HermitianMatrix& a) {
  const int d = a.dim();
  const RVector nodes = checked_nodes(f, a);
  const RMatrix table = first_divided_difference_table(f, nodes);
  const CMatrix& u = a.spectrum().vectors;
  const Eigen::Index dd = static_cast<Eigen::Index>(d) * d;
  // W = conj(U) ⊗ U maps vec(R) to vec(U R U†).
  CMatrix w(dd, dd);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      w.block(static_cast<Eigen::Index>(i) * d, static_cast<Eigen::Index>(j) * d, d, d) =
          std::conj(u(i, j)) * u;
  const RVector diag = Eigen::Map<const RVector>(table.data(), dd);
  Superoperator t{d, w * diag.cast<Complex>().asDiagonal() * w.adjoint()};
  t.matrix = 0.5 * (t.matrix + t.matrix.adjoint()).eval();
  return t;
}

Superoperator invert_superoperator(const Superoperator& t, double cond_max) {
  const double scale = max_abs_entry(t.matrix);
  if (scale == 0.0) throw SingularSuperoperator("zero map");
  if (t.is_self_adjoint(1e-9 * scale)) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (t.matrix + t.matrix.adjoint()));
    const RVector& lam = es.eigenvalues();
    const double smallest = lam.cwiseAbs().minCoeff();
    const double largest = lam.cwiseAbs().maxCoeff();
    if (!(smallest > 0.0) || largest / smallest > cond_max) {
      std::ostringstream os;
      os << "smallest singular value " << smallest << ", largest " << largest;
      throw SingularSuperoperator(os.str());
    }
    const CMatrix& v = es.eigenvectors();
    CMatrix inv = v * lam.cwiseInverse().cast<Complex>().asDiagonal() * v.adjoint();
    return {t.dim, 0.5 * (inv + inv.adjoint())};
  }
  Eigen::JacobiSVD<CMatrix> svd(t.matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  const double smallest = s(s.size() - 1);
  if (!(smallest > 0.0) || s(0) / smallest > cond_max) {
    std::ostringstream os;
    os << "smallest singular value " << smallest << ", largest " << s(0);
    throw SingularSuperoperator(os.str());
  }
  return {t.dim, svd.matrixV() * s.cwiseInverse().cast<Complex>().asDiagonal() *
                     svd.matrixU().adjoint()};
}

double superoperator_norm(const Superoperator& t) {
  if (t.matrix.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(t.matrix);
  return svd.singularValues()(0);
}

double frechet_norm(const ScalarFunction& f, const HermitianMatrix& a) {
  return superoperator_norm(superoperator_of_derivative(f, a));
}

std::vector<HermitianMatrix> hermitian_basis(int d) {
  std::vector<HermitianMatrix> basis;
  basis.reserve(static_cast<std::size_t>(d) * d);
  const double r = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < d; ++k) {
    CMatrix m = CMatrix::Zero(d, d);
    m(k, k) = 1.0;
    basis.push_back(HermitianMatrix::symmetrized(m));
  }
  for (int k = 0; k < d; ++k)
    for (int l = k + 1; l < d; ++l) {
      CMatrix m = CMatrix::Zero(d, d);
      m(k, l) = r;
      m(l, k) = r;
      basis.push_back(HermitianMatrix::symmetrized(m));
      m(k, l) = Complex(0.0, r);
      m(l, k) = Complex(0.0, -r);
      basis.push_back(HermitianMatrix::symmetrized(m));
    }
  return basis;
}

double induced_norm(const std::function<HermitianMatrix(const HermitianMatrix&)>& map, int d_in) {
  const auto in_basis = hermitian_basis(d_in);
  std::vector<HermitianMatrix> images;
  images.reserve(in_basis.size());
  for (const auto& b : in_basis) images.push_back(map(b));
  if (images.empty()) return 0.0;
  const int d_out = images.front().dim();
  const auto out_basis = hermitian_basis(d_out);
  RMatrix j(out_basis.size(), in_basis.size());
  for (std::size_t c = 0; c < images.size(); ++c)
    for (std::size_t r = 0; r < out_basis.size(); ++r) j(r, c) = hs_inner(out_basis[r], images[c]);
  Eigen::JacobiSVD<RMatrix> svd(j);
  return svd.singularValues()(0);
}

double MultivariateFunction::partial_at(std::span<const double> x, int i) const {
  if (partial) return partial(x, i);
  std::vector<double> p(x.begin(), x.end());
  const double h = 1e-5 * (1.0 + std::abs(x[i]));
  p[i] = x[i] + h;
  const double up = value(p);
  p[i] = x[i] - h;
  const double down = value(p);
  return (up - down) / (2.0 * h);
}

double multivariate_divided_difference(const MultivariateFunction& f, std::span<const double> x,
                                       std::span<const double> y, int i) {
  if (x.size() != y.size()) throw DimensionMismatch("multivariate divided difference arity");
  if (i < 0 || static_cast<std::size_t>(i) >= x.size())
    throw IndexOutOfRange("coordinate " + std::to_string(i));
  if (std::abs(x[i] - y[i]) <= tol_dd(x[i], y[i])) {
    return 0.5 * (f.partial_at(x, i) + f.partial_at(y, i));
  }
  std::vector<double> xs(x.begin(), x.end());
  std::vector<double> ys(y.begin(), y.end());
  xs[i] = y[i];
  ys[i] = x[i];
  return 0.5 * ((f(x) - f(xs)) + (f(ys) - f(y))) / (x[i] - y[i]);
}

JointSpectrum joint_diagonalize(std::span<const HermitianMatrix> xs) {
  if (xs.empty()) throw DimensionMismatch("empty tuple");
  const int d = xs[0].dim();
  const double tol = 1e-8 * d;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require_same_dim(xs[0], xs[i], "joint_diagonalize");
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      const CMatrix c = xs[i].matrix() * xs[j].matrix() - xs[j].matrix() * xs[i].matrix();
      const double norm = c.norm();
      if (norm > tol) {
        std::ostringstream os;
        os << "X" << i + 1 << ", X" << j + 1 << ": commutator norm " << norm;
        throw NotCommuting(os.str());
      }
    }
  }
  // Fixed irrational weights split degeneracies of X1 that the other inputs resolve.
  CMatrix m = xs[0].matrix();
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double c = std::fmod(0.5 + static_cast<double>(i) * 0.6180339887498949, 1.0) + 0.25;
    m += c * xs[i].matrix();
  }
  JointSpectrum js;
  if (d == 1) {
    js.basis = CMatrix::Identity(1, 1);
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
    js.basis = es.eigenvectors();
  }
  for (const auto& x : xs) {
    const CMatrix t = js.basis.adjoint() * x.matrix() * js.basis;
    js.eig.push_back(t.diagonal().real());
  }
  return js;
}

namespace {

std::vector<double> point(const JointSpectrum& js, int k) {
  std::vector<double> p(js.eig.size());
  for (std::size_t i = 0; i < js.eig.size(); ++i) p[i] = js.eig[i](k);
  return p;
}

}  // namespace

HermitianMatrix apply_multivariate(const MultivariateFunction& f, std::span<const HermitianMatrix> xs) {
  const JointSpectrum js = joint_diagonalize(xs);
  const int d = xs[0].dim();
  RVector vals(d);
  for (int k = 0; k < d; ++k) vals(k) = f(point(js, k));
  return HermitianMatrix::from_spectrum(vals, js.basis);
}

RMatrix multivariate_divided_difference_table(const MultivariateFunction& f, const JointSpectrum& js,
                                              int i) {
  const int d = static_cast<int>(js.basis.rows());
  RMatrix t(d, d);
  for (int k = 0; k < d; ++k) {
    const auto pk = point(js, k);
    for (int l = k; l < d; ++l) {
      const auto pl = point(js, l);
      t(k, l) = multivariate_divided_difference(f, pk, pl, i);
      t(l, k) = t(k, l);
    }
  }
  return t;
}

HermitianMatrix multivariate_partial_frechet(const MultivariateFunction& f,
                                             std::span<const HermitianMatrix> xs, int i,
                                             const HermitianMatrix& e) {
  if (i < 0 || static_cast<std::size_t>(i) >= xs.size())
    throw IndexOutOfRange("input " + std::to_string(i));
  const JointSpectrum js = joint_diagonalize(xs);
  require_same_dim(xs[0], e, "multivariate_partial_frechet");
  const CMatrix& u = js.basis;
  const CMatrix et = u.adjoint() * e.matrix() * u;
  return HermitianMatrix::symmetrized(u * schur(multivariate_divided_difference_table(f, js, i), et) *
                                      u.adjoint());
}

InverseDerivatives inverse_map_derivatives(const HermitianMatrix& g, const HermitianMatrix& dg,
                                           const HermitianMatrix& d2g, double cond_max) {
  require_same_dim(g, dg, "inverse_map_derivatives");
  require_same_dim(g, d2g, "inverse_map_derivatives");
  const auto& s = g.spectrum();
  const double smallest = s.values.cwiseAbs().minCoeff();
  const double largest = s.values.cwiseAbs().maxCoeff();
  if (!(smallest > 0.0) || largest / smallest > cond_max) {
    std::ostringstream os;
    os << "condition number " << (smallest > 0 ? largest / smallest : kInf);
    throw SingularMatrix(os.str());
  }
  const CMatrix ginv = s.vectors * s.values.cwiseInverse().cast<Complex>().asDiagonal() *
                       s.vectors.adjoint();
  const CMatrix a = ginv * dg.matrix() * ginv;
  return {HermitianMatrix::symmetrized(-a),
          HermitianMatrix::symmetrized(2.0 * a * dg.matrix() * ginv -
                                       ginv * d2g.matrix() * ginv)};
}

}  // namespace matphi
