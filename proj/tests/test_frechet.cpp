#include <gtest/gtest.h>

#include <cmath>

#include "matphi/errors.hpp"
#include "matphi/frechet.hpp"
#include "matphi/random.hpp"
#include "oracle.hpp"

using namespace matphi;

namespace {

const ScalarFunction kSquare = ScalarFunction::polynomial({0.0, 0.0, 1.0});

CMatrix fd_first(const std::function<CMatrix(const CMatrix&)>& f, const HermitianMatrix& a, const HermitianMatrix& e) {
  const double h = 1e-5 * (1.0 + operator_norm(a));
  return oracle::central_difference(f, a.matrix(), e.matrix(), h);
}

double rel_err(const CMatrix& got, const CMatrix& want) { return (got - want).norm() / std::max(1e-300, want.norm()); }

}  // namespace

TEST(DividedDifference, Examples) {
  const double n13[] = {1.0, 3.0};
  EXPECT_NEAR(divided_difference(kSquare, n13, 1), 4.0, 1e-14);
  const double n22[] = {2.0, 2.0};
  EXPECT_NEAR(divided_difference(kSquare, n22, 1), 4.0, 1e-14);
  const double e = std::exp(1.0);
  const double n1e[] = {1.0, e};
  EXPECT_NEAR(divided_difference(ScalarFunction::xlogx(), n1e, 1), e / (e - 1.0), 1e-13);
  EXPECT_NEAR(e / (e - 1.0), 1.5820, 1e-4);
}

TEST(DividedDifference, ConfluentSecondOrderIsHalfSecondDerivative) {
  const double n[] = {2.0, 2.0, 2.0};
  EXPECT_NEAR(divided_difference(ScalarFunction::xlogx(), n, 2), 0.5 * (1.0 / 2.0), 1e-12);
  const double near[] = {2.0, 2.0 + 1e-9, 2.0};
  EXPECT_NEAR(divided_difference(ScalarFunction::xlogx(), near, 2), 0.25, 1e-7);
}

TEST(DividedDifference, RecursiveDefinitionAtDistinctNodes) {
  const ScalarFunction f = ScalarFunction::exp();
  const double n[] = {0.3, 1.1, 2.0};
  const double d01 = (std::exp(0.3) - std::exp(1.1)) / (0.3 - 1.1);
  const double d12 = (std::exp(1.1) - std::exp(2.0)) / (1.1 - 2.0);
  EXPECT_NEAR(divided_difference(f, n, 2), (d01 - d12) / (0.3 - 2.0), 1e-12);
}

TEST(FrechetDerivative, SquareIsAnticommutator) {
  Rng rng = make_rng(1, "fd-sq");
  const HermitianMatrix a = random_hermitian(3, rng);
  const HermitianMatrix e = random_hermitian(3, rng);
  const CMatrix want = a.matrix() * e.matrix() + e.matrix() * a.matrix();
  EXPECT_LT(oracle::max_dev(frechet_derivative(kSquare, a, e).matrix(), want), 1e-12);
}

TEST(FrechetDerivative, IdentityDirectionGivesDerivative) {
  Rng rng = make_rng(2, "fd-id");
  const HermitianMatrix a = random_psd(3, rng);
  const auto got = frechet_derivative(ScalarFunction::xlogx(), a, HermitianMatrix::identity(3));
  const CMatrix want = oracle::mlog(a.matrix()) + CMatrix::Identity(3, 3);
  EXPECT_LT(oracle::max_dev(got.matrix(), want), 1e-10);
}

TEST(FrechetDerivative, XlogxMatchesFiniteDifference) {
  for (int t = 0; t < 20; ++t) {
    Rng rng = make_rng(3, "fd-xlogx", t);
    const HermitianMatrix a = random_psd(3, rng);
    const HermitianMatrix e = random_hermitian(3, rng, 0.1);
    const CMatrix fd = fd_first(oracle::xlogx, a, e);
    EXPECT_LT(oracle::max_dev(frechet_derivative(ScalarFunction::xlogx(), a, e).matrix(), fd), 1e-7);
  }
}

TEST(FrechetSecond, SquareAndAffine) {
  Rng rng = make_rng(4, "fs");
  const HermitianMatrix a = random_hermitian(3, rng);
  const HermitianMatrix e1 = random_hermitian(3, rng);
  const HermitianMatrix e2 = random_hermitian(3, rng);
  const CMatrix want = e1.matrix() * e2.matrix() + e2.matrix() * e1.matrix();
  EXPECT_LT(oracle::max_dev(frechet_second(kSquare, a, e1, e2).matrix(), want), 1e-12);
  const ScalarFunction affine = ScalarFunction::polynomial({2.0, -3.0});
  EXPECT_LT(max_abs_entry(frechet_second(affine, a, e1, e2).matrix()), 1e-13);
}

TEST(FrechetSecond, XlogxMatchesMixedFiniteDifference) {
  for (int t = 0; t < 20; ++t) {
    Rng rng = make_rng(5, "fs-xlogx", t);
    const HermitianMatrix a = random_psd(3, rng);
    const HermitianMatrix e1 = random_hermitian(3, rng, 0.1);
    const HermitianMatrix e2 = random_hermitian(3, rng, 0.1);
    const CMatrix fd = oracle::mixed_difference(oracle::xlogx, a.matrix(), e1.matrix(), e2.matrix(), 1e-3);
    EXPECT_LT(oracle::max_dev(frechet_second(ScalarFunction::xlogx(), a, e1, e2).matrix(), fd), 1e-5);
  }
}

TEST(Superoperator, PsiOfSquareIsTwiceIdentity) {
  Rng rng = make_rng(6, "so");
  const HermitianMatrix a = random_psd(3, rng);
  const Superoperator s = superoperator_of_derivative(ScalarFunction::polynomial({0.0, 2.0}), a);
  EXPECT_LT(oracle::max_dev(s.matrix, 2.0 * CMatrix::Identity(9, 9)), 1e-12);
}

TEST(Superoperator, ScalarReduction) {
  const Superoperator s = superoperator_of_derivative(ScalarFunction::xlogx(), HermitianMatrix::scalar(2.0));
  ASSERT_EQ(s.matrix.rows(), 1);
  EXPECT_NEAR(s.matrix(0, 0).real(), std::log(2.0) + 1.0, 1e-14);
}

TEST(Superoperator, LogEigenvaluesMatchDividedDifferenceTable) {
  const Superoperator s = superoperator_of_derivative(ScalarFunction::log(1.0), HermitianMatrix::diagonal({1.0, 2.0}));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(s.matrix);
  const double l2 = std::log(2.0);
  std::vector<double> want{l2, l2, 0.5, 1.0};
  std::sort(want.begin(), want.end());
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(es.eigenvalues()(i), want[static_cast<std::size_t>(i)], 1e-12);
}

TEST(Superoperator, SelfAdjointForPhiDerivatives) {
  for (int t = 0; t < 20; ++t) {
    Rng rng = make_rng(7, "sa", t);
    const HermitianMatrix a = random_psd(3, rng);
    EXPECT_TRUE(superoperator_of_derivative(ScalarFunction::log(1.0), a).is_self_adjoint(1e-9));
    EXPECT_TRUE(superoperator_of_derivative(ScalarFunction::power(0.5), a).is_self_adjoint(1e-9));
  }
}

TEST(InvertSuperoperator, Examples) {
  const Superoperator two{2, 2.0 * CMatrix::Identity(4, 4)};
  EXPECT_LT(oracle::max_dev(invert_superoperator(two).matrix, 0.5 * CMatrix::Identity(4, 4)), 1e-15);
  const Superoperator s = superoperator_of_derivative(ScalarFunction::log(1.0), HermitianMatrix::diagonal({1.0, 2.0}));
  const Superoperator inv = invert_superoperator(s);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(inv.matrix(i, i).real(), 1.0 / s.matrix(i, i).real(), 1e-12);
}

TEST(InvertSuperoperator, RoundTripAndSingular) {
  for (int t = 0; t < 20; ++t) {
    Rng rng = make_rng(8, "inv", t);
    const HermitianMatrix a = random_psd(3, rng);
    const Superoperator s = superoperator_of_derivative(ScalarFunction::log(1.0), a);
    const Superoperator inv = invert_superoperator(s);
    EXPECT_LT(oracle::max_dev(inv.matrix * s.matrix, CMatrix::Identity(9, 9)), 1e-8);
  }
  const Superoperator zero{2, CMatrix::Zero(4, 4)};
  EXPECT_THROW(invert_superoperator(zero), SingularSuperoperator);
}

TEST(FrechetNorm, Examples) {
  Rng rng = make_rng(9, "fn");
  EXPECT_NEAR(frechet_norm(ScalarFunction::identity(), random_hermitian(3, rng)), 1.0, 1e-12);
  EXPECT_NEAR(frechet_norm(kSquare, HermitianMatrix::diagonal({1.0, 2.0})), 4.0, 1e-12);
}

TEST(FrechetNorm, DominatesRandomDirections) {
  for (int t = 0; t < 10; ++t) {
    Rng rng = make_rng(10, "fn-dir", t);
    const HermitianMatrix a = random_psd(3, rng);
    const ScalarFunction f = (t % 2) ? ScalarFunction::xlogx() : ScalarFunction::exp(0.7);
    const double norm = frechet_norm(f, a);
    for (int k = 0; k < 100; ++k) {
      const HermitianMatrix e = random_hermitian(3, rng);
      EXPECT_LE(frechet_derivative(f, a, e).matrix().norm() / e.matrix().norm(), norm * (1 + 1e-10));
    }
  }
}

TEST(FrechetRules, LinearityProductChainTraceAndSymmetry) {
  const ScalarFunction f = ScalarFunction::exp(0.5);
  const ScalarFunction g = ScalarFunction::xlogx();
  for (int t = 0; t < 20; ++t) {
    Rng rng = make_rng(11, "rules", t);
    const int d = 1 + t % 4;
    const HermitianMatrix a = random_psd(d, rng);
    const HermitianMatrix x = random_hermitian(d, rng, 0.1);
    const HermitianMatrix y = random_hermitian(d, rng, 0.1);
    const double al = 1.3;
    const double be = -0.4;
    ScalarFunction lin;
    lin.domain = SpectralInterval::nonnegative();
    lin.eval = [&](int k, double v) { return al * f.derivative(k, v) + be * g.derivative(k, v); };
    const CMatrix want = al * frechet_derivative(f, a, x).matrix() + be * frechet_derivative(g, a, x).matrix();
    EXPECT_LT(oracle::max_dev(frechet_derivative(lin, a, x).matrix(), want), 1e-9);

    // Product rule: D(f·g) for commuting spectral functions equals Df·g + f·Dg, against finite differences.
    auto prod = [](const CMatrix& m) { return CMatrix((0.5 * m).exp() * (m * m.log())); };
    const CMatrix fd = fd_first(prod, a, x);
    const CMatrix fa = oracle::mexp(0.5 * a.matrix());
    const CMatrix ga = oracle::xlogx(a.matrix());
    const CMatrix rule = frechet_derivative(f, a, x).matrix() * ga + fa * frechet_derivative(g, a, x).matrix();
    EXPECT_LT(rel_err(rule, fd), 1e-6);

    // Chain rule: exp(A²) through D exp[A²](DA²[A](X)).
    auto chain = [](const CMatrix& m) { return CMatrix((m * m).exp()); };
    const HermitianMatrix a2 = square(a);
    const CMatrix via = frechet_derivative(ScalarFunction::exp(), a2, frechet_derivative(kSquare, a, x)).matrix();
    EXPECT_LT(rel_err(via, fd_first(chain, a, x)), 1e-6);

    // Tr Df[A](X) = Tr X f'(A).
    const CMatrix fprime = oracle::mlog(a.matrix()) + CMatrix::Identity(d, d);
    EXPECT_NEAR(trace(frechet_derivative(g, a, x)), (x.matrix() * fprime).trace().real(), 1e-8);

    // Tr D²f[A](X, Y) = <X, Df'[A](Y)> = <Y, Df'[A](X)>.
    ScalarFunction gp;
    gp.domain = SpectralInterval::positive();
    gp.eval = [&](int k, double v) { return g.derivative(k + 1, v); };
    const double lhs = trace(frechet_second(g, a, x, y));
    EXPECT_NEAR(lhs, hs_inner(x, frechet_derivative(gp, a, y)), 1e-8);
    EXPECT_NEAR(lhs, hs_inner(y, frechet_derivative(gp, a, x)), 1e-8);
  }
}

TEST(FrechetRules, BasisIndependence) {
  for (int t = 0; t < 10; ++t) {
    Rng rng = make_rng(12, "basis", t);
    const HermitianMatrix a = random_psd(3, rng);
    const HermitianMatrix e = random_hermitian(3, rng);
    const CMatrix u = random_unitary(3, rng);
    const auto lhs = frechet_derivative(ScalarFunction::xlogx(), conjugate_by(u, a), conjugate_by(u, e));
    const auto rhs = conjugate_by(u, frechet_derivative(ScalarFunction::xlogx(), a, e));
    EXPECT_LT(oracle::max_dev(lhs.matrix(), rhs.matrix()), 1e-9);
  }
}

TEST(Multivariate, ReductionToSingleVariable) {
  Rng rng = make_rng(13, "mv1");
  const HermitianMatrix a = random_psd(3, rng);
  const HermitianMatrix e = random_hermitian(3, rng);
  MultivariateFunction f;
  f.n = 1;
  f.value = [](std::span<const double> x) { return std::exp(x[0]); };
  const HermitianMatrix xs[] = {a};
  EXPECT_LT(oracle::max_dev(multivariate_partial_frechet(f, xs, 0, e).matrix(),
                            frechet_derivative(ScalarFunction::exp(), a, e).matrix()),
            1e-6);
}

TEST(Multivariate, LinearFunctionHasIdentityPartial) {
  Rng rng = make_rng(14, "mv2");
  MultivariateFunction f;
  f.n = 2;
  f.value = [](std::span<const double> x) { return x[0] + x[1]; };
  const CMatrix u = random_unitary(2, rng);
  const HermitianMatrix xs[] = {conjugate_by(u, HermitianMatrix::diagonal({0.2, 0.9})),
                                conjugate_by(u, HermitianMatrix::diagonal({0.5, 0.1}))};
  const HermitianMatrix e = random_hermitian(2, rng);
  EXPECT_LT(oracle::max_dev(multivariate_partial_frechet(f, xs, 0, e).matrix(), e.matrix()), 1e-8);
}

TEST(Multivariate, ProductOfDiagonalInputs) {
  Rng rng = make_rng(15, "mv3");
  MultivariateFunction f;
  f.n = 2;
  f.value = [](std::span<const double> x) { return x[0] * x[1]; };
  const HermitianMatrix x1 = HermitianMatrix::diagonal({0.2, 0.7, 0.4});
  const HermitianMatrix x2 = HermitianMatrix::diagonal({0.9, 0.3, 0.6});
  const HermitianMatrix xs[] = {x1, x2};
  const JointSpectrum js = joint_diagonalize(xs);
  const RMatrix table = multivariate_divided_difference_table(f, js, 0);
  // φ₁(λ̄_k, λ̄_l) = ½(x₂(k) + x₂(l)) for the bilinear f.
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) EXPECT_NEAR(table(k, l), 0.5 * (js.eig[1](k) + js.eig[1](l)), 1e-9);
  const HermitianMatrix e = random_hermitian(3, rng, 0.1);
  const auto g = [&](const CMatrix& m) { return CMatrix(0.5 * (m * x2.matrix() + x2.matrix() * m)); };
  const CMatrix fd = oracle::central_difference(g, x1.matrix(), e.matrix(), 1e-5);
  EXPECT_LT(oracle::max_dev(multivariate_partial_frechet(f, xs, 0, e).matrix(), fd), 1e-7);
}

TEST(Multivariate, NonCommutingInputsRejected) {
  const HermitianMatrix x1 = HermitianMatrix::diagonal({0.0, 1.0});
  CMatrix m(2, 2);
  m << 0.5, 0.5, 0.5, 0.5;
  const HermitianMatrix xs[] = {x1, HermitianMatrix(m)};
  EXPECT_THROW(joint_diagonalize(xs), NotCommuting);
}

TEST(InverseMap, IdentityBasePoint) {
  Rng rng = make_rng(16, "inv-id");
  const HermitianMatrix e = random_hermitian(3, rng);
  const InverseDerivatives r = inverse_map_derivatives(HermitianMatrix::identity(3), e, HermitianMatrix(3));
  EXPECT_LT(oracle::max_dev(r.first.matrix(), -e.matrix()), 1e-13);
  EXPECT_LT(oracle::max_dev(r.second.matrix(), 2.0 * e.matrix() * e.matrix()), 1e-13);
}

TEST(InverseMap, ScalarCalculus) {
  const double a = 1.7;
  const double h = 0.3;
  // g(t) = (a + th)², g⁻¹ has first derivative −2h/a³ and second 6h²/a⁴.
  const InverseDerivatives r = inverse_map_derivatives(HermitianMatrix::scalar(a * a), HermitianMatrix::scalar(2 * a * h),
                                                       HermitianMatrix::scalar(2 * h * h));
  EXPECT_NEAR(r.first(0, 0).real(), -2 * h / std::pow(a, 3), 1e-13);
  EXPECT_NEAR(r.second(0, 0).real(), 6 * h * h / std::pow(a, 4), 1e-13);
}

TEST(InverseMap, MatchesFiniteDifferenceOfInverse) {
  for (int t = 0; t < 20; ++t) {
    Rng rng = make_rng(17, "inv-fd", t);
    const HermitianMatrix g = random_psd(3, rng);
    const HermitianMatrix dg = random_hermitian(3, rng, 0.1);
    const InverseDerivatives r = inverse_map_derivatives(g, dg, HermitianMatrix(3));
    const auto inv = [](const CMatrix& m) { return CMatrix(m.inverse()); };
    const double h = 1e-6;
    const CMatrix fd = oracle::central_difference(inv, g.matrix(), dg.matrix(), h);
    EXPECT_LT(oracle::max_dev(r.first.matrix(), fd), 1e-7 * (1 + fd.norm()));
  }
}

TEST(InducedNorm, IdentityMapHasNormOne) {
  EXPECT_NEAR(induced_norm([](const HermitianMatrix& e) { return e; }, 3), 1.0, 1e-12);
  EXPECT_EQ(hermitian_basis(3).size(), 9U);
}
