#include <gtest/gtest.h>

#include <cmath>

#include "matphi/errors.hpp"
#include "matphi/linalg.hpp"
#include "matphi/random.hpp"
#include "matphi/report.hpp"
#include "oracle.hpp"

using namespace matphi;

namespace {

CMatrix reconstruct(const Spectrum& s) {
  return s.vectors * s.values.cast<Complex>().asDiagonal() * s.vectors.adjoint();
}

}  // namespace

TEST(Hermitian, RejectsNonHermitianInput) {
  CMatrix m(2, 2);
  m << 1.0, 2.0, 0.0, 1.0;
  EXPECT_THROW(HermitianMatrix{m}, NotHermitian);
}

TEST(Hermitian, AcceptsRoundoffAsymmetryAndSymmetrizes) {
  CMatrix m(2, 2);
  m << 1.0, Complex(2.0, 1.0), Complex(2.0 + 1e-13, -1.0), 3.0;
  HermitianMatrix h(m);
  EXPECT_EQ(h(0, 1), std::conj(h(1, 0)));
}

TEST(SpectralDecompose, IdentityHasUnitSpectrum) {
  const Spectrum s = spectral_decompose(HermitianMatrix::identity(2));
  EXPECT_NEAR(s.values(0), 1.0, 1e-15);
  EXPECT_NEAR(s.values(1), 1.0, 1e-15);
  EXPECT_LT(oracle::max_dev(reconstruct(s), CMatrix::Identity(2, 2)), 1e-12);
}

TEST(SpectralDecompose, DiagonalIsSortedAscendingWithPermutationVectors) {
  const Spectrum s = spectral_decompose(HermitianMatrix::diagonal({3.0, -1.0}));
  EXPECT_DOUBLE_EQ(s.values(0), -1.0);
  EXPECT_DOUBLE_EQ(s.values(1), 3.0);
  EXPECT_NEAR(std::abs(s.vectors(1, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(s.vectors(0, 1)), 1.0, 1e-14);
}

TEST(SpectralDecompose, RandomReconstructionAndUnitarity) {
  for (int t = 0; t < 50; ++t) {
    Rng rng = make_rng(11, "spectral", t);
    const HermitianMatrix a = random_hermitian(4, rng);
    const Spectrum s = spectral_decompose(a);
    EXPECT_LT(oracle::max_dev(reconstruct(s), a.matrix()), 1e-10);
    EXPECT_LT(oracle::max_dev(s.vectors.adjoint() * s.vectors, CMatrix::Identity(4, 4)), tol_spec(4));
    for (int i = 1; i < 4; ++i) EXPECT_LE(s.values(i - 1), s.values(i));
  }
}

TEST(StandardFunction, IdentityReturnsInput) {
  Rng rng = make_rng(1, "id");
  const HermitianMatrix a = random_hermitian(3, rng);
  EXPECT_LT(oracle::max_dev(apply_standard_function([](double x) { return x; }, a).matrix(), a.matrix()), 1e-12);
}

TEST(StandardFunction, SquareOnDiagonal) {
  const HermitianMatrix r = apply_standard_function([](double x) { return x * x; }, HermitianMatrix::diagonal({1, 2}));
  EXPECT_LT(oracle::max_dev(r.matrix(), HermitianMatrix::diagonal({1, 4}).matrix()), 1e-14);
}

TEST(StandardFunction, XlogxAtHalfIdentity) {
  const HermitianMatrix r = apply_standard_function(oracle::xlogx_scalar, 0.5 * HermitianMatrix::identity(2));
  const double v = 0.5 * std::log(0.5);
  EXPECT_NEAR(v, -0.3466, 1e-4);
  EXPECT_LT(oracle::max_dev(r.matrix(), v * CMatrix::Identity(2, 2)), 1e-15);
}

TEST(StandardFunction, MatchesSchurParlettOracle) {
  for (int t = 0; t < 20; ++t) {
    Rng rng = make_rng(2, "sp", t);
    const HermitianMatrix a = random_psd(3, rng);
    const auto mine = apply_standard_function([](double x) { return std::exp(x); }, a);
    EXPECT_LT(oracle::max_dev(mine.matrix(), oracle::mexp(a.matrix())), 1e-9 * (1 + mine.matrix().norm()));
    const auto lg = apply_standard_function([](double x) { return std::log(x); }, a, SpectralInterval::positive());
    EXPECT_LT(oracle::max_dev(lg.matrix(), oracle::mlog(a.matrix())), 1e-8);
  }
}

TEST(StandardFunction, DomainViolationThrowsAndRoundoffIsClamped) {
  const auto sqrt_fn = [](double x) { return std::sqrt(x); };
  EXPECT_THROW(apply_standard_function(sqrt_fn, HermitianMatrix::diagonal({1.0, -0.1}), SpectralInterval::nonnegative()),
               SpectrumOutOfDomain);
  const auto r = apply_standard_function(sqrt_fn, HermitianMatrix::diagonal({1.0, -1e-12}), SpectralInterval::nonnegative());
  EXPECT_EQ(r(1, 1).real(), 0.0);
}

TEST(StandardFunction, SpectralMappingProperty) {
  for (int t = 0; t < 30; ++t) {
    Rng rng = make_rng(3, "map", t);
    const HermitianMatrix a = random_hermitian(3, rng);
    const auto f = [](double x) { return x * x * x - x; };
    const auto fa = apply_standard_function(f, a);
    std::vector<double> expect;
    for (int i = 0; i < 3; ++i) expect.push_back(f(a.spectrum().values(i)));
    std::sort(expect.begin(), expect.end());
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(fa.spectrum().values(i), expect[static_cast<std::size_t>(i)], tol_spec(3));
  }
}

TEST(Trace, NormalizedTraceExamples) {
  EXPECT_DOUBLE_EQ(normalized_trace(HermitianMatrix::identity(5)), 1.0);
  EXPECT_DOUBLE_EQ(normalized_trace(HermitianMatrix::diagonal({2.0, 0.0})), 1.0);
  for (int t = 0; t < 20; ++t) {
    Rng rng = make_rng(4, "tr", t);
    const HermitianMatrix a = random_hermitian(4, rng);
    EXPECT_NEAR(normalized_trace(a), a.spectrum().values.mean(), 1e-12);
  }
}

TEST(Trace, ConvexityOfNormalizedTrace) {
  const auto f = [](double x) { return std::exp(x); };
  for (int t = 0; t < 1000; ++t) {
    Rng rng = make_rng(5, "jensen", t);
    const HermitianMatrix a = random_hermitian(1 + t % 4, rng);
    EXPECT_GE(normalized_trace(apply_standard_function(f, a)), f(normalized_trace(a)) - 1e-10);
  }
}

TEST(Schatten, Examples) {
  EXPECT_NEAR(schatten_norm(HermitianMatrix::identity(3), 2.0), std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(schatten_norm(HermitianMatrix::diagonal({3.0, -4.0}), 1.0), 7.0, 1e-14);
}

// The unnormalized norm is nonincreasing in p; the normalized one is a power mean and nondecreasing.
TEST(Schatten, MonotoneInP) {
  for (int t = 0; t < 50; ++t) {
    Rng rng = make_rng(6, "sch", t);
    const HermitianMatrix a = random_hermitian(4, rng);
    double prev_plain = kInf;
    double prev_norm = 0.0;
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      const double plain = schatten_norm(a, p);
      const double norm = schatten_norm(a, p, true);
      EXPECT_LE(plain, prev_plain + 1e-12);
      EXPECT_GE(norm, prev_norm - 1e-12);
      prev_plain = plain;
      prev_norm = norm;
    }
  }
}

TEST(Schatten, RejectsExponentBelowOne) {
  EXPECT_THROW(schatten_norm(HermitianMatrix::identity(2), 0.5), InvalidExponent);
}

TEST(Schatten, TriangleInequality) {
  for (int t = 0; t < 50; ++t) {
    Rng rng = make_rng(7, "tri", t);
    const HermitianMatrix a = random_hermitian(3, rng);
    const HermitianMatrix b = random_hermitian(3, rng);
    for (double p : {1.0, 2.0}) EXPECT_LE(schatten_norm(a + b, p), schatten_norm(a, p) + schatten_norm(b, p) + 1e-12);
  }
}

TEST(PositivePart, Examples) {
  Rng rng = make_rng(8, "pp");
  const HermitianMatrix psd = random_psd(3, rng);
  EXPECT_LT(oracle::max_dev(positive_part(psd).matrix(), psd.matrix()), 1e-12);
  EXPECT_LT(oracle::max_dev(positive_part(HermitianMatrix::diagonal({2, -3})).matrix(),
                            HermitianMatrix::diagonal({2, 0}).matrix()),
            1e-15);
}

TEST(PositivePart, TraceNormIdentityIdempotenceAndHomogeneity) {
  for (int t = 0; t < 50; ++t) {
    Rng rng = make_rng(9, "ppp", t);
    const HermitianMatrix a = random_hermitian(4, rng);
    EXPECT_NEAR(schatten_norm(a, 1.0), trace(positive_part(a)) + trace(negative_part(a)), 1e-10);
    EXPECT_LT(oracle::max_dev(positive_part(positive_part(a)).matrix(), positive_part(a).matrix()), 1e-12);
    EXPECT_LT(oracle::max_dev(positive_part(2.5 * a).matrix(), (2.5 * positive_part(a)).matrix()), 1e-12);
  }
}

TEST(Loewner, Examples) {
  Rng rng = make_rng(10, "lw");
  const HermitianMatrix a = random_hermitian(3, rng);
  EXPECT_TRUE(loewner_leq(a, a, 1e-12).holds);
  EXPECT_TRUE(loewner_leq(HermitianMatrix(2), HermitianMatrix::diagonal({1, 2}), 1e-12).holds);
  const auto x = HermitianMatrix::diagonal({1, 0});
  const auto y = HermitianMatrix::diagonal({0, 1});
  const LoewnerResult r1 = loewner_leq(x, y, 1e-12);
  const LoewnerResult r2 = loewner_leq(y, x, 1e-12);
  EXPECT_FALSE(r1.holds);
  EXPECT_FALSE(r2.holds);
  // The witness direction v has v†(B − A)v < 0.
  for (const auto& [r, a2, b2] : {std::tuple{r1, x, y}, std::tuple{r2, y, x}}) {
    const CMatrix d = b2.matrix() - a2.matrix();
    EXPECT_LT((r.witness.adjoint() * d * r.witness)(0, 0).real(), 0.0);
  }
}

TEST(Random, PsdSamplerContract) {
  for (int t = 0; t < 200; ++t) {
    Rng rng = make_rng(12, "psd", t);
    const HermitianMatrix a = random_psd(1 + t % 4, rng);
    EXPECT_GE(a.min_eigenvalue(), 1e-3 - 1e-12);
    EXPECT_LE(operator_norm(a), 10.0 + 1e-9);
  }
}

TEST(Random, StreamsAreDeterministic) {
  Rng a = make_rng(5, "x", 3);
  Rng b = make_rng(5, "x", 3);
  Rng c = make_rng(5, "x", 4);
  const auto va = a.next();
  EXPECT_EQ(va, b.next());
  EXPECT_NE(va, c.next());
}

TEST(MatrixJson, RoundTrip) {
  Rng rng = make_rng(13, "json");
  const HermitianMatrix a = random_hermitian(3, rng);
  EXPECT_EQ(oracle::max_dev(matrix_from_json(Json::parse(matrix_to_json(a).dump())).matrix(), a.matrix()), 0.0);
}

TEST(MatrixJson, RejectsMalformed) {
  EXPECT_ANY_THROW(matrix_from_json(Json{{"d", 2}, {"re", {1.0, 0.0, 0.0}}, {"im", {0.0, 0.0, 0.0}}}));
}
