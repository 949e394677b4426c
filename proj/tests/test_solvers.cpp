#include <gtest/gtest.h>

#include "oracles.hpp"
#include "specmap/solvers.hpp"
#include "support.hpp"

using namespace specmap;
using namespace specmap::test;

namespace {

const SolverTolerances kTight{100000, 1e-13, 0.0};

}  // namespace

// ---- pseudo_inverse -------------------------------------------------------

TEST(PseudoInverse, Identity) {
  EXPECT_TRUE(pseudo_inverse(Matrix::Identity(4, 4)).isApprox(Matrix::Identity(4, 4), 1e-15));
}

TEST(PseudoInverse, SingularDiagonal) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 2.0;
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 0.5;
  EXPECT_LT((pseudo_inverse(m) - expected).norm(), 1e-15);
}

TEST(PseudoInverse, LeftInverseOfTallFullRank) {
  Rng rng(1, "pinv");
  const Matrix m = random_matrix(rng, 5, 3);
  EXPECT_LT((pseudo_inverse(m) * m - Matrix::Identity(3, 3)).norm(), 1e-10);
}

TEST(PseudoInverse, EmptyThrows) { EXPECT_THROW(pseudo_inverse(Matrix()), std::invalid_argument); }

TEST(PseudoInverse, MoorePenroseIdentities) {
  Rng rng(2, "pinv");
  for (int c = 0; c < 200; ++c) {
    const int rows = random_int(rng, 1, 20), cols = random_int(rng, 1, 20);
    Matrix m = random_matrix(rng, rows, cols);
    if (c % 3 == 0 && std::min(rows, cols) > 1) {  // rank-deficient cases too
      const int k = random_int(rng, 1, std::min(rows, cols) - 1);
      m = random_matrix(rng, rows, k) * random_matrix(rng, k, cols);
    }
    const Matrix p = pseudo_inverse(m);
    const double s = 1.0 + m.norm() * p.norm();
    EXPECT_LT((m * p * m - m).norm(), 1e-9 * s);
    EXPECT_LT((p * m * p - p).norm(), 1e-9 * s * p.norm());
    EXPECT_LT(((m * p).transpose() - m * p).norm(), 1e-9 * s);
    EXPECT_LT(((p * m).transpose() - p * m).norm(), 1e-9 * s);
  }
}

// ---- omp_1sparse ----------------------------------------------------------

TEST(Omp, OrthonormalDictionary) {
  const Vector u = (Vector(2) << 0, 3).finished();
  const OmpResult r = omp_1sparse(u, Matrix::Identity(2, 2));
  EXPECT_TRUE(r.detected);
  EXPECT_EQ(r.support, 1);
  EXPECT_EQ(r.coefficients, u);
}

TEST(Omp, OrthogonalInputIsNoDetection) {
  Matrix d = Matrix::Zero(3, 2);
  d(0, 0) = 1;
  d(1, 1) = 2;
  const OmpResult r = omp_1sparse((Vector(3) << 0, 0, 5).finished(), d);
  EXPECT_FALSE(r.detected);
  EXPECT_EQ(r.support, 0);
  EXPECT_TRUE(r.coefficients.isZero(0.0));
}

TEST(Omp, ZeroInputIsNoDetection) {
  Rng rng(3, "omp");
  const OmpResult r = omp_1sparse(Vector::Zero(6), random_matrix(rng, 6, 10));
  EXPECT_FALSE(r.detected);
  EXPECT_TRUE(r.coefficients.isZero(0.0));
}

TEST(Omp, RecoversScaledColumn) {
  Rng rng(4, "omp");
  const Matrix d = random_matrix(rng, 6, 10);
  const Vector u = 2.0 * d.col(4) + 1e-3 * random_vector(rng, 6);
  const OmpResult r = omp_1sparse(u, d);
  const ExhaustiveFit ex = exhaustive_1sparse(u, d);
  EXPECT_EQ(r.support, 4);
  EXPECT_EQ(ex.index, 4);
  EXPECT_NEAR(r.coefficients(4), 2.0, 1e-2);
  EXPECT_NEAR(r.coefficients(4), ex.coefficient, 1e-12);
  EXPECT_EQ((r.coefficients.array() != 0.0).count(), 1);
}

TEST(Omp, ZeroColumnsSkippedAndTiesToLowestIndex) {
  Matrix d = Matrix::Zero(2, 4);
  d(0, 1) = 1.0;
  d(0, 2) = 2.0;  // same direction as column 1
  d(1, 3) = 1.0;
  const OmpResult r = omp_1sparse((Vector(2) << 3, 0).finished(), d);
  EXPECT_EQ(r.support, 1);
  EXPECT_DOUBLE_EQ(r.coefficients(1), 3.0);
}

TEST(Omp, ScalarDictionaryTiesGoToFirstColumn) {
  const Matrix d = (Matrix(1, 4) << 0.3, -0.7, 1.9, 0.1).finished();
  const OmpResult r = omp_1sparse((Vector(1) << 2.5).finished(), d);
  EXPECT_EQ(r.support, 0);
  EXPECT_NEAR(r.coefficients(0), 2.5 / 0.3, 1e-12);
}

TEST(Omp, MatchesExhaustiveSearch) {
  Rng rng(5, "omp-exhaustive");
  for (int c = 0; c < 1000; ++c) {
    // n >= 2 so exact ties have probability zero; n = 1 ties are covered above.
    const int n = random_int(rng, 2, 12), p = random_int(rng, 1, 50);
    const Matrix d = random_matrix(rng, n, p);
    const Vector u = random_vector(rng, n);
    const OmpResult r = omp_1sparse(u, d);
    const ExhaustiveFit ex = exhaustive_1sparse(u, d);
    ASSERT_EQ(r.detected, ex.found);
    ASSERT_EQ(r.support, ex.index);
    ASSERT_NEAR(r.coefficients(r.support), ex.coefficient, 1e-12 * (1.0 + std::abs(ex.coefficient)));
    ASSERT_LE((r.coefficients.array() != 0.0).count(), 1);
  }
}

// ---- lasso ----------------------------------------------------------------

TEST(Lasso, ZeroLambdaIsLeastSquares) {
  Rng rng(6, "lasso");
  const Matrix d = random_matrix(rng, 4, 4) + 3.0 * Matrix::Identity(4, 4);
  const Matrix yt = random_matrix(rng, 4, 3);
  const LassoResult r = lasso(yt, d, 0.0, kTight);
  EXPECT_TRUE(r.converged);
  EXPECT_LT((r.B - d.lu().solve(yt).transpose()).norm(), 1e-9);
}

TEST(Lasso, FullShrinkageThreshold) {
  Rng rng(7, "lasso");
  Matrix d = random_matrix(rng, 8, 3);
  d.colwise().normalize();
  const Matrix yt = random_matrix(rng, 8, 2);
  const double lambda = 2.0 * (d.transpose() * yt).cwiseAbs().maxCoeff();
  EXPECT_TRUE(lasso(yt, d, lambda, kTight).B.isZero(0.0));
}

TEST(Lasso, NegativeLambdaThrows) {
  EXPECT_THROW(lasso(Matrix::Zero(2, 1), Matrix::Identity(2, 2), -1.0, kTight), std::invalid_argument);
}

TEST(Lasso, AbsZeroSnapsSmallEntries) {
  const Matrix d = Matrix::Identity(2, 2);
  const Matrix yt = (Matrix(2, 1) << 1.0, 1e-6).finished();
  const LassoResult r = lasso(yt, d, 0.0, {1000, 1e-12, 1e-3});
  EXPECT_EQ(r.B(0, 1), 0.0);
  EXPECT_NEAR(r.B(0, 0), 1.0, 1e-12);
}

TEST(Lasso, WarmStartGivesSameAnswer) {
  Rng rng(8, "lasso");
  const Matrix d = random_matrix(rng, 8, 3);
  const Matrix yt = random_matrix(rng, 8, 2);
  const LassoResult cold = lasso(yt, d, 0.1, kTight);
  const LassoResult warm = lasso(yt, d, 0.1, kTight, random_matrix(rng, 2, 3));
  EXPECT_LT((cold.B - warm.B).norm(), 1e-8);
}

TEST(Lasso, MatchesProximalGradientOracle) {
  Rng rng(9, "lasso-oracle");
  for (int c = 0; c < 100; ++c) {
    const Matrix d = random_matrix(rng, 8, 3);
    const Matrix yt = random_matrix(rng, 8, 2);
    const double lambda = 0.1;
    const LassoResult r = lasso(yt, d, lambda, kTight);
    ASSERT_TRUE(r.converged);
    double oracle = 0.0;
    for (Eigen::Index k = 0; k < yt.cols(); ++k) {
      const Vector x = lasso_fista(yt.col(k), d, lambda, 100000);
      oracle += lasso_value(yt.col(k), d, x, lambda);
    }
    const double got = lasso_objective(yt, d, r.B, lambda);
    ASSERT_NEAR(got, oracle, 1e-6);
    ASSERT_LE(got, oracle + 1e-9);
  }
}

TEST(Lasso, SweepObjectiveNonIncreasing) {
  Rng rng(10, "lasso-sweeps");
  for (int c = 0; c < 50; ++c) {
    const int n = random_int(rng, 3, 20), r = random_int(rng, 1, 6), k = random_int(rng, 1, 5);
    const Matrix d = random_matrix(rng, n, r);
    const Matrix yt = random_matrix(rng, n, k);
    const LassoResult res = lasso(yt, d, rng.uniform(0.0, 1.0), kTight);
    ASSERT_FALSE(res.sweep_objective.empty());
    for (std::size_t s = 1; s < res.sweep_objective.size(); ++s)
      ASSERT_LE(res.sweep_objective[s], res.sweep_objective[s - 1] * (1 + 1e-14) + 1e-14);
  }
}

// ---- smoothed_ls ----------------------------------------------------------

TEST(SmoothedLs, ZeroLambdaIsLeastSquares) {
  Rng rng(11, "sls");
  const Matrix d = random_matrix(rng, 7, 3);
  const Matrix y3 = random_matrix(rng, 9, 7);
  const Matrix ls = y3 * d * (d.transpose() * d).inverse();
  EXPECT_LT((smoothed_ls(y3, d, 0.0) - ls).norm(), 1e-10 * ls.norm());
}

TEST(SmoothedLs, HugeLambdaGivesConstantMean) {
  Rng rng(12, "sls");
  const Matrix y3 = random_matrix(rng, 10, 4);
  const Matrix c = smoothed_ls(y3, Matrix::Ones(4, 1), 1e12);
  const double mean = y3.mean();
  for (Eigen::Index t = 0; t < 10; ++t) EXPECT_NEAR(c(t, 0), mean, 1e-6);
}

TEST(SmoothedLs, NegativeLambdaThrows) {
  EXPECT_THROW(smoothed_ls(Matrix::Zero(3, 2), Matrix::Ones(2, 1), -1.0), std::invalid_argument);
}

TEST(SmoothedLs, MatchesKroneckerOracle) {
  Rng rng(13, "sls-oracle");
  for (int c = 0; c < 100; ++c) {
    const int t = random_int(rng, 1, 12), r = random_int(rng, 1, 4), k = random_int(rng, r, 12);
    const Matrix d = random_matrix(rng, k, r);
    const Matrix y3 = random_matrix(rng, t, k);
    const double lambda = c == 0 ? 0.0 : std::pow(10.0, rng.uniform(-3.0, 3.0));
    const Matrix got = smoothed_ls(y3, d, lambda);
    const Matrix oracle = smoothed_ls_kron(y3, d, lambda);
    ASSERT_LT((got - oracle).norm(), 1e-8 * std::max(1.0, oracle.norm()));

    const Matrix l = first_difference(t);
    const Matrix rhs = y3 * d;
    const Matrix resid = got * (d.transpose() * d) + lambda * l.transpose() * l * got - rhs;
    ASSERT_LE(resid.norm(), 1e-8 * rhs.norm() + 1e-300);
  }
}

// ---- rls_gamma ------------------------------------------------------------

TEST(RlsGamma, ZeroResidualGivesZero) {
  Rng rng(14, "rls");
  EXPECT_TRUE(rls_gamma(Matrix::Zero(4, 20), random_matrix(rng, 3, 20), 1.0).isZero(0.0));
}

TEST(RlsGamma, IdentityDataLimit) {
  Rng rng(15, "rls");
  const Matrix e1 = random_matrix(rng, 4, 5);
  EXPECT_LT((rls_gamma(e1, Matrix::Identity(5, 5), 1e-12) - e1).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(RlsGamma, NonPositiveLambdaThrows) {
  EXPECT_THROW(rls_gamma(Matrix::Zero(2, 3), Matrix::Zero(2, 3), 0.0), std::invalid_argument);
  EXPECT_THROW(rls_gamma(Matrix::Zero(2, 3), Matrix::Zero(2, 3), -1.0), std::invalid_argument);
}

TEST(RlsGamma, GradientVanishesAndMatchesCg) {
  Rng rng(16, "rls-oracle");
  for (int c = 0; c < 100; ++c) {
    const Matrix e1 = random_matrix(rng, 4, 20);
    const Matrix x1 = random_matrix(rng, 3, 20);
    const double lambda = std::pow(10.0, rng.uniform(-3.0, 2.0));
    const Matrix g = rls_gamma(e1, x1, lambda);
    const Matrix grad = 2.0 * (g * x1 - e1) * x1.transpose() + 2.0 * lambda * g;
    ASSERT_LE(grad.norm(), 1e-8 * e1.norm());
    ASSERT_LT((g - ridge_cg(e1, x1, lambda)).norm(), 1e-8 * std::max(1.0, g.norm()));
  }
}

TEST(RlsGamma, NormShrinksWithLambda) {
  Rng rng(17, "rls-monotone");
  for (int c = 0; c < 20; ++c) {
    const Matrix e1 = random_matrix(rng, 5, 30);
    const Matrix x1 = random_matrix(rng, 4, 30);
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda = 1e-4; lambda <= 1e4; lambda *= 3.0) {
      const double n = rls_gamma(e1, x1, lambda).norm();
      ASSERT_LE(n, prev * (1 + 1e-12));
      prev = n;
    }
  }
}
