#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "scusum/spectral.hpp"

using namespace scusum;

namespace {

GraphSnapshot snap(std::int64_t t, Matrix w) { return {t, std::move(w), Convention::kSymmetric}; }

Matrix random_symmetric(std::mt19937_64& gen, int n) {
  std::normal_distribution<double> z;
  Matrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) M(i, j) = M(j, i) = z(gen);
  return M;
}

}  // namespace

TEST(SlidingMean, AveragesWindow) {
  WindowBuffer buf(2);
  Matrix a(2, 2), b(2, 2), expected(2, 2);
  a << 0, 1, 1, 0;
  b << 2, 1, 1, 2;
  expected << 1, 1, 1, 1;
  buf.push(snap(1, a));
  EXPECT_THROW(sliding_mean(buf), std::invalid_argument);
  buf.push(snap(2, b));
  EXPECT_EQ(sliding_mean(buf), expected);
}

TEST(SlidingMean, IdenticalAndSingleSnapshots) {
  Matrix M(3, 3);
  M << 1, 2, 3, 2, 5, 6, 3, 6, 9;
  WindowBuffer buf(4);
  for (int t = 1; t <= 6; ++t) buf.push(snap(t, M));
  EXPECT_EQ(buf.size(), 4);
  EXPECT_EQ(buf.snapshots().front().t, 3);
  EXPECT_TRUE(sliding_mean(buf).isApprox(M, 1e-15));

  WindowBuffer one(1);
  one.push(snap(1, M));
  EXPECT_EQ(sliding_mean(one), M);
}

TEST(SlidingMean, SymmetrizesIidFull) {
  Matrix G(2, 2), expected(2, 2);
  G << 1, 4, 0, 3;
  expected << 1, 2, 2, 3;
  WindowBuffer buf(1);
  buf.push({1, G, Convention::kIidFull});
  EXPECT_EQ(sliding_mean(buf), expected);
}

TEST(WindowBufferTest, RejectsMismatchedSnapshots) {
  WindowBuffer buf(3);
  buf.push(snap(1, Matrix::Zero(2, 2)));
  EXPECT_THROW(buf.push(snap(2, Matrix::Zero(3, 3))), std::invalid_argument);
  EXPECT_THROW(buf.push(snap(1, Matrix::Zero(2, 2))), std::invalid_argument);
  EXPECT_THROW(WindowBuffer(0), std::invalid_argument);
}

TEST(TopMEigs, Diagonal) {
  Matrix M(2, 2);
  M << 2, 0, 0, 1;
  const auto est = top_m_eigs(M, 2);
  EXPECT_NEAR(est.eigenvalues(0), 2.0, 1e-14);
  EXPECT_NEAR(est.eigenvalues(1), 1.0, 1e-14);
  EXPECT_TRUE(est.eigenvectors.isApprox(Matrix::Identity(2, 2), 1e-14));
}

TEST(TopMEigs, OffDiagonalTwoByTwo) {
  // Characteristic polynomial l^2 - 1: top pair (1, (1,1)/sqrt 2).
  Matrix M(2, 2);
  M << 0, 1, 1, 0;
  const auto est = top_m_eigs(M, 1);
  EXPECT_NEAR(est.eigenvalues(0), 1.0, 1e-14);
  EXPECT_NEAR(est.eigenvectors(0, 0), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(est.eigenvectors(1, 0), 1.0 / std::sqrt(2.0), 1e-14);
}

TEST(TopMEigs, BlockMeanMatrix) {
  Matrix M(3, 3);
  M << 1, 1, 0, 1, 1, 0, 0, 0, 1;
  const auto est = top_m_eigs(M, 2);
  EXPECT_NEAR(est.eigenvalues(0), 2.0, 1e-14);
  EXPECT_NEAR(est.eigenvalues(1), 1.0, 1e-14);
  Matrix expected(3, 3);
  expected << .5, .5, 0, .5, .5, 0, 0, 0, 1;
  EXPECT_LE((projector(est) - expected).norm(), 1e-12);
}

TEST(TopMEigs, RejectsBadInput) {
  EXPECT_THROW(top_m_eigs(Matrix::Identity(2, 2), 3), std::invalid_argument);
  EXPECT_THROW(top_m_eigs(Matrix::Identity(2, 2), 0), std::invalid_argument);
  Matrix M(2, 2);
  M << 0, 1, 1.001, 0;
  EXPECT_THROW(top_m_eigs(M, 1), std::invalid_argument);
}

TEST(TopMEigs, MatchesJacobiOracle) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix M = random_symmetric(gen, 5);
    const auto ref = oracle::jacobi_eigen(M);
    const int m = 1 + trial % 5;
    const auto est = top_m_eigs(M, m);
    const double scale = std::max(1.0, M.norm());
    for (int k = 0; k < m; ++k) {
      EXPECT_NEAR(est.eigenvalues(k), ref.values[static_cast<std::size_t>(k)], 1e-9);
      const Vector v = est.eigenvectors.col(k);
      EXPECT_LE((M * v - est.eigenvalues(k) * v).norm(), 1e-8 * scale);
      if (k > 0) EXPECT_GE(est.eigenvalues(k - 1), est.eigenvalues(k));
    }
    const Matrix gram = est.eigenvectors.transpose() * est.eigenvectors;
    EXPECT_LE((gram - Matrix::Identity(m, m)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(TopMEigs, SignConventionAndDeterminism) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix M = random_symmetric(gen, 7);
    const auto a = top_m_eigs(M, 3);
    const auto b = top_m_eigs(M, 3);
    EXPECT_TRUE(a.eigenvectors == b.eigenvectors);
    EXPECT_TRUE(a.eigenvalues == b.eigenvalues);
    for (int k = 0; k < 3; ++k) {
      Eigen::Index arg;
      a.eigenvectors.col(k).cwiseAbs().maxCoeff(&arg);
      EXPECT_GT(a.eigenvectors(arg, k), 0.0);
    }
  }
}

TEST(EstimateSubspace, NoiselessWindowGivesBlockProjector) {
  Matrix M(3, 3);
  M << 1, 1, 0, 1, 1, 0, 0, 0, 1;
  WindowBuffer buf(4);
  for (int t = 1; t <= 4; ++t) buf.push(snap(t, M));
  Matrix expected(3, 3);
  expected << .5, .5, 0, .5, .5, 0, 0, 0, 1;
  EXPECT_LE((projector(estimate_subspace(buf, 2)) - expected).norm(), 1e-12);
}

TEST(EstimateSubspace, ZeroWindowStillRankM) {
  WindowBuffer buf(3);
  for (int t = 1; t <= 3; ++t) buf.push(snap(t, Matrix::Zero(6, 6)));
  const Matrix P = projector(estimate_subspace(buf, 4));
  EXPECT_NEAR(P.trace(), 4.0, 1e-8);
  EXPECT_LE((P * P - P).norm(), 1e-8);
}

TEST(EstimateSubspace, RecoversCommunitySubspaceWithLowNoise) {
  const auto A = build_indicator(assignment_from_sizes(std::vector<int>{12, 6}, 20));
  const Matrix mean = mean_matrix(A);
  Matrix U = A.entries;
  U.col(0) /= std::sqrt(12.0);
  U.col(1) /= std::sqrt(6.0);
  const Matrix truth = U * U.transpose();
  int close = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    Rng rng(derive_seed(77, static_cast<std::uint64_t>(r)));
    WindowBuffer buf(50);
    for (int t = 1; t <= 50; ++t) {
      buf.push(sample_snapshot(mean, 0.1, Convention::kSymmetric, rng, t));
    }
    if ((projector(estimate_subspace(buf, 2)) - truth).norm() <= 0.1) ++close;
  }
  EXPECT_GE(close, 190);
}

TEST(Projector, CoordinateAxes) {
  SpectralEstimate est;
  est.eigenvalues = Vector::Ones(2);
  est.eigenvectors = Matrix::Identity(3, 2);
  Matrix expected = Matrix::Zero(3, 3);
  expected(0, 0) = expected(1, 1) = 1.0;
  EXPECT_EQ(projector(est), expected);
}

TEST(Projector, TraceAndIdempotence) {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + trial % 6;
    const Matrix P = projector(top_m_eigs(random_symmetric(gen, 6), m));
    EXPECT_NEAR(P.trace(), m, 1e-8);
    EXPECT_LE((P * P - P).norm(), 1e-8);
  }
}
