#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "scusum/graph_model.hpp"
#include "scusum/io.hpp"
#include "scusum/spectral.hpp"

using namespace scusum;

namespace {

CommunityAssignment labels(int m, std::vector<int> l) { return {m, std::move(l)}; }

}  // namespace

TEST(BuildIndicator, OneHotRows) {
  const auto A = build_indicator(labels(2, {1, 1, 2}));
  Matrix expected(3, 2);
  expected << 1, 0, 1, 0, 0, 1;
  EXPECT_EQ(A.entries, expected);
  EXPECT_EQ(A.sizes, (std::vector<int>{2, 1}));
}

TEST(BuildIndicator, SingleNode) {
  const auto A = build_indicator(labels(1, {1}));
  EXPECT_EQ(A.entries, Matrix::Ones(1, 1));
}

TEST(BuildIndicator, BackgroundRowIsZero) {
  const auto A = build_indicator(labels(2, {1, kBackground, 2}));
  Matrix expected(3, 2);
  expected << 1, 0, 0, 0, 0, 1;
  EXPECT_EQ(A.entries, expected);
}

TEST(BuildIndicator, RejectsEmptyCommunityAndBadLabel) {
  EXPECT_THROW(build_indicator(labels(2, {1, 1, 1})), std::invalid_argument);
  EXPECT_THROW(build_indicator(labels(2, {1, 3, 2})), std::invalid_argument);
  EXPECT_THROW(build_indicator(labels(2, {-1, 1, 2})), std::invalid_argument);
  EXPECT_THROW(build_indicator(labels(3, {1, 2})), std::invalid_argument);
  EXPECT_THROW(build_indicator(labels(0, {})), std::invalid_argument);
}

TEST(AssignmentFromSizes, ContiguousWithBackground) {
  const std::vector<int> sizes{2, 1};
  const auto a = assignment_from_sizes(sizes, 5);
  EXPECT_EQ(a.labels, (std::vector<int>{1, 1, 2, kBackground, kBackground}));
  EXPECT_THROW(assignment_from_sizes(sizes, 2), std::invalid_argument);
}

TEST(MeanMatrix, BlockStructure) {
  const auto A = build_indicator(labels(2, {1, 1, 2}));
  Matrix expected(3, 3);
  expected << 1, 1, 0, 1, 1, 0, 0, 0, 1;
  const Matrix mean = mean_matrix(A);
  EXPECT_EQ(mean, expected);
  EXPECT_EQ(mean, mean.transpose());
}

TEST(MeanMatrix, AllBackgroundIsZero) {
  IndicatorMatrix A{Matrix::Zero(4, 2), {0, 0}};
  EXPECT_EQ(mean_matrix(A), Matrix::Zero(4, 4));
}

TEST(MeanMatrix, TraceCountsCommunityNodes) {
  const auto A = build_indicator(labels(2, {1, kBackground, 2, 2, kBackground}));
  EXPECT_EQ(mean_matrix(A).trace(), 3.0);
}

TEST(MeanMatrix, SquaredTraceAndEigenvaluesMatchSizes) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 8);
    const int m = 1 + static_cast<int>(gen() % static_cast<unsigned>(n));
    // Random labels with every community guaranteed non-empty.
    std::vector<int> l(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) l[static_cast<std::size_t>(i)] = static_cast<int>(gen() % static_cast<unsigned>(m + 1));
    for (int k = 0; k < m; ++k) l[static_cast<std::size_t>(k)] = k + 1;
    std::shuffle(l.begin(), l.end(), gen);
    const auto A = build_indicator(labels(m, l));
    const Matrix P = mean_matrix(A);

    double sum_sq = 0.0;
    for (int s : A.sizes) sum_sq += static_cast<double>(s) * s;
    EXPECT_EQ((P * P).trace(), sum_sq);

    std::vector<double> expected(A.sizes.begin(), A.sizes.end());
    expected.resize(static_cast<std::size_t>(n), 0.0);
    std::sort(expected.rbegin(), expected.rend());
    const auto est = top_m_eigs(P, n);
    for (int k = 0; k < n; ++k) {
      EXPECT_NEAR(est.eigenvalues(k), expected[static_cast<std::size_t>(k)], 1e-10);
    }
  }
}

TEST(SampleSnapshot, ZeroNoiseReturnsMean) {
  const Matrix mean = mean_matrix(build_indicator(labels(2, {1, 1, 2})));
  Rng rng(1);
  EXPECT_EQ(sample_snapshot(mean, 0.0, Convention::kSymmetric, rng).weights, mean);
  EXPECT_EQ(sample_snapshot(Matrix::Zero(3, 3), 0.0, Convention::kIidFull, rng).weights,
            Matrix::Zero(3, 3));
}

TEST(SampleSnapshot, RejectsNegativeSigma) {
  Rng rng(1);
  EXPECT_THROW(sample_snapshot(Matrix::Zero(2, 2), -1.0, Convention::kSymmetric, rng),
               std::invalid_argument);
}

TEST(SampleSnapshot, SymmetricConventionIsBitSymmetric) {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto g = sample_snapshot(Matrix::Zero(9, 9), 2.5, Convention::kSymmetric, rng);
    EXPECT_TRUE(g.weights == g.weights.transpose());
  }
  const auto full = sample_snapshot(Matrix::Zero(9, 9), 2.5, Convention::kIidFull, rng);
  EXPECT_FALSE(full.weights == full.weights.transpose());
}

TEST(SampleSnapshot, EmpiricalMoments) {
  const int n = 20, draws = 5000;
  Rng rng(20240501);
  Matrix sum = Matrix::Zero(n, n), sum_sq = Matrix::Zero(n, n);
  for (int r = 0; r < draws; ++r) {
    const auto g = sample_snapshot(Matrix::Zero(n, n), 1.0, Convention::kSymmetric, rng);
    sum += g.weights;
    sum_sq += g.weights.cwiseProduct(g.weights);
  }
  const Matrix mean = sum / draws;
  EXPECT_LE(mean.cwiseAbs().maxCoeff(), 0.05);
  double var_sum = 0.0;
  int cells = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j, ++cells) {
      var_sum += sum_sq(i, j) / draws - mean(i, j) * mean(i, j);
    }
  }
  const double pooled_var = var_sum / cells;
  EXPECT_GE(pooled_var, 0.95);
  EXPECT_LE(pooled_var, 1.05);
}

TEST(MakeStream, ChangePointBoundaries) {
  StreamScenario s;
  s.assignment = labels(2, {1, 1, 2});
  s.sigma = 0.0;
  s.horizon = 4;
  const Matrix post = mean_matrix(build_indicator(s.assignment));

  s.tau = 0;
  for (const auto& g : make_stream(s)) EXPECT_EQ(g.weights, post);

  s.tau.reset();
  for (const auto& g : make_stream(s)) EXPECT_EQ(g.weights, Matrix::Zero(3, 3));

  s.tau = 2;
  const auto stream = make_stream(s);
  ASSERT_EQ(stream.size(), 4u);
  EXPECT_EQ(stream[1].weights, Matrix::Zero(3, 3));
  EXPECT_EQ(stream[2].weights, post);
  EXPECT_EQ(stream[0].t, 1);
  EXPECT_EQ(stream[3].t, 4);
}

TEST(MakeStream, SameSeedSameBytes) {
  StreamScenario s;
  s.assignment = assignment_from_sizes(std::vector<int>{3, 2}, 7);
  s.sigma = 1.5;
  s.tau = 5;
  s.horizon = 12;
  s.seed = 99;
  std::ostringstream a, b;
  io::write_stream(make_stream(s), a);
  io::write_stream(make_stream(s), b);
  EXPECT_EQ(a.str(), b.str());
  s.seed = 100;
  std::ostringstream c;
  io::write_stream(make_stream(s), c);
  EXPECT_NE(a.str(), c.str());
}

TEST(MakeStream, RejectsEmptyHorizon) {
  StreamScenario s;
  s.assignment = labels(1, {1});
  s.horizon = 0;
  EXPECT_THROW(make_stream(s), std::invalid_argument);
}
