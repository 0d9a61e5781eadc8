#include <gtest/gtest.h>

#include <cmath>

#include "coreset/sketching.hpp"

using namespace coreset;

namespace {

Matrix random_matrix(Index n, Index d, Rng& rng) {
  std::normal_distribution<double> g;
  Matrix m(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = g(rng);
  return m;
}

// Leverage scores from a thin SVD.
Vector svd_leverage(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const auto sv = svd.singularValues();
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * sv[0]) ++r;
  return svd.matrixU().leftCols(r).rowwise().squaredNorm();
}

// Exact Lewis weights by the fixed-point iteration run to convergence.
Vector exact_lewis(const Matrix& m, double p) {
  return lewis_weights(m, p, 400, 0, true).w;
}

double l1(const Vector& v) { return v.cwiseAbs().sum(); }

}  // namespace

TEST(CountSketch, ZeroMatrix) {
  const auto spec = CountSketchSpec::make(5, 3, 1);
  const RowMatrix out = countsketch_apply(spec, PointMatrix::dense(RowMatrix(RowMatrix::Zero(5, 4))));
  EXPECT_EQ(out.rows(), 3);
  EXPECT_EQ(out.norm(), 0.0);
}

TEST(CountSketch, SingleRowLandsInItsBucket) {
  const auto spec = CountSketchSpec::make(1, 7, 42);
  RowMatrix m(1, 3);
  m << 1, 2, 3;
  const RowMatrix out = countsketch_apply(spec, PointMatrix::dense(m));
  const Index b = spec.hash[0];
  EXPECT_EQ((out.row(b) - spec.sign[0] * m.row(0)).norm(), 0.0);
  EXPECT_EQ(out.norm(), m.norm());
}

TEST(CountSketch, OneNonzeroPerColumnOfSketchMatrix) {
  const auto spec = CountSketchSpec::make(50, 9, 3);
  const RowMatrix s = countsketch_apply(spec, PointMatrix::dense(RowMatrix(RowMatrix::Identity(50, 50))));
  for (Index j = 0; j < 50; ++j) {
    EXPECT_EQ(s.col(j).cwiseAbs().sum(), 1.0);
    EXPECT_EQ(std::abs(s(spec.hash[static_cast<std::size_t>(j)], j)), 1.0);
  }
}

TEST(CountSketch, IsometryInExpectation) {
  Rng rng(8);
  const Index n = 300;
  Vector x = random_matrix(n, 1, rng).col(0);
  x.normalize();
  RowMatrix xm(n, 1);
  xm.col(0) = x;
  double mean = 0.0;
  for (Seed s = 0; s < 200; ++s) mean += countsketch_apply(CountSketchSpec::make(n, 500, s), PointMatrix::dense(xm)).squaredNorm();
  mean /= 200.0;
  EXPECT_NEAR(mean, 1.0, 0.10);
}

TEST(CountSketch, Linear) {
  Rng rng(1);
  const RowMatrix a = random_matrix(40, 5, rng);
  const RowMatrix b = random_matrix(40, 5, rng);
  const auto spec = CountSketchSpec::make(40, 11, 9);
  const RowMatrix lhs = countsketch_apply(spec, PointMatrix::dense(RowMatrix(a + b)));
  const RowMatrix rhs = countsketch_apply(spec, PointMatrix::dense(a)) + countsketch_apply(spec, PointMatrix::dense(b));
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(CountSketch, Deterministic) {
  const auto a = CountSketchSpec::make(100, 13, 77);
  const auto b = CountSketchSpec::make(100, 13, 77);
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_EQ(a.sign, b.sign);
}

TEST(SketchedRegression, RowInsideSpan) {
  Rng rng(2);
  const Index d = 30;
  const Subspace s = random_subspace(d, 3, rng);
  RowMatrix a(1, d);
  a.row(0) = (s.basis() * Vector::Ones(3)).transpose();
  const double eps = 0.3;
  const auto spec = CountSketchSpec::make(d, regression_sketch_width(3, eps), 4);
  const auto r = sketched_regression(PointMatrix::dense(a), s, spec);
  EXPECT_LE(r.residuals[0], eps * a.row(0).norm());
}

TEST(SketchedRegression, RowOrthogonalToBasis) {
  Rng rng(3);
  const Index d = 40;
  const Subspace s = orthonormalize(Matrix(Matrix::Identity(d, 2)));
  const double eps = 0.3;
  int good = 0;
  for (Seed seed = 0; seed < 20; ++seed) {
    RowMatrix a = RowMatrix::Zero(1, d);
    for (Index j = 2; j < d; ++j) a(0, j) = random_matrix(1, 1, rng)(0, 0);
    const auto spec = CountSketchSpec::make(d, regression_sketch_width(2, eps), seed);
    const double est = sketched_regression(PointMatrix::dense(a), s, spec).residuals[0];
    if (std::abs(est - a.norm()) <= eps * a.norm()) ++good;
  }
  EXPECT_GE(good, 18);
}

TEST(SketchedRegression, MostRowsWithinEpsilon) {
  Rng rng(4);
  const Index n = 200, d = 60, ell = 3;
  const double eps = 0.3;
  const RowMatrix a = random_matrix(n, d, rng);
  const Subspace s = random_subspace(d, ell, rng);
  const auto spec = CountSketchSpec::make(d, regression_sketch_width(ell, eps), 5);
  const auto r = sketched_regression(PointMatrix::dense(a), s, spec);
  int good = 0;
  for (Index i = 0; i < n; ++i) {
    const double truth = s.distance(a.row(i).transpose());
    if (std::abs(r.residuals[i] - truth) <= eps * truth) ++good;
  }
  EXPECT_GE(good, static_cast<int>(0.85 * n));
}

TEST(SketchedRegression, RejectsNarrowSketch) {
  Rng rng(5);
  const Subspace s = random_subspace(10, 4, rng);
  const auto spec = CountSketchSpec::make(10, 3, 1);
  EXPECT_THROW(sketched_regression(PointMatrix::dense(RowMatrix(RowMatrix::Ones(2, 10))), s, spec), Error);
}

TEST(MedianResiduals, RowsInSubspace) {
  Rng rng(6);
  const Subspace s = random_subspace(20, 4, rng);
  const RowMatrix a = (s.basis() * random_matrix(4, 10, rng)).transpose();
  const Vector v = median_residuals(PointMatrix::dense(a), s, 0.2, 9, 3);
  for (Index i = 0; i < a.rows(); ++i) EXPECT_LE(v[i], 0.2 * a.row(i).norm());
}

TEST(MedianResiduals, WithinEpsilonOnRandomInstance) {
  Rng rng(7);
  const Index n = 100, d = 30;
  const double eps = 0.2;
  const RowMatrix a = random_matrix(n, d, rng);
  const Subspace s = random_subspace(d, 5, rng);
  const Vector v = median_residuals(PointMatrix::dense(a), s, eps, 40, 11);
  double worst = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double truth = s.distance(a.row(i).transpose());
    worst = std::max(worst, std::abs(v[i] - truth) / truth);
  }
  EXPECT_LE(worst, eps);
}

TEST(MedianResiduals, SingleRepeatEqualsOneRegression) {
  Rng rng(8);
  const RowMatrix a = random_matrix(1, 25, rng);
  const Subspace s = random_subspace(25, 2, rng);
  const Vector v = median_residuals(PointMatrix::dense(a), s, 0.5, 1, 13);
  const Vector again = median_residuals(PointMatrix::dense(a), s, 0.5, 1, 13);
  EXPECT_EQ(v[0], again[0]);
  EXPECT_GE(v[0], 0.0);
}

TEST(MedianResiduals, DefaultRepeats) {
  EXPECT_EQ(default_repeats(100), static_cast<Index>(std::ceil(8.0 * std::log(100.0))));
}

TEST(Leverage, OrthonormalColumnsGiveRowNorms) {
  Rng rng(9);
  const Matrix q = Eigen::HouseholderQR<Matrix>(random_matrix(100, 4, rng)).householderQ() * Matrix::Identity(100, 4);
  const Vector exact = q.rowwise().squaredNorm();
  const Vector approx = leverage_scores_approx(q, 3);
  for (Index i = 0; i < 100; ++i) {
    EXPECT_GE(approx[i], exact[i] / 2.0);
    EXPECT_LE(approx[i], exact[i] * 2.0);
  }
}

TEST(Leverage, IdentityAllOnes) {
  const Vector exact = leverage_scores_exact(Matrix::Identity(6, 6));
  EXPECT_NEAR((exact - Vector::Ones(6)).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Leverage, ApproxWithinFactorTwoForMostSeeds) {
  int good = 0;
  for (Seed seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    const Matrix m = random_matrix(200, 5, rng);
    const Vector truth = svd_leverage(m);
    const Vector approx = leverage_scores_approx(m, seed);
    bool ok = true;
    for (Index i = 0; i < m.rows(); ++i) ok = ok && approx[i] >= truth[i] / 2.0 && approx[i] <= 2.0 * truth[i];
    if (ok) ++good;
  }
  EXPECT_GE(good, 18);
}

TEST(Lewis, PTwoMatchesSvdLeverage) {
  Rng rng(10);
  const Matrix m = random_matrix(60, 4, rng);
  const LewisWeights lw = lewis_weights(m, 2.0, default_lewis_iterations(60), 0, true);
  const Vector truth = svd_leverage(m);
  for (Index i = 0; i < m.rows(); ++i) EXPECT_NEAR(lw.w[i], truth[i], 1e-6 * truth[i]);
}

TEST(Lewis, IdentityAllOnes) {
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    const LewisWeights lw = lewis_weights(Matrix::Identity(5, 5), p, 8, 0, true);
    EXPECT_NEAR((lw.w - Vector::Ones(5)).cwiseAbs().maxCoeff(), 0.0, 1e-9) << "p=" << p;
  }
}

TEST(Lewis, DuplicatedIsolatedRowSplitsWeight) {
  Rng rng(11);
  Matrix m = Matrix::Zero(21, 4);
  m.topLeftCorner(20, 3) = random_matrix(20, 3, rng);
  m(20, 3) = 2.5;
  const Vector base = exact_lewis(m, 1.0);
  for (Index r : {2, 3, 5}) {
    Matrix dup(20 + r, 4);
    dup.topRows(21) = m;
    for (Index c = 1; c < r; ++c) dup.row(20 + c) = m.row(20);
    const Vector w = exact_lewis(dup, 1.0);
    for (Index c = 0; c < r; ++c)
      EXPECT_NEAR(w[20 + c], base[20] / static_cast<double>(r), 0.05 * base[20] / static_cast<double>(r)) << "r=" << r;
    EXPECT_NEAR(w.head(20).sum(), base.head(20).sum(), 1e-6);
  }
}

TEST(Lewis, ScaledCopiesSplitWeight) {
  // r copies of a/r^{1/p} leave ‖Mx‖_p unchanged, so the copies share a's weight.
  Rng rng(12);
  const Matrix m = random_matrix(20, 3, rng);
  for (double p : {1.0, 1.5}) {
    const Vector base = exact_lewis(m, p);
    for (Index r : {2, 3, 5}) {
      Matrix dup(19 + r, 3);
      dup.topRows(20) = m;
      dup.row(0) = m.row(0) / std::pow(static_cast<double>(r), 1.0 / p);
      for (Index c = 1; c < r; ++c) dup.row(19 + c) = dup.row(0);
      const Vector w = exact_lewis(dup, p);
      const double expect = base[0] / static_cast<double>(r);
      EXPECT_NEAR(w[0], expect, 0.05 * expect) << "p=" << p << " r=" << r;
      for (Index c = 1; c < r; ++c) EXPECT_NEAR(w[19 + c], expect, 0.05 * expect) << "p=" << p << " r=" << r;
    }
  }
}

TEST(Lewis, FixedPointProperty) {
  for (double p : {1.0, 1.5, 2.0}) {
    Rng rng(12);
    const Matrix m = random_matrix(50, 4, rng);
    const Vector w = exact_lewis(m, p);
    const Vector scale = w.array().pow(0.5 - 1.0 / p);
    const Matrix wm = scale.asDiagonal() * m;
    Eigen::HouseholderQR<Matrix> qr(wm);
    const Matrix r = qr.matrixQR().topRows(4).triangularView<Eigen::Upper>();
    const Matrix q = wm * r.inverse();
    for (Index i = 0; i < m.rows(); ++i) {
      // τᵢ(W^{1/2−1/p}M) equals wᵢ at the fixed point.
      EXPECT_NEAR(q.row(i).squaredNorm(), w[i], 0.02 * w[i]) << "p=" << p;
    }
  }
}

TEST(Lewis, WeightsBoundedAndSumToRank) {
  Rng rng(13);
  const Matrix m = random_matrix(80, 6, rng);
  for (double p : {1.0, 1.5, 2.0}) {
    const LewisWeights lw = lewis_weights(m, p, default_lewis_iterations(80), 1, false);
    EXPECT_GT(lw.w.minCoeff(), 0.0);
    EXPECT_LE(lw.w.maxCoeff(), 1.0 + 1e-12);
    EXPECT_FALSE(lw.best_effort);
  }
  const LewisWeights exact = lewis_weights(m, 1.0, 200, 0, true);
  EXPECT_LE(exact.w.sum(), 6.0 + 1e-6);
}

TEST(Lewis, HighPFlaggedBestEffort) {
  Rng rng(14);
  const LewisWeights lw = lewis_weights(random_matrix(30, 3, rng), 4.0, 20, 0, true);
  EXPECT_TRUE(lw.best_effort);
}

TEST(Lewis, Reproducible) {
  Rng rng(15);
  const Matrix m = random_matrix(70, 4, rng);
  const LewisWeights a = lewis_weights(m, 1.0, 6, 99, false);
  const LewisWeights b = lewis_weights(m, 1.0, 6, 99, false);
  EXPECT_EQ(a.w, b.w);
}

TEST(Sampling, SingleRow) {
  LewisWeights lw;
  lw.w = Vector::Ones(1);
  for (double p : {1.0, 2.0}) {
    const SamplingRescaling t = build_sampling_matrix(lw, p, 10, 1);
    ASSERT_EQ(t.size(), 10u);
    for (std::size_t j = 0; j < t.size(); ++j) {
      EXPECT_EQ(t.rows[j], 0);
      EXPECT_NEAR(t.weights[j], std::pow(0.1, 1.0 / p), 1e-15);
    }
  }
}

TEST(Sampling, UniformFrequenciesWithinThreeSigma) {
  const Index n = 10, count = 100000;
  LewisWeights lw;
  lw.w = Vector::Constant(n, 0.3);
  const SamplingRescaling t = build_sampling_matrix(lw, 1.0, count, 5);
  std::vector<Index> freq(n, 0);
  for (Index r : t.rows) ++freq[static_cast<std::size_t>(r)];
  const double mean = static_cast<double>(count) / n;
  const double sigma = std::sqrt(count * (1.0 / n) * (1.0 - 1.0 / n));
  for (Index f : freq) EXPECT_LE(std::abs(static_cast<double>(f) - mean), 3.0 * sigma);
}

TEST(Sampling, RejectsZeroWeights) {
  LewisWeights lw;
  lw.w = Vector::Zero(4);
  EXPECT_THROW(build_sampling_matrix(lw, 1.0, 3, 0), Error);
}

TEST(Sampling, MergePreservesPthPowerMass) {
  LewisWeights lw;
  lw.w = Vector::LinSpaced(6, 0.1, 1.0);
  const SamplingRescaling t = build_sampling_matrix(lw, 1.5, 40, 2);
  const SamplingRescaling m = t.merged(1.5);
  double before = 0.0, after = 0.0;
  for (double w : t.weights) before += std::pow(w, 1.5);
  for (double w : m.weights) after += std::pow(w, 1.5);
  EXPECT_NEAR(before, after, 1e-12 * before);
  EXPECT_LE(m.size(), 6u);
}

TEST(Sampling, L1SubspaceEmbedding) {
  Rng rng(16);
  const Matrix m = random_matrix(100, 4, rng);
  const LewisWeights lw = lewis_weights(m, 1.0, default_lewis_iterations(100), 3, false);
  int good = 0, trials = 0;
  for (Seed seed = 0; seed < 20; ++seed) {
    const SamplingRescaling t = build_sampling_matrix(lw, 1.0, 600, seed);
    for (int q = 0; q < 50; ++q) {
      const Vector x = random_matrix(4, 1, rng).col(0);
      const Vector mx = m * x;
      double tmx = 0.0;
      for (std::size_t j = 0; j < t.size(); ++j) tmx += t.weights[j] * std::abs(mx[t.rows[j]]);
      ++trials;
      if (std::abs(tmx - l1(mx)) <= 0.25 * l1(mx)) ++good;
    }
  }
  EXPECT_GE(good, static_cast<int>(0.9 * trials));
}
