#include <gtest/gtest.h>

#include <cmath>

#include "coreset/linalg.hpp"

using namespace coreset;

namespace {

RowMatrix random_matrix(Index n, Index d, Rng& rng) {
  std::normal_distribution<double> g;
  RowMatrix m(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = g(rng);
  return m;
}

// Distance of x to span(V) via the normal equations (VᵀV)c = Vᵀx.
double normal_equation_distance(const Vector& x, const Matrix& v) {
  const Matrix gram = v.transpose() * v;
  const Vector c = gram.ldlt().solve(v.transpose() * x);
  return (x - v * c).norm();
}

}  // namespace

TEST(NormP2, ThreeFourFiveRow) {
  RowMatrix m(2, 2);
  m << 3, 4, 0, 0;
  EXPECT_DOUBLE_EQ(norm_p2(PointMatrix::dense(m), 1.0), 5.0);
}

TEST(NormP2, IdentityAtTwo) {
  EXPECT_NEAR(norm_p2(PointMatrix::dense(RowMatrix(RowMatrix::Identity(2, 2))), 2.0), std::sqrt(2.0), 1e-15);
}

TEST(NormP2, ThreeRowsAtOnePointFiveMatchesHighPrecision) {
  RowMatrix m(3, 2);
  m << 1, 0, 1, 1, 0, 2;
  // (1 + 2^0.75 + 2^1.5)^(2/3) evaluated at 40 digits.
  EXPECT_NEAR(norm_p2(PointMatrix::dense(m), 1.5), 3.1196984955221438638, 1e-14);
}

TEST(NormP2, ZeroMatrix) { EXPECT_EQ(norm_p2(PointMatrix::dense(RowMatrix(RowMatrix::Zero(4, 3))), 1.0), 0.0); }

TEST(NormP2, RejectsSmallExponent) {
  const auto m = PointMatrix::dense(RowMatrix(RowMatrix::Identity(2, 2)));
  EXPECT_THROW(norm_p2(m, 0.5), Error);
}

TEST(NormP2, RejectsNonFinite) {
  RowMatrix m = RowMatrix::Identity(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(PointMatrix::dense(m), Error);
}

TEST(NormP2, AbsolutelyHomogeneous) {
  Rng rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (double p : {1.0, 1.5, 2.0, 3.0})
    for (int trial = 0; trial < 10; ++trial) {
      const RowMatrix m = random_matrix(7, 4, rng);
      const double c = u(rng);
      const double lhs = norm_p2(PointMatrix::dense(RowMatrix(c * m)), p);
      const double rhs = std::abs(c) * norm_p2(PointMatrix::dense(m), p);
      EXPECT_NEAR(lhs, rhs, 1e-12 * rhs);
    }
}

TEST(NormP2, SparseAndDenseAgree) {
  std::vector<Triplet> t{{0, 1, 2.0}, {3, 0, -1.0}, {3, 5, 0.5}};
  const auto sparse = PointMatrix::from_triplets(5, 6, t);
  ASSERT_TRUE(sparse.is_sparse());
  const auto dense = PointMatrix::dense(sparse.to_dense());
  EXPECT_NEAR(norm_p2(sparse, 1.3), norm_p2(dense, 1.3), 1e-14);
}

TEST(PointMatrix, DenseFallbackAboveQuarterDensity) {
  std::vector<Triplet> t{{0, 0, 1.0}, {1, 1, 1.0}};
  EXPECT_FALSE(PointMatrix::from_triplets(2, 2, t).is_sparse());
  EXPECT_TRUE(PointMatrix::from_triplets(4, 4, {{0, 0, 1.0}}).is_sparse());
}

TEST(PointMatrix, RejectsOutOfRangeTriplet) {
  EXPECT_THROW(PointMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), Error);
}

TEST(CostP, RowsInsideSubspace) {
  RowMatrix m(2, 3);
  m << 1, 2, 0, -3, 1, 0;
  const Subspace s = orthonormalize(Matrix(Matrix::Identity(3, 2)));
  EXPECT_NEAR(cost_p(PointMatrix::dense(m), s, 1.0), 0.0, 1e-15);
}

TEST(CostP, SingleRowSquared) {
  RowMatrix m(1, 2);
  m << 0, 5;
  const Subspace s = orthonormalize(Vector(Vector::Unit(2, 0)));
  EXPECT_NEAR(cost_p(PointMatrix::dense(m), s, 2.0), 25.0, 1e-12);
}

TEST(CostP, MatchesNormalEquationOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const RowMatrix a = random_matrix(10, 4, rng);
    const Matrix v = random_matrix(4, 2, rng);
    const Subspace s = orthonormalize(v);
    double expect = 0.0;
    for (Index i = 0; i < a.rows(); ++i) expect += normal_equation_distance(a.row(i).transpose(), v);
    EXPECT_NEAR(cost_p(PointMatrix::dense(a), s, 1.0), expect, 1e-10 * expect);
  }
}

TEST(CostP, DimensionMismatch) {
  const auto a = PointMatrix::dense(RowMatrix(RowMatrix::Identity(3, 3)));
  EXPECT_THROW(cost_p(a, Subspace::full(4), 1.0), Error);
}

TEST(Project, RowInSubspaceReconstructs) {
  RowMatrix m(1, 3);
  m << 1, -2, 0;
  const Subspace s = orthonormalize(Matrix(Matrix::Identity(3, 2)));
  const Projection pr = project(PointMatrix::dense(m), s);
  EXPECT_NEAR((pr.reconstruct_row(0) - m.row(0).transpose()).norm(), 0.0, 1e-15);
}

TEST(Project, OntoFirstAxis) {
  RowMatrix m(1, 2);
  m << 3, 4;
  const Projection pr = project(PointMatrix::dense(m), orthonormalize(Vector(Vector::Unit(2, 0))));
  EXPECT_NEAR(std::abs(pr.reconstruct_row(0)[0]), 3.0, 1e-15);
  EXPECT_NEAR(pr.reconstruct_row(0)[1], 0.0, 1e-15);
}

TEST(Project, ResidualOrthogonalToBasis) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const RowMatrix a = random_matrix(5, 6, rng);
    const Subspace s = random_subspace(6, 3, rng);
    const Projection pr = project(PointMatrix::dense(a), s);
    for (Index i = 0; i < a.rows(); ++i) {
      const Vector r = a.row(i).transpose() - pr.reconstruct_row(i);
      EXPECT_LT((s.basis().transpose() * r).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(Project, PythagoreanIdentity) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = random_matrix(1, 7, rng).row(0).transpose();
    const Subspace s = random_subspace(7, 3, rng);
    const double total = x.squaredNorm();
    EXPECT_NEAR(s.residual(x).squaredNorm() + s.project(x).squaredNorm(), total, 1e-8 * total);
  }
}

TEST(DistToCenters, PointOnCenter) {
  RowMatrix c(3, 2);
  c << 0, 0, 1, 1, 2, 2;
  const NearestCenter nc = dist_to_centers(Vector(Vector::Ones(2)), CenterSet(c));
  EXPECT_EQ(nc.index, 1);
  EXPECT_EQ(nc.distance, 0.0);
}

TEST(DistToCenters, SimpleExample) {
  RowMatrix c(2, 2);
  c << 1, 0, 0, 2;
  const NearestCenter nc = dist_to_centers(Vector(Vector::Zero(2)), CenterSet(c));
  EXPECT_EQ(nc.index, 0);
  EXPECT_DOUBLE_EQ(nc.distance, 1.0);
}

TEST(DistToCenters, TiesGoToLowestIndex) {
  RowMatrix c(2, 1);
  c << -1, 1;
  EXPECT_EQ(dist_to_centers(Vector(Vector::Zero(1)), CenterSet(c)).index, 0);
}

TEST(DistToCenters, MatchesLinearScan) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const RowMatrix c = random_matrix(5, 3, rng);
    const Vector x = random_matrix(1, 3, rng).row(0).transpose();
    Index best = 0;
    double best_d = 1e300;
    for (Index j = 0; j < 5; ++j) {
      double s = 0.0;
      for (Index t = 0; t < 3; ++t) s += (x[t] - c(j, t)) * (x[t] - c(j, t));
      if (std::sqrt(s) < best_d) {
        best_d = std::sqrt(s);
        best = j;
      }
    }
    const NearestCenter nc = dist_to_centers(x, CenterSet(c));
    EXPECT_EQ(nc.index, best);
    EXPECT_NEAR(nc.distance, best_d, 1e-12);
  }
}

TEST(DistToCenters, ArgminInvariantUnderConstantCoordinate) {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const RowMatrix c = random_matrix(4, 3, rng);
    const Vector x = random_matrix(1, 3, rng).row(0).transpose();
    RowMatrix c2(4, 4);
    c2 << c, RowMatrix::Constant(4, 1, 7.5);
    Vector x2(4);
    x2 << x, 7.5;
    EXPECT_EQ(dist_to_centers(x, CenterSet(c)).index, dist_to_centers(x2, CenterSet(c2)).index);
  }
}

TEST(CenterSet, RejectsEmpty) { EXPECT_THROW(CenterSet(RowMatrix(0, 3)), Error); }

TEST(Orthonormalize, AlreadyOrthonormalUpToSign) {
  const Matrix v = Matrix::Identity(4, 2);
  const Subspace s = orthonormalize(v);
  ASSERT_EQ(s.dim(), 2);
  EXPECT_NEAR((s.basis().cwiseAbs() - v).norm(), 0.0, 1e-15);
}

TEST(Orthonormalize, DuplicatedColumnDropsRank) {
  Matrix v(3, 2);
  v << 1, 1, 2, 2, 3, 3;
  EXPECT_EQ(orthonormalize(v).dim(), 1);
}

TEST(Orthonormalize, SpanPreserved) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix v = random_matrix(6, 3, rng);
    const Subspace s = orthonormalize(v);
    ASSERT_EQ(s.dim(), 3);
    EXPECT_LT((s.basis().transpose() * s.basis() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((s.basis() * (s.basis().transpose() * v) - v).norm(), 1e-8);
  }
}

TEST(Subspace, RejectsNonOrthonormalBasis) {
  Matrix v(2, 1);
  v << 1, 1;
  EXPECT_THROW(Subspace::from_orthonormal(v, 1e-10), Error);
}

TEST(Parallel, PairwiseSumIndependentOfThreads) {
  Rng rng(2);
  const RowMatrix a = random_matrix(5000, 8, rng);
  const Subspace s = random_subspace(8, 3, rng);
  set_num_threads(1);
  const double one = cost_p(PointMatrix::dense(a), s, 1.3);
  set_num_threads(0);
  const double all = cost_p(PointMatrix::dense(a), s, 1.3);
  set_num_threads(4);
  const double four = cost_p(PointMatrix::dense(a), s, 1.3);
  set_num_threads(0);
  EXPECT_EQ(one, all);
  EXPECT_EQ(one, four);
}
