#include <gtest/gtest.h>

#include <cmath>

#include "coreset/oracle/harness.hpp"
#include "coreset/subspace_coreset.hpp"

using namespace coreset;

namespace {

RowMatrix random_matrix(Index n, Index d, Rng& rng) {
  std::normal_distribution<double> g;
  RowMatrix m(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = g(rng);
  return m;
}

// Scalar re-evaluation of the coreset objective from raw rows.
double scalar_coreset_cost(const SubspaceCoreset& core, const Subspace& v) {
  const Index d = core.ambient();
  const Matrix& u = v.basis();
  double total = 0.0;
  for (Index i = 0; i < core.size(); ++i) {
    std::vector<double> b(static_cast<std::size_t>(d));
    for (Index j = 0; j < d; ++j) b[static_cast<std::size_t>(j)] = core.points(i, j);
    for (Index c = 0; c < u.cols(); ++c) {
      double dot = 0.0;
      for (Index j = 0; j < d; ++j) dot += b[static_cast<std::size_t>(j)] * u(j, c);
      for (Index j = 0; j < d; ++j) b[static_cast<std::size_t>(j)] -= dot * u(j, c);
    }
    double r2 = core.points(i, d) * core.points(i, d);
    for (double x : b) r2 += x * x;
    total += std::pow(core.weights[i], core.p) * std::pow(r2, core.p / 2.0);
  }
  return std::pow(total, 1.0 / core.p);
}

}  // namespace

TEST(SubspaceCoreset, SizeBoundFormula) {
  // c_s·k·ln(k/ε)/ε⁴ with k = 3, ε = 0.25.
  EXPECT_EQ(subspace_size_bound(3, 0.25), static_cast<Index>(std::floor(3.0 * std::log(12.0) / std::pow(0.25, 4))));
}

TEST(SubspaceCoreset, RankKInput) {
  Rng rng(1);
  const Subspace truth = random_subspace(15, 2, rng);
  const auto a = PointMatrix::dense(RowMatrix((truth.basis() * random_matrix(2, 120, rng)).transpose()));
  const SubspaceCoreset core = build_subspace_coreset(a, 2, 0.3, 1.0, Variant::exact, 3);
  EXPECT_LT(eval_subspace_cost(core, truth), 1e-8 * norm_p2(a, 1.0));
  for (int q = 0; q < 30; ++q) {
    const Subspace v = random_subspace(15, 2, rng);
    const double t = cost_p(a, v, 1.0);
    EXPECT_LE(std::abs(eval_subspace_cost_pth(core, v) - t), 0.3 * t);
  }
}

TEST(SubspaceCoreset, AllZeroInput) {
  const auto a = PointMatrix::dense(RowMatrix(RowMatrix::Zero(9, 4)));
  const SubspaceCoreset core = build_subspace_coreset(a, 1, 0.5, 1.5, Variant::fast, 0);
  ASSERT_EQ(core.size(), 1);
  EXPECT_EQ(core.points.norm(), 0.0);
  EXPECT_NEAR(core.weights[0], std::pow(9.0, 1.0 / 1.5), 1e-12);
}

TEST(SubspaceCoreset, RejectsBadArguments) {
  const auto a = PointMatrix::dense(RowMatrix(RowMatrix::Identity(4, 4)));
  EXPECT_THROW(build_subspace_coreset(a, 0, 0.5, 1.0, Variant::exact, 0), Error);
  EXPECT_THROW(build_subspace_coreset(a, 1, 1.5, 1.0, Variant::exact, 0), Error);
  EXPECT_THROW(build_subspace_coreset(a, 1, 0.5, 0.5, Variant::exact, 0), Error);
}

TEST(SubspaceCoreset, DistortionBothVariants) {
  for (Variant variant : {Variant::exact, Variant::fast}) {
    const PointMatrix a = oracle::planted_subspace_data(300, 20, 2, 0.5, 4);
    const SubspaceCoreset core = build_subspace_coreset(a, 2, 0.3, 1.0, variant, 5);
    EXPECT_LE(core.size(), subspace_size_bound(2, 0.3));
    EXPECT_GT(core.weights.minCoeff(), 0.0);
    oracle::QueryFamily f;
    f.count = 100;
    f.seed = 6;
    f.d = 20;
    f.k = 2;
    for (const Subspace& v : oracle::subspace_queries(f)) {
      const double t = cost_p(a, v, 1.0);
      EXPECT_LE(std::abs(eval_subspace_cost_pth(core, v) - t), 0.3 * t) << to_string(variant);
    }
  }
}

TEST(SubspaceCoreset, OtherExponents) {
  for (double p : {1.5, 2.0}) {
    const PointMatrix a = oracle::planted_subspace_data(250, 12, 2, 0.5, 7);
    const SubspaceCoreset core = build_subspace_coreset(a, 2, 0.3, p, Variant::fast, 8);
    Rng rng(9);
    for (int q = 0; q < 50; ++q) {
      const Subspace v = random_subspace(12, 2, rng);
      const double t = cost_p(a, v, p);
      EXPECT_LE(std::abs(eval_subspace_cost_pth(core, v) - t), 0.3 * t) << "p=" << p;
    }
  }
}

TEST(SubspaceCoreset, AdaptiveQueryNearOptimal) {
  const PointMatrix a = oracle::planted_subspace_data(300, 15, 2, 0.5, 10);
  const double eps = 0.3;
  const SubspaceCoreset core = build_subspace_coreset(a, 2, eps, 1.0, Variant::exact, 11);
  const Subspace adaptive = coreset_optimal_subspace(core, 12);
  const Subspace direct = approx_subspace(a, 2, eps, 1.0, SubspaceMode::irls, 13);
  EXPECT_LE(cost_p(a, adaptive, 1.0), (1.0 + 3.0 * eps) * cost_p(a, direct, 1.0));
}

TEST(SubspaceCoreset, OversamplingDoesNotWorsenMedianDistortion) {
  const PointMatrix a = oracle::planted_subspace_data(400, 15, 2, 0.5, 14);
  Constants lean;
  lean.validate = false;
  lean.lewis_sample_c = 0.1;
  Constants rich = lean;
  rich.lewis_sample_c = 0.4;
  Rng rng(15);
  std::vector<Subspace> queries;
  for (int q = 0; q < 40; ++q) queries.push_back(random_subspace(15, 2, rng));
  auto median_error = [&](const Constants& c) {
    std::vector<double> errs;
    for (Seed seed = 0; seed < 20; ++seed) {
      const SubspaceCoreset core = build_subspace_coreset(a, 2, 0.5, 1.0, Variant::fast, seed, c);
      double worst = 0.0;
      for (const auto& v : queries) {
        const double t = cost_p(a, v, 1.0);
        worst = std::max(worst, std::abs(eval_subspace_cost_pth(core, v) - t) / t);
      }
      errs.push_back(worst);
    }
    std::nth_element(errs.begin(), errs.begin() + 10, errs.end());
    return errs[10];
  };
  EXPECT_LE(median_error(rich), median_error(lean));
}

TEST(SubspaceCoreset, RotationInvarianceStatistically) {
  const PointMatrix a = oracle::planted_subspace_data(300, 10, 2, 0.5, 16);
  Rng rng(17);
  const Matrix rot = Eigen::HouseholderQR<Matrix>(random_matrix(10, 10, rng)).householderQ();
  const PointMatrix rotated = PointMatrix::dense(RowMatrix(a.to_dense() * rot));
  double err_a = 0.0, err_r = 0.0;
  for (Seed seed = 0; seed < 5; ++seed) {
    const SubspaceCoreset ca = build_subspace_coreset(a, 2, 0.4, 1.0, Variant::fast, seed);
    const SubspaceCoreset cr = build_subspace_coreset(rotated, 2, 0.4, 1.0, Variant::fast, seed);
    for (int q = 0; q < 20; ++q) {
      const Subspace v = random_subspace(10, 2, rng);
      const Subspace rv = orthonormalize(Matrix(rot.transpose() * v.basis()));
      const double t = cost_p(a, v, 1.0);
      err_a = std::max(err_a, std::abs(eval_subspace_cost_pth(ca, v) - t) / t);
      err_r = std::max(err_r, std::abs(eval_subspace_cost_pth(cr, rv) - t) / t);
    }
  }
  EXPECT_LE(err_a, 0.4);
  EXPECT_LE(err_r, 0.4);
}

TEST(EvalSubspaceCost, FullSpaceLeavesOnlyTails) {
  SubspaceCoreset core;
  core.p = 1.5;
  core.points.resize(3, 4);
  core.points << 1, 2, 3, 0.5, -1, 0, 2, 0.0, 4, 4, 4, 2.0;
  core.weights = Vector::Constant(3, 2.0);
  const double expect = std::pow(std::pow(2.0, 1.5) * (std::pow(0.5, 1.5) + std::pow(2.0, 1.5)), 1.0 / 1.5);
  EXPECT_NEAR(eval_subspace_cost(core, Subspace::full(3)), expect, 1e-12);
}

TEST(EvalSubspaceCost, SingleRowOrthogonalQuery) {
  SubspaceCoreset core;
  core.p = 2.0;
  core.points.resize(1, 3);
  core.points << 3, 0, 4;
  core.weights = Vector::Ones(1);
  const Subspace v = orthonormalize(Vector(Vector::Unit(2, 1)));
  EXPECT_NEAR(eval_subspace_cost(core, v), 5.0, 1e-14);
}

TEST(EvalSubspaceCost, MatchesScalarOracle) {
  Rng rng(18);
  SubspaceCoreset core;
  core.p = 1.3;
  core.points = random_matrix(25, 7, rng);
  core.points.col(6) = core.points.col(6).cwiseAbs();
  core.weights = random_matrix(25, 1, rng).col(0).cwiseAbs();
  for (int q = 0; q < 20; ++q) {
    const Subspace v = random_subspace(6, 2, rng);
    const double expect = scalar_coreset_cost(core, v);
    EXPECT_NEAR(eval_subspace_cost(core, v), expect, 1e-10 * expect);
  }
}

TEST(EvalSubspaceCost, DimensionMismatch) {
  SubspaceCoreset core;
  core.points = RowMatrix::Ones(2, 5);
  core.weights = Vector::Ones(2);
  EXPECT_THROW(eval_subspace_cost(core, Subspace::full(3)), Error);
}

TEST(SubspaceCoreset, DeterministicAcrossThreadCounts) {
  const PointMatrix a = oracle::planted_subspace_data(200, 12, 2, 0.5, 19);
  set_num_threads(1);
  const SubspaceCoreset one = build_subspace_coreset(a, 2, 0.4, 1.0, Variant::fast, 20);
  set_num_threads(0);
  const SubspaceCoreset all = build_subspace_coreset(a, 2, 0.4, 1.0, Variant::fast, 20);
  EXPECT_EQ(one.points, all.points);
  EXPECT_EQ(one.weights, all.weights);
}
