#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "coreset/linalg.hpp"
#include "coreset/oracle/brute_force.hpp"
#include "coreset/sketching.hpp"

namespace coreset {

enum class SubspaceMode { exact2, irls, bruteforce };

inline std::string_view to_string(SubspaceMode mode) {
  switch (mode) {
    case SubspaceMode::exact2: return "exact2";
    case SubspaceMode::irls: return "irls";
    case SubspaceMode::bruteforce: return "bruteforce";
  }
  return "unknown";
}

/// exact2 when p = 2, certified brute force when the problem is tiny, IRLS otherwise.
inline SubspaceMode default_subspace_mode(double p, Index d, Index m) {
  if (p == 2.0) return SubspaceMode::exact2;
  if (d <= oracle::brute_force_max_ambient && m <= oracle::brute_force_max_dim) return SubspaceMode::bruteforce;
  return SubspaceMode::irls;
}

/// Orthonormal basis of the row space and the row coordinates in it.
struct RowSpace {
  Matrix basis;      // d x r
  RowMatrix coords;  // n x r
};

inline RowSpace row_space(const RowMatrix& a) {
  RowSpace out;
  out.basis = column_space_basis(a.transpose());
  out.coords = a * out.basis;
  return out;
}

/// Extends an orthonormal d x r basis to m columns with complement directions.
inline Matrix pad_basis(const Matrix& basis, Index m) {
  if (basis.cols() >= m) return basis.leftCols(m);
  Matrix comp = orthogonal_complement(Subspace::from_orthonormal(basis));
  Matrix out(basis.rows(), m);
  out << basis, comp.leftCols(m - basis.cols());
  return out;
}

/// Top-m right singular subspace, padded if rank(A) < m.
inline Matrix top_right_singular(const RowMatrix& a, Index m) {
  if (m == 0) return Matrix(a.cols(), 0);
  Eigen::BDCSVD<Matrix> svd(Matrix(a), Eigen::ComputeThinV);
  Matrix v = svd.matrixV();
  const Index keep = std::min<Index>(m, v.cols());
  return pad_basis(v.leftCols(keep), m);
}

/// Top-m eigenvectors of a symmetric matrix.
inline Matrix top_eigenvectors(const Matrix& g, Index m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
  return eig.eigenvectors().rightCols(m).rowwise().reverse();
}

/// Σ ωᵢ (‖yᵢ(I − P)‖² + tᵢ²)^{p/2} for P onto span(basis).
inline double weighted_tail_cost(const RowMatrix& y, const Vector& weights, const Vector& tails,
                                 const Matrix& basis, double p) {
  const Matrix coeffs = y * basis;
  std::vector<double> terms(static_cast<std::size_t>(y.rows()));
  for (Index i = 0; i < y.rows(); ++i) {
    const double r2 = (y.row(i) - coeffs.row(i) * basis.transpose()).squaredNorm() + tails[i] * tails[i];
    terms[static_cast<std::size_t>(i)] = weights[i] * std::pow(r2, p / 2.0);
  }
  return pairwise_sum(terms);
}

/// Iteratively reweighted PCA for Σ ωᵢ (‖yᵢ(I − P)‖² + tᵢ²)^{p/2} over
/// rank-m projections P: row i is reweighted by ωᵢ·max(rᵢ, floor)^{p−2} and
/// P is refit as the top-m eigenspace of the weighted Gram matrix. Starts
/// from the unweighted solution plus `restarts` random frames and returns
/// the best local optimum.
inline Matrix irls_subspace(const RowMatrix& y, const Vector& weights, const Vector& tails, Index m, double p,
                            Seed seed, const Constants& c = {}) {
  const Index r = y.cols();
  require(m >= 0 && m <= r, ErrorKind::invalid_argument, "IRLS target dimension out of range");
  if (m == 0) return Matrix(r, 0);
  if (m == r) return Matrix::Identity(r, r);
  const double scale = y.rowwise().norm().maxCoeff();
  const double floor = c.irls_floor * std::max(scale, std::numeric_limits<double>::min());

  auto refine = [&](Matrix basis) {
    double cost = weighted_tail_cost(y, weights, tails, basis, p);
    Matrix best = basis;
    double best_cost = cost;
    for (int it = 0; it < c.irls_iterations; ++it) {
      const Matrix coeffs = y * basis;
      Vector alpha(y.rows());
      for (Index i = 0; i < y.rows(); ++i) {
        const double r2 = (y.row(i) - coeffs.row(i) * basis.transpose()).squaredNorm() + tails[i] * tails[i];
        alpha[i] = weights[i] * std::pow(std::max(std::sqrt(r2), floor), p - 2.0);
      }
      Matrix gram = y.transpose() * alpha.asDiagonal() * y;
      basis = top_eigenvectors(gram, m);
      const double next = weighted_tail_cost(y, weights, tails, basis, p);
      if (next < best_cost) {
        best_cost = next;
        best = basis;
      }
      if (std::abs(cost - next) <= c.irls_tolerance * std::max(cost, std::numeric_limits<double>::min())) break;
      cost = next;
    }
    return std::make_pair(best_cost, best);
  };

  Matrix gram0 = y.transpose() * weights.asDiagonal() * y;
  auto best = refine(top_eigenvectors(gram0, m));
  Rng rng = make_rng(seed, {stream::subspace, 0});
  for (int restart = 0; restart < c.irls_restarts; ++restart) {
    auto candidate = refine(random_subspace(r, m, rng).basis());
    if (candidate.first < best.first) best = candidate;
  }
  return best.second;
}

/// An m-dimensional subspace approximately minimizing cost_p(A, ·).
inline Subspace approx_subspace(const PointMatrix& a, Index m, double eps, double p, SubspaceMode mode, Seed seed,
                                const Constants& c = {}) {
  detail::check_norm_exponent(p);
  const Index d = a.cols();
  require(m >= 1 && m <= d, ErrorKind::invalid_argument,
          "subspace dimension " + std::to_string(m) + " outside [1, " + std::to_string(d) + "]");
  require(eps > 0.0, ErrorKind::invalid_argument, "accuracy must be positive");
  const RowMatrix dense = a.to_dense();
  switch (mode) {
    case SubspaceMode::exact2:
      require(p == 2.0, ErrorKind::invalid_argument, "exact2 mode requires p = 2");
      return orthonormalize(top_right_singular(dense, m));
    case SubspaceMode::bruteforce:
      require(d <= oracle::brute_force_max_ambient && m <= oracle::brute_force_max_dim, ErrorKind::invalid_argument,
              "bruteforce mode is limited to d <= 4 and m <= 2");
      return oracle::brute_force_subspace(dense, m, p, eps).subspace;
    case SubspaceMode::irls: {
      RowSpace rs = row_space(dense);
      const Index r = rs.coords.cols();
      Matrix local = irls_subspace(rs.coords, Vector::Ones(a.rows()), Vector::Zero(a.rows()), std::min(m, r), p, seed, c);
      return orthonormalize(pad_basis(rs.basis * local, m));
    }
  }
  return Subspace::zero(d);
}

/// B = [A·P_S, v] kept factored: row i is (coeffsᵢ·Uᵀ, tailᵢ).
struct AugmentedMatrix {
  Matrix coeffs;  // n x ell
  Subspace basis;
  Vector tail;
  bool exact_tail = true;

  Index rows() const { return coeffs.rows(); }
  Index ambient() const { return basis.ambient(); }

  Vector realized_row(Index i) const {
    Vector out(ambient() + 1);
    out.head(ambient()) = basis.basis() * coeffs.row(i).transpose();
    out[ambient()] = tail[i];
    return out;
  }
};

/// ‖B − B I P Iᵀ‖_{p,2}^p = Σᵢ (‖bᵢ − bᵢP_V‖² + vᵢ²)^{p/2}; the tail is never projected.
inline double augmented_cost(const AugmentedMatrix& b, const Subspace& v, double p) {
  require(v.ambient() == b.ambient(), ErrorKind::dimension_mismatch, "query lives in a different ambient space");
  detail::check_norm_exponent(p);
  // bᵢ = xᵢUᵀ, so bᵢ − bᵢVVᵀ = xᵢ(Uᵀ − (UᵀV)Vᵀ); the residual operator is ell x d.
  const Matrix& u = b.basis.basis();
  const Matrix residual_op = u.transpose() - (u.transpose() * v.basis()) * v.basis().transpose();
  std::vector<double> terms(static_cast<std::size_t>(b.rows()));
  parallel_for(b.rows(), [&](Index i) {
    const double r2 = (b.coeffs.row(i) * residual_op).squaredNorm() + b.tail[i] * b.tail[i];
    terms[static_cast<std::size_t>(i)] = std::pow(r2, p / 2.0);
  });
  return pairwise_sum(terms);
}

struct ReductionReport {
  int iterations = 0;
  std::vector<double> cost_trace;
  double opt_estimate = 0.0;
  double threshold = 0.0;
  Index i_star = 0;  // fast variant only
  Index dimension = 0;
  bool hit_cap = false;
  Seed seed = 0;
};

/// ε^{max(2/p, 1)}.
inline double reduction_power(double eps, double p) { return std::pow(eps, std::max(2.0 / p, 1.0)); }

inline int reduction_iteration_cap(double eps, double p, const Constants& c = {}) {
  return static_cast<int>(std::ceil(c.threshold_divisor / reduction_power(eps, p)));
}

/// Accuracy at which the reduction must run for the p-th power guarantee
/// with cost error ε: ε^{p+3} / (3·(84p)^{2p}).
inline double pth_power_reduction_accuracy(double eps, double p) {
  return std::pow(eps, p + 3.0) / (3.0 * std::pow(84.0 * p, 2.0 * p));
}

struct Reduction {
  AugmentedMatrix matrix;
  ReductionReport report;
};

namespace detail {
inline void check_reduction_args(Index k, double eps, double p) {
  require(k >= 1, ErrorKind::invalid_argument, "k must be >= 1");
  require(eps > 0.0 && eps <= 1.0, ErrorKind::invalid_argument, "epsilon must lie in (0, 1]");
  check_norm_exponent(p);
}

/// Best k-dimensional W ⊥ S for the residual rows R = A(I − P_S): since
/// dist(a, S ⊕ W) = dist(a(I − P_S), W), this is a subspace problem on R.
inline Matrix best_augmentation(const RowMatrix& residual, Index k, double eps, double p, double abs_gap, Seed seed,
                                const Constants& c) {
  RowSpace rs = row_space(residual);
  const Index r = rs.coords.cols();
  const Index m = std::min(k, r);
  if (m == 0) return Matrix(residual.cols(), 0);
  Matrix local;
  if (m == r) {
    local = Matrix::Identity(r, r);
  } else if (p == 2.0) {
    local = top_right_singular(rs.coords, m);
  } else if (r <= oracle::brute_force_max_ambient && m <= oracle::brute_force_max_dim) {
    local = oracle::brute_force_subspace(rs.coords, m, p, eps, abs_gap).subspace.basis();
  } else {
    local = irls_subspace(rs.coords, Vector::Ones(rs.coords.rows()), Vector::Zero(rs.coords.rows()), m, p, seed, c);
  }
  return rs.basis * local;
}
}  // namespace detail

/// Greedy augmentation: start from an approximately optimal rank-k subspace
/// and keep adding k dimensions while some augmentation lowers cost_p by at
/// least ε^{max(2/p,1)}·opt/80. The tail is computed exactly.
inline Reduction dim_reduce_exact(const PointMatrix& a, Index k, double eps, double p, Seed seed,
                                  const Constants& c = {}) {
  detail::check_reduction_args(k, eps, p);
  const Index d = a.cols();
  Reduction out;
  out.report.seed = seed;
  const Index start_dim = std::min(k, d);
  Subspace s = start_dim == 0 ? Subspace::zero(d)
                              : approx_subspace(a, start_dim, eps, p, default_subspace_mode(p, d, start_dim),
                                                derive_seed(seed, {stream::subspace, 0}), c);
  double cost = cost_p(a, s, p);
  out.report.opt_estimate = cost;
  out.report.threshold = reduction_power(eps, p) * cost / c.threshold_divisor;
  out.report.cost_trace.push_back(cost);
  const int cap = reduction_iteration_cap(eps, p, c);
  const double zero_cost = Tolerances{}.relative_error_floor * std::pow(norm_p2(a, p), p);

  while (s.dim() < d && cost > zero_cost) {
    if (out.report.iterations >= cap) {
      out.report.hit_cap = true;
      break;
    }
    const RowMatrix dense = a.to_dense();
    const RowMatrix residual = dense - (dense * s.basis()) * s.basis().transpose();
    Matrix w = detail::best_augmentation(
        residual, k, eps, p, out.report.threshold / 4.0,
        derive_seed(seed, {stream::reduction, static_cast<std::uint64_t>(out.report.iterations)}), c);
    if (w.cols() == 0) break;
    Subspace candidate = extend(s, w);
    const double next = cost_p(a, candidate, p);
    if (cost - next < out.report.threshold) break;
    s = std::move(candidate);
    cost = next;
    out.report.cost_trace.push_back(cost);
    ++out.report.iterations;
  }

  out.report.dimension = s.dim();
  out.matrix.coeffs = a.times(s.basis());
  out.matrix.tail = residual_norms(a, s);
  out.matrix.exact_tail = true;
  out.matrix.basis = std::move(s);
  return out;
}

/// τ = ε^{max(2/p,1)}/8 for the sampled variant.
inline double sampled_tau(double eps, double p, const Constants& c = {}) {
  return reduction_power(eps, p) / c.tau_divisor;
}

/// Draws i* uniformly from {1, …, ⌈10/τ⌉}, fits an approximately optimal
/// (i*·k)-dimensional subspace at accuracy τ and estimates the tail with
/// median sketched regressions at accuracy ε.
inline Reduction dim_reduce_sampled(const PointMatrix& a, Index k, double eps, double p, Seed seed,
                                    const Constants& c = {}) {
  detail::check_reduction_args(k, eps, p);
  const Index d = a.cols();
  const double tau = sampled_tau(eps, p, c);
  const auto range = static_cast<std::uint64_t>(std::ceil(c.tau_index_c / tau));
  Rng rng = make_rng(seed, {stream::index_draw, 0});
  const Index i_star = static_cast<Index>(1 + (static_cast<unsigned __int128>(rng()) * range >> 64));

  const Index m = std::min<Index>(d, i_star * k);
  Subspace s = m == d ? Subspace::full(d)
                      : approx_subspace(a, m, tau, p, default_subspace_mode(p, d, m),
                                        derive_seed(seed, {stream::subspace, 1}), c);
  Reduction out;
  out.report.seed = seed;
  out.report.i_star = i_star;
  out.report.dimension = s.dim();
  const double cost = cost_p(a, s, p);
  out.report.cost_trace.push_back(cost);
  out.report.opt_estimate = cost;
  out.matrix.coeffs = a.times(s.basis());
  out.matrix.tail = median_residuals(a, s, eps, default_repeats(a.rows(), c), derive_seed(seed, {stream::residuals, 0}), c);
  out.matrix.exact_tail = false;
  out.matrix.basis = std::move(s);
  return out;
}

/// B̃: per-row coefficients from one sketched regression onto S, so that
/// Ãᵢ = XᵢVᵀ is a (1+ε)-approximate projection, plus a median-estimated tail.
inline AugmentedMatrix approx_projection_rows(const PointMatrix& a, const Subspace& s, double eps, Seed seed,
                                              const Constants& c = {}) {
  require(eps > 0.0 && eps <= 1.0, ErrorKind::invalid_argument, "epsilon must lie in (0, 1]");
  check_dims(a, s);
  auto spec = CountSketchSpec::make(a.cols(), regression_sketch_width(s.dim(), eps, c),
                                    derive_seed(seed, {stream::regression, 0}));
  AugmentedMatrix out;
  out.coeffs = sketched_regression(a, s, spec).coeffs;
  out.tail = median_residuals(a, s, eps, default_repeats(a.rows(), c), derive_seed(seed, {stream::residuals, 1}), c);
  out.exact_tail = false;
  out.basis = s;
  return out;
}

}  // namespace coreset
