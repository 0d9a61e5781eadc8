#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "coreset/linalg.hpp"

namespace coreset {

/// A CountSketch: input column i of the (target_rows x input_dim) sketch
/// matrix holds a single ±1 at row hash[i].
struct CountSketchSpec {
  Index input_dim = 0;
  Index target_rows = 1;
  Seed seed = 0;
  std::vector<Index> hash;
  std::vector<std::int8_t> sign;

  static CountSketchSpec make(Index input_dim, Index target_rows, Seed seed) {
    require(target_rows >= 1, ErrorKind::invalid_argument, "CountSketch needs at least one row");
    CountSketchSpec spec;
    spec.input_dim = input_dim;
    spec.target_rows = target_rows;
    spec.seed = seed;
    spec.hash.resize(static_cast<std::size_t>(input_dim));
    spec.sign.resize(static_cast<std::size_t>(input_dim));
    Rng rng(seed);
    const auto rows = static_cast<std::uint64_t>(target_rows);
    for (Index i = 0; i < input_dim; ++i) {
      // Lemire's multiply-shift reduction keeps the draw portable.
      const std::uint64_t r = rng();
      spec.hash[static_cast<std::size_t>(i)] =
          static_cast<Index>((static_cast<unsigned __int128>(r) * rows) >> 64);
      spec.sign[static_cast<std::size_t>(i)] = (rng() >> 63) ? 1 : -1;
    }
    return spec;
  }

  /// Distinct buckets in increasing order and the compact slot of every input.
  std::pair<std::vector<Index>, std::vector<Index>> compact_buckets() const {
    std::vector<Index> buckets(hash);
    std::sort(buckets.begin(), buckets.end());
    buckets.erase(std::unique(buckets.begin(), buckets.end()), buckets.end());
    std::vector<Index> slot(hash.size());
    for (std::size_t i = 0; i < hash.size(); ++i)
      slot[i] = static_cast<Index>(std::lower_bound(buckets.begin(), buckets.end(), hash[i]) - buckets.begin());
    return {std::move(buckets), std::move(slot)};
  }
};

/// Output row j = Σ_{i : hash(i) = j} sign(i)·Mᵢ, one pass over stored entries.
inline RowMatrix countsketch_apply(const CountSketchSpec& spec, const PointMatrix& m) {
  require(spec.input_dim == m.rows(), ErrorKind::dimension_mismatch,
          "CountSketch expects " + std::to_string(spec.input_dim) + " rows, got " +
              std::to_string(m.rows()));
  RowMatrix out = RowMatrix::Zero(spec.target_rows, m.cols());
  for (Index i = 0; i < m.rows(); ++i) {
    const Index bucket = spec.hash[static_cast<std::size_t>(i)];
    const double s = spec.sign[static_cast<std::size_t>(i)];
    m.for_each_in_row(i, [&](Index col, double value) { out(bucket, col) += s * value; });
  }
  return out;
}

/// Same sketch, keeping only the occupied buckets (in increasing bucket order).
inline Matrix countsketch_apply_compact(const CountSketchSpec& spec, const Matrix& m) {
  require(spec.input_dim == m.rows(), ErrorKind::dimension_mismatch, "CountSketch input mismatch");
  auto [buckets, slot] = spec.compact_buckets();
  Matrix out = Matrix::Zero(static_cast<Index>(buckets.size()), m.cols());
  for (Index i = 0; i < m.rows(); ++i)
    out.row(slot[static_cast<std::size_t>(i)]) += spec.sign[static_cast<std::size_t>(i)] * m.row(i);
  return out;
}

/// Sketch width c·ell²/ε² used for per-row regression.
inline Index regression_sketch_width(Index ell, double eps, const Constants& c = {}) {
  const double e = std::max(ell, Index{1});
  return std::max<Index>(std::max<Index>(ell, 1),
                         static_cast<Index>(std::ceil(c.sketch_width_c * e * e / (eps * eps))));
}

struct SketchedRegression {
  Vector residuals;  // per row: min_x ‖AᵢS' − xVᵀS'‖
  Matrix coeffs;     // per row: the minimizing x (n x ell)
};

/// Solves every row's regression onto span(basis) inside one CountSketch of
/// the coordinate space (spec.input_dim must equal d).
inline SketchedRegression sketched_regression(const PointMatrix& m, const Subspace& basis,
                                              const CountSketchSpec& spec) {
  check_dims(m, basis);
  require(spec.input_dim == m.cols(), ErrorKind::dimension_mismatch,
          "regression sketch must hash the " + std::to_string(m.cols()) + " coordinates");
  const Index ell = basis.dim();
  require(spec.target_rows >= ell, ErrorKind::invalid_argument,
          "sketch with " + std::to_string(spec.target_rows) + " rows cannot resolve a " +
              std::to_string(ell) + "-dimensional basis");
  auto [buckets, slot] = spec.compact_buckets();
  const Index t = static_cast<Index>(buckets.size());

  Matrix sketched_basis = Matrix::Zero(t, ell);
  for (Index j = 0; j < m.cols(); ++j)
    sketched_basis.row(slot[static_cast<std::size_t>(j)]) +=
        spec.sign[static_cast<std::size_t>(j)] * basis.basis().row(j);
  Eigen::ColPivHouseholderQR<Matrix> qr(sketched_basis);

  SketchedRegression out{Vector(m.rows()), Matrix::Zero(m.rows(), ell)};
  parallel_for(m.rows(), [&](Index i) {
    Vector sa = Vector::Zero(t);
    m.for_each_in_row(i, [&](Index col, double value) {
      sa[slot[static_cast<std::size_t>(col)]] += spec.sign[static_cast<std::size_t>(col)] * value;
    });
    if (ell == 0) {
      out.residuals[i] = sa.norm();
      return;
    }
    Vector x = qr.solve(sa);
    out.coeffs.row(i) = x.transpose();
    out.residuals[i] = (sa - sketched_basis * x).norm();
  });
  return out;
}

inline Index default_repeats(Index n, const Constants& c = {}) {
  return std::max<Index>(1, static_cast<Index>(std::ceil(c.median_repeats_c * std::log(std::max<Index>(n, 2)))));
}

/// Entrywise median over `repeats` independent sketched regressions.
inline Vector median_residuals(const PointMatrix& a, const Subspace& s, double eps, Index repeats,
                               Seed seed, const Constants& c = {}) {
  require(repeats >= 1, ErrorKind::invalid_argument, "repeats must be >= 1");
  require(eps > 0.0 && eps <= 1.0, ErrorKind::invalid_argument, "epsilon must lie in (0, 1]");
  check_dims(a, s);
  const Index width = regression_sketch_width(s.dim(), eps, c);
  Matrix estimates(a.rows(), repeats);
  for (Index r = 0; r < repeats; ++r) {
    auto spec = CountSketchSpec::make(a.cols(), width,
                                      derive_seed(seed, {stream::residuals, static_cast<std::uint64_t>(r)}));
    estimates.col(r) = sketched_regression(a, s, spec).residuals;
  }
  Vector v(a.rows());
  std::vector<double> row(static_cast<std::size_t>(repeats));
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index r = 0; r < repeats; ++r) row[static_cast<std::size_t>(r)] = estimates(i, r);
    std::sort(row.begin(), row.end());
    const std::size_t mid = row.size() / 2;
    v[i] = row.size() % 2 ? row[mid] : 0.5 * (row[mid - 1] + row[mid]);
  }
  return v;
}

/// Orthonormal basis of the column space of m, rank decided by pivoted QR.
inline Matrix column_space_basis(const Matrix& m, double pivot = Tolerances{}.rank_pivot) {
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  qr.setThreshold(pivot);
  const Index rank = qr.rank();
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), rank);
  return q;
}

/// τᵢ = ‖Qᵢ‖² for an orthonormal basis Q of the column space.
inline Vector leverage_scores_exact(const Matrix& m) {
  return column_space_basis(m).rowwise().squaredNorm();
}

/// Leverage scores to within a constant factor: CountSketch the rows, take R
/// from QR of the sketch, then read row norms of M·R⁻¹·G for a Gaussian G
/// with ⌈c·ln n⌉ columns scaled by 1/√cols.
inline Vector leverage_scores_approx(const Matrix& m, Seed seed, const Constants& c = {}) {
  const Index n = m.rows();
  const Index width = m.cols();
  require(width <= n, ErrorKind::invalid_argument, "leverage scores need at least as many rows as columns");
  if (width == 0) return Vector::Zero(n);
  const Index t = std::max<Index>(width, static_cast<Index>(std::ceil(c.leverage_sketch_c * width * width)));
  auto spec = CountSketchSpec::make(n, t, derive_seed(seed, {stream::leverage, 0}));
  Matrix sketched = countsketch_apply_compact(spec, m);
  require(sketched.rows() >= width, ErrorKind::degenerate, "sketch has fewer occupied rows than columns");
  Eigen::HouseholderQR<Matrix> qr(sketched);
  Matrix r = qr.matrixQR().topRows(width).triangularView<Eigen::Upper>();
  const double rmax = r.diagonal().cwiseAbs().maxCoeff();
  for (Index j = 0; j < width; ++j)
    require(std::abs(r(j, j)) > Tolerances{}.rank_pivot * rmax && rmax > 0.0, ErrorKind::degenerate,
            "sketched matrix is rank deficient");

  const Index g_cols = std::max<Index>(1, static_cast<Index>(std::ceil(c.gaussian_columns_c * std::log(std::max<Index>(n, 2)))));
  Rng rng = make_rng(seed, {stream::gaussian, 0});
  std::normal_distribution<double> gauss;
  Matrix g(width, g_cols);
  for (Index jj = 0; jj < g_cols; ++jj)
    for (Index ii = 0; ii < width; ++ii) g(ii, jj) = gauss(rng) / std::sqrt(static_cast<double>(g_cols));
  Matrix rinv_g = r.triangularView<Eigen::Upper>().solve(g);
  return (m * rinv_g).rowwise().squaredNorm();
}

struct LewisWeights {
  double p = 1.0;
  Vector w;
  int iterations = 0;
  double last_change = 0.0;
  bool converged = true;
  bool best_effort = false;  // p > 2: damped iteration without a convergence guarantee
};

inline int default_lewis_iterations(Index n) {
  const double nn = static_cast<double>(std::max<Index>(n, 4));
  return static_cast<int>(std::ceil(4.0 + std::log2(std::log2(nn))));
}

/// ℓ_p Lewis weights by the fixed-point iteration
///   wᵢ ← ( wᵢ^{2/p−1} · τᵢ(W^{1/2−1/p} M) )^{p/2},  w⁰ = 1,
/// whose fixed point satisfies wᵢ = τᵢ(W^{1/2−1/p} M). Leverage scores τ come
/// from thin QR when exact is set, otherwise from leverage_scores_approx.
inline LewisWeights lewis_weights(const Matrix& m, double p, int iters, Seed seed, bool exact,
                                  const Constants& c = {}) {
  detail::check_norm_exponent(p);
  require(iters >= 1, ErrorKind::invalid_argument, "Lewis iteration count must be >= 1");
  require(all_finite(m), ErrorKind::non_finite, "Lewis weights of non-finite matrix");
  const Index n = m.rows();

  // Only the column span matters; drop dependent columns first.
  Eigen::ColPivHouseholderQR<Matrix> pivot_qr(m);
  pivot_qr.setThreshold(Tolerances{}.rank_pivot);
  const Index rank = pivot_qr.rank();
  Matrix basis(n, rank);
  for (Index j = 0; j < rank; ++j) basis.col(j) = m.col(pivot_qr.colsPermutation().indices()[j]);

  LewisWeights out;
  out.p = p;
  out.best_effort = p > 2.0;
  out.w = Vector::Ones(n);
  const double damping = out.best_effort ? c.lewis_damping : 1.0;
  for (int it = 0; it < iters; ++it) {
    Vector scale = out.w.array().pow(0.5 - 1.0 / p);
    Matrix scaled = scale.asDiagonal() * basis;
    Vector tau;
    if (exact || rank == 0) {
      tau = rank == 0 ? Vector::Zero(n) : leverage_scores_exact(scaled);
    } else {
      try {
        tau = leverage_scores_approx(scaled, derive_seed(seed, {stream::lewis, static_cast<std::uint64_t>(it)}), c);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::degenerate) throw;
        tau = leverage_scores_exact(scaled);
      }
    }
    Vector next(n);
    double change = 0.0;
    for (Index i = 0; i < n; ++i) {
      double target = std::pow(std::pow(out.w[i], 2.0 / p - 1.0) * tau[i], p / 2.0);
      if (damping < 1.0) target = std::pow(out.w[i], 1.0 - damping) * std::pow(target, damping);
      next[i] = std::clamp(target, 1e-12, 1.0);
      change = std::max(change, std::abs(next[i] - out.w[i]) / out.w[i]);
    }
    out.w = next;
    out.iterations = it + 1;
    out.last_change = change;
  }
  out.converged = out.last_change <= c.lewis_failure_change;
  return out;
}

/// The sampling-and-rescaling matrix T: sampled row i carries weight
/// (1/(count·qᵢ))^{1/p}. Duplicates are allowed.
struct SamplingRescaling {
  std::vector<Index> rows;
  std::vector<double> weights;

  std::size_t size() const { return rows.size(); }

  /// Collapses repeated rows: c copies of weight w become one row of weight
  /// (c·w^p)^{1/p}, which leaves every p-th power objective unchanged.
  SamplingRescaling merged(double p) const {
    std::map<Index, double> mass;
    for (std::size_t j = 0; j < rows.size(); ++j) mass[rows[j]] += std::pow(weights[j], p);
    SamplingRescaling out;
    for (const auto& [row, m] : mass) {
      out.rows.push_back(row);
      out.weights.push_back(std::pow(m, 1.0 / p));
    }
    return out;
  }
};

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// i.i.d. draws from the discrete distribution ∝ probabilities (need not be normalized).
inline std::vector<Index> sample_indices(const Vector& probabilities, Index count, Rng& rng) {
  std::vector<double> cumulative(static_cast<std::size_t>(probabilities.size()));
  double total = 0.0;
  for (Index i = 0; i < probabilities.size(); ++i) {
    total += probabilities[i];
    cumulative[static_cast<std::size_t>(i)] = total;
  }
  std::vector<Index> out(static_cast<std::size_t>(count));
  for (auto& idx : out) {
    const double u = uniform01(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    // Skip zero-probability entries that share the same cumulative value.
    while (probabilities[it - cumulative.begin()] <= 0.0 && it != cumulative.begin()) --it;
    idx = static_cast<Index>(it - cumulative.begin());
  }
  return out;
}

inline SamplingRescaling build_sampling_matrix(const LewisWeights& w, double p, Index count, Seed seed) {
  detail::check_norm_exponent(p);
  require(count >= 1, ErrorKind::invalid_argument, "sample count must be >= 1");
  const double total = w.w.sum();
  require(total > 0.0 && std::isfinite(total), ErrorKind::degenerate, "all sampling weights are zero");
  Rng rng = make_rng(seed, {stream::sampling, 0});
  SamplingRescaling t;
  t.rows = sample_indices(w.w, count, rng);
  t.weights.reserve(t.rows.size());
  for (Index i : t.rows) {
    const double q = w.w[i] / total;
    t.weights.push_back(std::pow(1.0 / (static_cast<double>(count) * q), 1.0 / p));
  }
  return t;
}

}  // namespace coreset
