#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "coreset/config.hpp"
#include "coreset/error.hpp"
#include "coreset/parallel.hpp"
#include "coreset/random.hpp"

namespace coreset {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/// Above this fraction of nonzeros a triplet input is stored densely.
inline constexpr double dense_fallback_density = 0.25;

inline std::string shape_string(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

template <class Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.derived().allFinite();
}

/// n points in R^d stored as rows, either dense or as a compressed sparse
/// row matrix built from triplets.
class PointMatrix {
 public:
  PointMatrix() : storage_(RowMatrix(0, 0)) {}

  static PointMatrix dense(RowMatrix rows) {
    require(all_finite(rows), ErrorKind::non_finite, "point matrix contains non-finite entries");
    PointMatrix m;
    m.storage_ = std::move(rows);
    return m;
  }

  static PointMatrix dense(const Matrix& rows) { return dense(RowMatrix(rows)); }

  /// Duplicated (row, col) entries are summed. Storage is dense when the
  /// resulting density exceeds dense_fallback_density.
  static PointMatrix from_triplets(Index n, Index d, const std::vector<Triplet>& triplets) {
    require(n >= 0 && d >= 0, ErrorKind::invalid_argument, "negative matrix shape");
    for (const auto& t : triplets) {
      require(t.row() >= 0 && t.row() < n && t.col() >= 0 && t.col() < d,
              ErrorKind::invalid_argument,
              "triplet (" + std::to_string(t.row()) + "," + std::to_string(t.col()) +
                  ") outside " + shape_string(n, d));
      require(std::isfinite(t.value()), ErrorKind::non_finite, "non-finite triplet value");
    }
    SparseRowMatrix sparse(n, d);
    sparse.setFromTriplets(triplets.begin(), triplets.end());
    sparse.makeCompressed();
    const double cells = static_cast<double>(n) * static_cast<double>(d);
    PointMatrix m;
    if (cells > 0 && static_cast<double>(sparse.nonZeros()) > dense_fallback_density * cells) {
      m.storage_ = RowMatrix(sparse);
    } else {
      m.storage_ = std::move(sparse);
    }
    return m;
  }

  Index rows() const {
    return std::visit([](const auto& s) { return static_cast<Index>(s.rows()); }, storage_);
  }
  Index cols() const {
    return std::visit([](const auto& s) { return static_cast<Index>(s.cols()); }, storage_);
  }
  bool is_sparse() const { return std::holds_alternative<SparseRowMatrix>(storage_); }

  Index nnz() const {
    if (is_sparse()) return std::get<SparseRowMatrix>(storage_).nonZeros();
    const auto& m = std::get<RowMatrix>(storage_);
    return static_cast<Index>((m.array() != 0.0).count());
  }

  Vector row(Index i) const {
    if (is_sparse()) return Vector(std::get<SparseRowMatrix>(storage_).row(i).transpose());
    return std::get<RowMatrix>(storage_).row(i).transpose();
  }

  double row_squared_norm(Index i) const {
    if (is_sparse()) return std::get<SparseRowMatrix>(storage_).row(i).squaredNorm();
    return std::get<RowMatrix>(storage_).row(i).squaredNorm();
  }

  /// Visits the stored entries of row i as fn(col, value).
  template <class Fn>
  void for_each_in_row(Index i, Fn&& fn) const {
    if (is_sparse()) {
      for (SparseRowMatrix::InnerIterator it(std::get<SparseRowMatrix>(storage_), i); it; ++it)
        fn(static_cast<Index>(it.col()), it.value());
    } else {
      const auto& m = std::get<RowMatrix>(storage_);
      for (Index j = 0; j < m.cols(); ++j)
        if (m(i, j) != 0.0) fn(j, m(i, j));
    }
  }

  /// this * right, one pass over the stored entries.
  Matrix times(const Matrix& right) const {
    require(right.rows() == cols(), ErrorKind::dimension_mismatch,
            "cannot multiply " + shape_string(rows(), cols()) + " by " +
                shape_string(right.rows(), right.cols()));
    if (is_sparse()) return std::get<SparseRowMatrix>(storage_) * right;
    return std::get<RowMatrix>(storage_) * right;
  }

  RowMatrix to_dense() const {
    if (is_sparse()) return RowMatrix(std::get<SparseRowMatrix>(storage_));
    return std::get<RowMatrix>(storage_);
  }

  /// Rows picked by index, always dense.
  RowMatrix select_rows(std::span<const Index> indices) const {
    RowMatrix out(static_cast<Index>(indices.size()), cols());
    for (std::size_t r = 0; r < indices.size(); ++r) out.row(static_cast<Index>(r)) = row(indices[r]).transpose();
    return out;
  }

 private:
  std::variant<RowMatrix, SparseRowMatrix> storage_;
};

/// Orthonormal basis (d x ell, columns) of a linear subspace of R^d.
class Subspace {
 public:
  Subspace() = default;

  static Subspace from_orthonormal(Matrix basis, double tolerance = Tolerances{}.orthonormality) {
    require(basis.cols() <= basis.rows(), ErrorKind::invalid_argument,
            "subspace dimension exceeds ambient dimension");
    require(all_finite(basis), ErrorKind::non_finite, "subspace basis contains non-finite entries");
    const Index ell = basis.cols();
    if (ell > 0) {
      const double deviation =
          (basis.transpose() * basis - Matrix::Identity(ell, ell)).cwiseAbs().maxCoeff();
      require(deviation <= tolerance, ErrorKind::invalid_argument,
              "basis is not orthonormal (max |U^T U - I| = " + std::to_string(deviation) + ")");
    }
    Subspace s;
    s.basis_ = std::move(basis);
    return s;
  }

  static Subspace zero(Index d) {
    Subspace s;
    s.basis_ = Matrix(d, 0);
    return s;
  }
  static Subspace full(Index d) { return from_orthonormal(Matrix::Identity(d, d)); }

  Index ambient() const { return basis_.rows(); }
  Index dim() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }

  Vector project(const Vector& x) const { return basis_ * (basis_.transpose() * x); }
  Vector residual(const Vector& x) const { return x - project(x); }
  double distance(const Vector& x) const { return residual(x).norm(); }

 private:
  Matrix basis_;
};

/// k points in R^d, one per row.
class CenterSet {
 public:
  CenterSet() = default;
  explicit CenterSet(RowMatrix centers) : centers_(std::move(centers)) {
    require(centers_.rows() >= 1, ErrorKind::invalid_argument, "center set is empty");
    require(all_finite(centers_), ErrorKind::non_finite, "center set contains non-finite entries");
  }

  Index size() const { return centers_.rows(); }
  Index dim() const { return centers_.cols(); }
  const RowMatrix& centers() const { return centers_; }
  auto center(Index j) const { return centers_.row(j); }

 private:
  RowMatrix centers_;
};

namespace detail {
inline void check_norm_exponent(double p) {
  require(std::isfinite(p) && p >= 1.0, ErrorKind::invalid_argument,
          "norm exponent p must be >= 1, got " + std::to_string(p));
}

/// (Σ xᵢ^p) with a fixed reduction tree.
inline double power_sum(const Vector& values, double p) {
  std::vector<double> powered(static_cast<std::size_t>(values.size()));
  for (Index i = 0; i < values.size(); ++i)
    powered[static_cast<std::size_t>(i)] = p == 1.0 ? values[i] : std::pow(values[i], p);
  return pairwise_sum(powered);
}
}  // namespace detail

/// (Σᵢ ‖Mᵢ‖₂^p)^{1/p}.
template <class Derived>
double norm_p2(const Eigen::MatrixBase<Derived>& m, double p) {
  detail::check_norm_exponent(p);
  require(all_finite(m), ErrorKind::non_finite, "matrix contains non-finite entries");
  Vector norms = m.rowwise().norm();
  const double scale = norms.size() ? norms.maxCoeff() : 0.0;
  if (scale == 0.0) return 0.0;
  return scale * std::pow(detail::power_sum(norms / scale, p), 1.0 / p);
}

inline double norm_p2(const PointMatrix& m, double p) {
  detail::check_norm_exponent(p);
  Vector norms(m.rows());
  for (Index i = 0; i < m.rows(); ++i) norms[i] = std::sqrt(m.row_squared_norm(i));
  const double scale = norms.size() ? norms.maxCoeff() : 0.0;
  if (scale == 0.0) return 0.0;
  return scale * std::pow(detail::power_sum(norms / scale, p), 1.0 / p);
}

inline void check_dims(const PointMatrix& a, const Subspace& s) {
  require(a.cols() == s.ambient(), ErrorKind::dimension_mismatch,
          "points live in R^" + std::to_string(a.cols()) + " but subspace in R^" +
              std::to_string(s.ambient()));
}

/// ‖Aᵢ - AᵢUUᵀ‖₂ for every row, computed from the explicit residual vector.
inline Vector residual_norms(const PointMatrix& a, const Subspace& s) {
  check_dims(a, s);
  const Matrix coeffs = a.times(s.basis());
  Vector out(a.rows());
  parallel_for(a.rows(), [&](Index i) {
    Vector r = a.row(i) - s.basis() * coeffs.row(i).transpose();
    out[i] = r.norm();
  });
  return out;
}

/// Σᵢ dist(Aᵢ, S)^p — the p-th power sum, not its root.
inline double cost_p(const PointMatrix& a, const Subspace& s, double p) {
  detail::check_norm_exponent(p);
  return detail::power_sum(residual_norms(a, s), p);
}

/// A projected onto S in factored form: reconstruction = coeffs · basisᵀ.
struct Projection {
  Matrix coeffs;
  Subspace subspace;

  Vector reconstruct_row(Index i) const { return subspace.basis() * coeffs.row(i).transpose(); }
};

inline Projection project(const PointMatrix& a, const Subspace& s) {
  check_dims(a, s);
  return Projection{a.times(s.basis()), s};
}

struct NearestCenter {
  Index index = 0;
  double distance = 0.0;
};

/// Nearest center by Euclidean distance; ties resolve to the lowest index.
template <class Derived>
NearestCenter dist_to_centers(const Eigen::MatrixBase<Derived>& x, const CenterSet& c) {
  require(c.size() >= 1, ErrorKind::invalid_argument, "center set is empty");
  require(x.size() == c.dim(), ErrorKind::dimension_mismatch,
          "point dimension " + std::to_string(x.size()) + " != center dimension " +
              std::to_string(c.dim()));
  NearestCenter best{0, std::numeric_limits<double>::infinity()};
  for (Index j = 0; j < c.size(); ++j) {
    double sq = 0.0;
    for (Index t = 0; t < x.size(); ++t) {
      const double diff = x.derived()(t) - c.centers()(j, t);
      sq += diff * diff;
    }
    if (sq < best.distance) best = {j, sq};
  }
  best.distance = std::sqrt(best.distance);
  return best;
}

/// Column-ordered Gram–Schmidt with one re-orthogonalization pass. A column
/// whose residual falls below pivot·(max column norm) is dropped, so a
/// rank-deficient V yields ell = rank(V).
inline Subspace orthonormalize(const Matrix& v, double pivot = Tolerances{}.rank_pivot) {
  const Index d = v.rows();
  require(all_finite(v), ErrorKind::non_finite, "cannot orthonormalize non-finite columns");
  double max_norm = 0.0;
  for (Index j = 0; j < v.cols(); ++j) max_norm = std::max(max_norm, v.col(j).norm());
  Matrix q(d, std::min(v.cols(), d));
  Index rank = 0;
  if (max_norm > 0.0) {
    for (Index j = 0; j < v.cols() && rank < d; ++j) {
      Vector w = v.col(j);
      for (int pass = 0; pass < 2; ++pass) {
        if (rank > 0) w -= q.leftCols(rank) * (q.leftCols(rank).transpose() * w);
      }
      const double norm = w.norm();
      if (norm > pivot * max_norm) q.col(rank++) = w / norm;
    }
  }
  return Subspace::from_orthonormal(q.leftCols(rank));
}

/// Orthonormal basis of span(U) ⊕ span(extra).
inline Subspace extend(const Subspace& s, const Matrix& extra) {
  Matrix joined(s.ambient(), s.dim() + extra.cols());
  joined << s.basis(), extra;
  return orthonormalize(joined);
}

/// Columns completing an orthonormal basis to a basis of R^d (d x (d - ell)).
inline Matrix orthogonal_complement(const Subspace& s) {
  const Index d = s.ambient();
  if (s.dim() == 0) return Matrix::Identity(d, d);
  Eigen::HouseholderQR<Matrix> qr(s.basis());
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  return q.rightCols(d - s.dim());
}

/// Uniformly random ell-dimensional subspace (Gaussian frame, orthonormalized).
inline Subspace random_subspace(Index d, Index ell, Rng& rng) {
  require(ell <= d, ErrorKind::invalid_argument, "random subspace dimension exceeds ambient");
  std::normal_distribution<double> gauss;
  for (;;) {
    Matrix g(d, ell);
    for (Index j = 0; j < ell; ++j)
      for (Index i = 0; i < d; ++i) g(i, j) = gauss(rng);
    Subspace s = orthonormalize(g);
    if (s.dim() == ell) return s;
  }
}

}  // namespace coreset
