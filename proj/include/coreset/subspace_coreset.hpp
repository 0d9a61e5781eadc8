#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "coreset/dimreduce.hpp"
#include "coreset/sketching.hpp"

namespace coreset {

enum class Variant { exact, fast };

inline std::string_view to_string(Variant v) { return v == Variant::exact ? "exact" : "fast"; }

/// Weighted rows of T·B: points are s x (d+1) with the tail in the last column.
struct SubspaceCoreset {
  RowMatrix points;
  Vector weights;
  double p = 1.0;
  Index k = 1;
  double epsilon = 0.0;
  Variant variant = Variant::exact;
  ReductionReport reduction;
  Seed seed = 0;           // seed of the accepted attempt
  Index sample_count = 0;  // draws before merging duplicates
  int attempts = 1;
  double validation_error = 0.0;

  Index size() const { return points.rows(); }
  Index ambient() const { return points.cols() - 1; }
};

/// c_s·k·ln(k/ε)/ε⁴, the largest coreset the subspace construction may emit.
inline Index subspace_size_bound(Index k, double eps, const Constants& c = {}) {
  const double log_term = std::log(std::max(static_cast<double>(k) / eps, std::numbers::e));
  return static_cast<Index>(std::floor(c.subspace_size_c * static_cast<double>(k) * log_term / std::pow(eps, 4)));
}

/// Lewis-sample count c·f·ln f/ε² for a width-f factored matrix, capped by the size bound.
inline Index subspace_sample_count(Index width, Index k, double eps, const Constants& c = {}) {
  const double f = static_cast<double>(std::max<Index>(width, 1));
  const auto wanted = static_cast<Index>(std::ceil(c.lewis_sample_c * f * std::log(std::max(f, 2.0)) / (eps * eps)));
  return std::clamp<Index>(wanted, 1, std::max<Index>(1, subspace_size_bound(k, eps, c)));
}

/// Σ wᵢ^p (‖bᵢ − bᵢP_V‖² + tailᵢ²)^{p/2}.
inline double eval_subspace_cost_pth(const SubspaceCoreset& core, const Subspace& v) {
  require(v.ambient() == core.ambient(), ErrorKind::dimension_mismatch,
          "query subspace lives in R^" + std::to_string(v.ambient()) + ", coreset in R^" +
              std::to_string(core.ambient()));
  const Index d = core.ambient();
  std::vector<double> terms(static_cast<std::size_t>(core.size()));
  for (Index i = 0; i < core.size(); ++i) {
    const Vector b = core.points.row(i).head(d).transpose();
    const double t = core.points(i, d);
    const double r2 = v.residual(b).squaredNorm() + t * t;
    terms[static_cast<std::size_t>(i)] = std::pow(core.weights[i], core.p) * std::pow(r2, core.p / 2.0);
  }
  return pairwise_sum(terms);
}

/// (Σ wᵢ^p (‖bᵢ − bᵢP_V‖² + tailᵢ²)^{p/2})^{1/p}; the tail coordinate is never projected.
inline double eval_subspace_cost(const SubspaceCoreset& core, const Subspace& v) {
  return std::pow(eval_subspace_cost_pth(core, v), 1.0 / core.p);
}

/// Rank-k subspace minimizing the coreset objective (IRLS on the weighted rows).
inline Subspace coreset_optimal_subspace(const SubspaceCoreset& core, Seed seed, const Constants& c = {}) {
  const Index d = core.ambient();
  const RowMatrix b = core.points.leftCols(d);
  const Vector tails = core.points.col(d);
  const Vector weights = core.weights.array().pow(core.p);
  RowSpace rs = row_space(b);
  const Index m = std::min<Index>(core.k, rs.coords.cols());
  Matrix local = irls_subspace(rs.coords, weights, tails, m, core.p, seed, c);
  return orthonormalize(pad_basis(rs.basis * local, std::min(core.k, d)));
}

namespace detail {

inline SubspaceCoreset sample_subspace_coreset(const PointMatrix& a, const Reduction& red, Index k, double eps,
                                               double p, Seed seed, const Constants& c) {
  const AugmentedMatrix& b = red.matrix;
  Matrix factored(b.rows(), b.coeffs.cols() + 1);
  factored << b.coeffs, b.tail;
  const LewisWeights lw = lewis_weights(factored, p, default_lewis_iterations(a.rows()), seed, false, c);
  const Index width = std::max<Index>(1, column_space_basis(factored).cols());
  const Index count = subspace_sample_count(width, k, eps, c);
  const SamplingRescaling t = build_sampling_matrix(lw, p, count, seed).merged(p);

  SubspaceCoreset out;
  const Index d = a.cols();
  out.points.resize(static_cast<Index>(t.size()), d + 1);
  out.weights.resize(static_cast<Index>(t.size()));
  for (std::size_t j = 0; j < t.size(); ++j) {
    const Index i = t.rows[j];
    const auto r = static_cast<Index>(j);
    out.points.row(r).head(d) = (b.basis.basis() * b.coeffs.row(i).transpose()).transpose();
    out.points(r, d) = b.tail[i];
    out.weights[r] = t.weights[j];
  }
  out.p = p;
  out.k = k;
  out.epsilon = eps;
  out.reduction = red.report;
  out.seed = seed;
  out.sample_count = count;
  return out;
}

/// Max relative error of the p-th power cost over random rank-k queries and
/// the coreset's own IRLS minimizer.
inline double validation_error(const PointMatrix& a, const SubspaceCoreset& core, Seed seed, const Constants& c) {
  Rng rng = make_rng(seed, {stream::validation, 0});
  const Index d = a.cols();
  const Index k = std::min(core.k, d);
  std::vector<Subspace> queries;
  for (int q = 0; q < c.validate_queries; ++q) queries.push_back(random_subspace(d, k, rng));
  queries.push_back(coreset_optimal_subspace(core, derive_seed(seed, {stream::validation, 1}), c));
  const double floor = Tolerances{}.relative_error_floor * std::max(1.0, std::pow(norm_p2(a, core.p), core.p));
  double worst = 0.0;
  for (const auto& v : queries) {
    const double truth = cost_p(a, v, core.p);
    const double approx = eval_subspace_cost_pth(core, v);
    worst = std::max(worst, std::abs(truth - approx) / std::max(truth, floor));
  }
  return worst;
}

}  // namespace detail

/// Strong coreset for ℓ_p subspace approximation: reduce (exact or sampled),
/// Lewis-weight sample the factored [A·U, v] rows, and materialize only the
/// sampled rows of B. With validation enabled, a build whose measured error
/// on random queries exceeds ε is retried with a fresh seed.
inline SubspaceCoreset build_subspace_coreset(const PointMatrix& a, Index k, double eps, double p, Variant variant,
                                              Seed seed, const Constants& c = {}) {
  detail::check_reduction_args(k, eps, p);
  require(a.rows() >= 1, ErrorKind::invalid_argument, "cannot build a coreset of an empty matrix");
  if (norm_p2(a, p) == 0.0) {
    SubspaceCoreset out;
    out.points = RowMatrix::Zero(1, a.cols() + 1);
    out.weights = Vector::Constant(1, std::pow(static_cast<double>(a.rows()), 1.0 / p));
    out.p = p;
    out.k = k;
    out.epsilon = eps;
    out.variant = variant;
    out.seed = seed;
    out.sample_count = 1;
    return out;
  }

  SubspaceCoreset best;
  bool have_best = false;
  const int attempts = c.validate ? 1 + c.validate_retries : 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    const Seed s = attempt == 0 ? seed : derive_seed(seed, {stream::retry, static_cast<std::uint64_t>(attempt)});
    const Reduction red = variant == Variant::exact ? dim_reduce_exact(a, k, eps / 2.0, p, s, c)
                                                    : dim_reduce_sampled(a, k, eps / 2.0, p, s, c);
    SubspaceCoreset candidate = detail::sample_subspace_coreset(a, red, k, eps, p, s, c);
    candidate.variant = variant;
    candidate.attempts = attempt + 1;
    if (!c.validate) return candidate;
    candidate.validation_error = detail::validation_error(a, candidate, s, c);
    if (!have_best || candidate.validation_error < best.validation_error) {
      best = std::move(candidate);
      have_best = true;
    }
    best.attempts = attempt + 1;
    if (best.validation_error <= eps) break;
  }
  return best;
}

}  // namespace coreset
