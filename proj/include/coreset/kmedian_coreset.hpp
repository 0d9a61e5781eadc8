#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "coreset/dimreduce.hpp"
#include "coreset/sketching.hpp"

namespace coreset {

/// Weighted points (b, v) in R^{d+1}; the tail v is never matched by a center.
struct WeightedCoreset {
  RowMatrix points;
  Vector weights;
  Index k = 1;
  double epsilon = 0.0;
  Seed seed = 0;
  ReductionReport reduction;
  Index sample_count = 0;
  Index source_rows = 0;
  double sensitivity_total = 0.0;

  Index size() const { return points.rows(); }
  Index ambient() const { return points.cols() - 1; }
};

struct LocalSearchResult {
  CenterSet centers;
  std::vector<Index> assignments;
  double cost = 0.0;
};

namespace detail {

inline double augmented_distance(const RowMatrix& pts, Index i, double tail, const RowMatrix& centers, Index j) {
  return std::sqrt((pts.row(i) - centers.row(j)).squaredNorm() + tail * tail);
}

inline Index nearest(const RowMatrix& pts, Index i, const RowMatrix& centers) {
  Index best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < centers.rows(); ++j) {
    const double sq = (pts.row(i) - centers.row(j)).squaredNorm();
    if (sq < best_sq) {
      best_sq = sq;
      best = j;
    }
  }
  return best;
}

/// Weiszfeld iteration for argmin_c Σ wᵢ √(‖bᵢ − c‖² + tᵢ²), with the
/// Vardi–Zhang step when the iterate sits on a zero-distance point.
inline RowVector weiszfeld(const RowMatrix& pts, const Vector& weights, const Vector& tails,
                           const std::vector<Index>& members, RowVector center, const Constants& c) {
  double scale = 0.0;
  for (Index i : members) scale = std::max(scale, pts.row(i).norm());
  const double floor = 1e-12 * std::max(scale, 1.0);
  for (int it = 0; it < c.weiszfeld_max_iterations; ++it) {
    RowVector num = RowVector::Zero(pts.cols());
    RowVector pull = RowVector::Zero(pts.cols());
    double den = 0.0;
    double coincident = 0.0;
    for (Index i : members) {
      const double dist = std::sqrt((pts.row(i) - center).squaredNorm() + tails[i] * tails[i]);
      if (dist <= floor) {
        coincident += weights[i];
        continue;
      }
      num += (weights[i] / dist) * pts.row(i);
      pull += (weights[i] / dist) * (pts.row(i) - center);
      den += weights[i] / dist;
    }
    if (den <= 0.0) break;
    RowVector next = num / den;
    if (coincident > 0.0) {
      const double r = pull.norm();
      if (r <= coincident) break;
      const double keep = coincident / r;
      next = (1.0 - keep) * next + keep * center;
    }
    const double moved = (next - center).norm();
    center = next;
    if (moved <= c.weiszfeld_tolerance * (1.0 + center.norm())) break;
  }
  return center;
}

}  // namespace detail

/// Distance-proportional seeding followed by alternating assignment and
/// per-cluster Weiszfeld refinement, for Σ wᵢ √(‖bᵢ − c(i)‖² + tᵢ²).
inline LocalSearchResult kmedian_local_search(const RowMatrix& pts, const Vector& weights, const Vector& tails, Index k,
                                              Seed seed, const Constants& c = {}) {
  require(k >= 1, ErrorKind::invalid_argument, "k must be >= 1");
  require(pts.rows() >= 1, ErrorKind::invalid_argument, "local search needs at least one point");
  const Index n = pts.rows();
  Rng rng = make_rng(seed, {stream::seeding, 0});

  RowMatrix centers(k, pts.cols());
  Vector dist = Vector::Constant(n, std::numeric_limits<double>::infinity());
  Vector prob = weights;
  for (Index j = 0; j < k; ++j) {
    Index pick = 0;
    if (prob.sum() > 0.0) {
      pick = sample_indices(prob, 1, rng).front();
    }
    centers.row(j) = pts.row(pick);
    for (Index i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], detail::augmented_distance(pts, i, tails[i], centers, j));
      prob[i] = weights[i] * dist[i];
    }
  }

  std::vector<Index> assign(static_cast<std::size_t>(n), -1);
  for (int round = 0; round < c.local_search_rounds; ++round) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      const Index j = detail::nearest(pts, i, centers);
      if (assign[static_cast<std::size_t>(i)] != j) changed = true;
      assign[static_cast<std::size_t>(i)] = j;
    }
    if (!changed && round > 0) break;
    for (Index j = 0; j < k; ++j) {
      std::vector<Index> members;
      for (Index i = 0; i < n; ++i)
        if (assign[static_cast<std::size_t>(i)] == j) members.push_back(i);
      if (!members.empty()) centers.row(j) = detail::weiszfeld(pts, weights, tails, members, centers.row(j), c);
    }
  }
  for (Index i = 0; i < n; ++i) assign[static_cast<std::size_t>(i)] = detail::nearest(pts, i, centers);

  std::vector<double> terms(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    terms[static_cast<std::size_t>(i)] =
        weights[i] * detail::augmented_distance(pts, i, tails[i], centers, assign[static_cast<std::size_t>(i)]);
  return {CenterSet(centers), std::move(assign), pairwise_sum(terms)};
}

/// Constant-factor (not certified) k-median solution on unweighted points.
inline CenterSet bicriteria_kmedian(const RowMatrix& pts, Index k, Seed seed, const Constants& c = {}) {
  return kmedian_local_search(pts, Vector::Ones(pts.rows()), Vector::Zero(pts.rows()), k, seed, c).centers;
}

struct SensitivityProfile {
  CenterSet bicriteria_centers;
  std::vector<Index> assignments;
  Vector sensitivities;
  double total = 0.0;
};

/// sᵢ = dist(pᵢ, C)/cost(C) + 1/|cluster(i)|, so Σ sᵢ <= 1 + (non-empty clusters).
inline SensitivityProfile sensitivities(const RowMatrix& pts, const CenterSet& centers) {
  require(centers.dim() == pts.cols(), ErrorKind::dimension_mismatch, "centers and points differ in dimension");
  const Index n = pts.rows();
  SensitivityProfile out;
  out.bicriteria_centers = centers;
  out.assignments.resize(static_cast<std::size_t>(n));
  std::vector<Index> cluster_size(static_cast<std::size_t>(centers.size()), 0);
  Vector dist(n);
  for (Index i = 0; i < n; ++i) {
    const NearestCenter nc = dist_to_centers(pts.row(i), centers);
    out.assignments[static_cast<std::size_t>(i)] = nc.index;
    dist[i] = nc.distance;
    ++cluster_size[static_cast<std::size_t>(nc.index)];
  }
  std::vector<double> dvec(dist.data(), dist.data() + n);
  const double total_cost = pairwise_sum(dvec);
  out.sensitivities.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double share = total_cost > 0.0 ? dist[i] / total_cost : 0.0;
    out.sensitivities[i] = share + 1.0 / static_cast<double>(cluster_size[static_cast<std::size_t>(out.assignments[static_cast<std::size_t>(i)])]);
  }
  std::vector<double> svec(out.sensitivities.data(), out.sensitivities.data() + n);
  out.total = pairwise_sum(svec);
  return out;
}

/// s = ⌊c_s·k²·ln(max(k,2))/ε⁴⌋, at least 1.
inline Index kmedian_sample_count(Index k, double eps, const Constants& c = {}) {
  const double kk = static_cast<double>(k);
  return std::max<Index>(1, static_cast<Index>(std::floor(c.kmedian_size_c * kk * kk * std::log(std::max(kk, 2.0)) / std::pow(eps, 4))));
}

/// k-median coreset: sampled reduction at ε/10, approximate projections B̃
/// at ε/10, then sensitivity sampling of the reduced rows (coordinates in
/// the reduction basis plus the tail) and a map back to R^{d+1}.
inline WeightedCoreset build_kmedian_coreset(const PointMatrix& a, Index k, double eps, Seed seed,
                                             const Constants& c = {}) {
  require(k >= 1, ErrorKind::invalid_argument, "k must be >= 1");
  require(eps > 0.0 && eps <= 1.0, ErrorKind::invalid_argument, "epsilon must lie in (0, 1]");
  require(a.rows() >= 1, ErrorKind::invalid_argument, "cannot build a coreset of an empty matrix");
  const Index d = a.cols();
  const Reduction red = dim_reduce_sampled(a, k, eps / 10.0, 1.0, seed, c);
  const AugmentedMatrix b = approx_projection_rows(a, red.matrix.basis, eps / 10.0, seed, c);

  // Reduced rows z = (X, v); a query center c ∈ R^d sits at (cU-part, 0) in
  // this space extended by k directions, so Euclidean geometry is preserved.
  RowMatrix z(b.rows(), b.coeffs.cols() + 1);
  z << b.coeffs, b.tail;
  const CenterSet bicriteria = bicriteria_kmedian(z, k, derive_seed(seed, {stream::seeding, 1}), c);
  const SensitivityProfile profile = sensitivities(z, bicriteria);

  const Index s = kmedian_sample_count(k, eps, c);
  Rng rng = make_rng(seed, {stream::sampling, 1});
  std::vector<Index> draws = sample_indices(profile.sensitivities, s, rng);
  std::sort(draws.begin(), draws.end());

  WeightedCoreset out;
  std::vector<Index> rows;
  std::vector<double> weights;
  for (Index i : draws) {
    const double q = profile.sensitivities[i] / profile.total;
    const double w = 1.0 / (static_cast<double>(s) * q);
    if (!rows.empty() && rows.back() == i) {
      weights.back() += w;
    } else {
      rows.push_back(i);
      weights.push_back(w);
    }
  }
  out.points.resize(static_cast<Index>(rows.size()), d + 1);
  out.weights.resize(static_cast<Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const auto r = static_cast<Index>(j);
    out.points.row(r).head(d) = (b.basis.basis() * b.coeffs.row(rows[j]).transpose()).transpose();
    out.points(r, d) = b.tail[rows[j]];
    out.weights[r] = weights[j];
  }
  out.k = k;
  out.epsilon = eps;
  out.seed = seed;
  out.reduction = red.report;
  out.sample_count = s;
  out.source_rows = a.rows();
  out.sensitivity_total = profile.total;
  return out;
}

/// Σ wᵢ √(‖bᵢ − c*‖² + vᵢ²) with c* nearest to bᵢ among the centers.
inline double eval_kmedian_cost(const WeightedCoreset& core, const CenterSet& centers) {
  require(centers.size() >= 1, ErrorKind::invalid_argument, "center set is empty");
  const Index d = core.ambient();
  require(centers.dim() == d, ErrorKind::dimension_mismatch,
          "centers live in R^" + std::to_string(centers.dim()) + ", coreset in R^" + std::to_string(d));
  std::vector<double> terms(static_cast<std::size_t>(core.size()));
  for (Index i = 0; i < core.size(); ++i) {
    const NearestCenter nc = dist_to_centers(core.points.row(i).head(d), centers);
    const double v = core.points(i, d);
    terms[static_cast<std::size_t>(i)] = core.weights[i] * std::sqrt(nc.distance * nc.distance + v * v);
  }
  return pairwise_sum(terms);
}

/// Local search on the coreset itself (centers in R^d, tails carried).
inline LocalSearchResult kmedian_on_coreset(const WeightedCoreset& core, Seed seed, const Constants& c = {}) {
  const Index d = core.ambient();
  return kmedian_local_search(core.points.leftCols(d), core.weights, core.points.col(d), core.k, seed, c);
}

}  // namespace coreset
