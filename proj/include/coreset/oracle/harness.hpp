#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "coreset/dimreduce.hpp"
#include "coreset/linalg.hpp"
#include "coreset/oracle/brute_force.hpp"

// Oracles here evaluate costs with plain loops over std::vector rows and never
// call the library's cost paths they are used to check.
namespace coreset::oracle {

namespace detail {

using Column = std::vector<double>;

inline double dot(const Column& x, const Column& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline Column row_of(const PointMatrix& a, Index i) {
  Column out(static_cast<std::size_t>(a.cols()), 0.0);
  a.for_each_in_row(i, [&](Index j, double v) { out[static_cast<std::size_t>(j)] = v; });
  return out;
}

/// Modified Gram–Schmidt twice over the columns of v; dependent columns dropped.
inline std::vector<Column> span_basis(const Matrix& v) {
  std::vector<Column> basis;
  double max_norm = 0.0;
  for (Index j = 0; j < v.cols(); ++j) {
    double s = 0.0;
    for (Index i = 0; i < v.rows(); ++i) s += v(i, j) * v(i, j);
    max_norm = std::max(max_norm, std::sqrt(s));
  }
  for (Index j = 0; j < v.cols(); ++j) {
    Column w(static_cast<std::size_t>(v.rows()));
    for (Index i = 0; i < v.rows(); ++i) w[static_cast<std::size_t>(i)] = v(i, j);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) {
        const double c = dot(w, q);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * q[i];
      }
    const double norm = std::sqrt(dot(w, w));
    if (norm > 1e-10 * max_norm && norm > 0.0) {
      for (double& x : w) x /= norm;
      basis.push_back(std::move(w));
    }
  }
  return basis;
}

inline double residual_norm(Column x, const std::vector<Column>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis) {
      const double c = dot(x, q);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c * q[i];
    }
  return std::sqrt(dot(x, x));
}

}  // namespace detail

/// Σᵢ dist(Aᵢ, span(V))^p with V's columns taken as a spanning set.
inline double true_subspace_cost(const PointMatrix& a, const Matrix& v, double p) {
  require(v.rows() == a.cols(), ErrorKind::dimension_mismatch, "query spans a different ambient space");
  require(p >= 1.0, ErrorKind::invalid_argument, "p must be >= 1");
  const auto basis = detail::span_basis(v);
  double total = 0.0;
  for (Index i = 0; i < a.rows(); ++i) total += std::pow(detail::residual_norm(detail::row_of(a, i), basis), p);
  return total;
}

inline double true_subspace_cost(const PointMatrix& a, const Subspace& v, double p) {
  return true_subspace_cost(a, v.basis(), p);
}

/// Σᵢ min_c ‖Aᵢ − c‖₂ by exhaustive scan.
inline double true_kmedian_cost(const PointMatrix& a, const CenterSet& centers) {
  require(centers.size() >= 1, ErrorKind::invalid_argument, "center set is empty");
  require(centers.dim() == a.cols(), ErrorKind::dimension_mismatch, "centers live in a different space");
  double total = 0.0;
  for (Index i = 0; i < a.rows(); ++i) {
    const auto x = detail::row_of(a, i);
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < centers.size(); ++j) {
      double s = 0.0;
      for (Index t = 0; t < a.cols(); ++t) {
        const double diff = x[static_cast<std::size_t>(t)] - centers.centers()(j, t);
        s += diff * diff;
      }
      best = std::min(best, s);
    }
    total += std::sqrt(best);
  }
  return total;
}

enum class QueryKind { rank_k_projection, center_set };

struct QueryFamily {
  QueryKind kind = QueryKind::rank_k_projection;
  Index count = 0;
  Seed seed = 0;
  Index d = 0;
  Index k = 1;
  Vector box_lo;  // center sets: per-coordinate bounding box
  Vector box_hi;
};

inline std::vector<Subspace> subspace_queries(const QueryFamily& f) {
  require(f.kind == QueryKind::rank_k_projection, ErrorKind::invalid_argument, "not a projection family");
  Rng rng = make_rng(f.seed, {stream::queries, 0});
  std::vector<Subspace> out;
  for (Index q = 0; q < f.count; ++q) out.push_back(random_subspace(f.d, std::min(f.k, f.d), rng));
  return out;
}

inline std::vector<CenterSet> center_queries(const QueryFamily& f) {
  require(f.kind == QueryKind::center_set, ErrorKind::invalid_argument, "not a center-set family");
  require(f.box_lo.size() == f.d && f.box_hi.size() == f.d, ErrorKind::dimension_mismatch, "bounding box mismatch");
  Rng rng = make_rng(f.seed, {stream::queries, 1});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<CenterSet> out;
  for (Index q = 0; q < f.count; ++q) {
    RowMatrix c(f.k, f.d);
    for (Index j = 0; j < f.k; ++j)
      for (Index t = 0; t < f.d; ++t) c(j, t) = f.box_lo[t] + u(rng) * (f.box_hi[t] - f.box_lo[t]);
    out.emplace_back(std::move(c));
  }
  return out;
}

/// Per-coordinate bounding box of the rows.
inline std::pair<Vector, Vector> bounding_box(const PointMatrix& a) {
  const RowMatrix dense = a.to_dense();
  return {dense.colwise().minCoeff().transpose(), dense.colwise().maxCoeff().transpose()};
}

struct DistortionReport {
  Index queries = 0;
  double max_rel_err = 0.0;
  double mean_rel_err = 0.0;
  double p95_rel_err = 0.0;
  Index worst_query = -1;
  std::vector<double> per_query;
  bool empty = true;
};

/// Relative error |truth − approx| / max(truth, floor) per query.
template <class Query>
DistortionReport measure_distortion(const std::function<double(const Query&)>& truth,
                                    const std::function<double(const Query&)>& approx,
                                    const std::vector<Query>& queries, double floor) {
  DistortionReport r;
  r.queries = static_cast<Index>(queries.size());
  r.empty = queries.empty();
  if (r.empty) return r;
  r.per_query.resize(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const double t = truth(queries[q]);
    const double a = approx(queries[q]);
    r.per_query[q] = std::abs(t - a) / std::max(t, floor);
  }
  std::vector<double> sorted = r.per_query;
  std::sort(sorted.begin(), sorted.end());
  r.max_rel_err = sorted.back();
  r.mean_rel_err = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  const std::size_t idx = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(sorted.size()))) - 1;
  r.p95_rel_err = sorted[std::min(idx, sorted.size() - 1)];
  r.worst_query = static_cast<Index>(std::max_element(r.per_query.begin(), r.per_query.end()) - r.per_query.begin());
  return r;
}

/// Scale for the relative-error floor: n times the largest row norm.
inline double data_scale(const PointMatrix& a) {
  double s = 0.0;
  for (Index i = 0; i < a.rows(); ++i) s = std::max(s, std::sqrt(a.row_squared_norm(i)));
  return std::max(s * static_cast<double>(std::max<Index>(a.rows(), 1)), 1e-300);
}

struct CounterexampleResult {
  double naive_estimate = 0.0;
  double true_cost = 0.0;
  double augmented_estimate = 0.0;
};

/// n Gaussian points with N(0, 1/d) coordinates, projected onto their best
/// rank-ell ℓ₂ subspace; compares the cost of a unit-norm query point under
/// a single additive projection constant versus a per-point appended coordinate.
inline CounterexampleResult gaussian_counterexample(Index n, Index d, Index ell, Seed seed) {
  require(n >= 1000, ErrorKind::invalid_argument, "counterexample needs n >= 1000");
  require(ell >= 1 && (ell == d || d >= 20 * ell), ErrorKind::invalid_argument,
          "counterexample needs d >= 20*ell (or ell = d)");
  Rng rng = make_rng(seed, {stream::gaussian, 1});
  std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
  RowMatrix pts(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) pts(i, j) = gauss(rng);
  Vector q(d);
  std::normal_distribution<double> unit;
  for (Index j = 0; j < d; ++j) q[j] = unit(rng);
  q.normalize();

  const Matrix u = ell == d ? Matrix::Identity(d, d) : top_eigenvectors(pts.transpose() * pts, ell);
  CounterexampleResult r;
  for (Index i = 0; i < n; ++i) {
    const Vector x = pts.row(i).transpose();
    const Vector proj = u * (u.transpose() * x);
    const double residual = (x - proj).norm();
    const double to_q = (proj - q).norm();
    r.naive_estimate += to_q + residual;
    r.true_cost += (x - q).norm();
    r.augmented_estimate += std::sqrt(to_q * to_q + residual * residual);
  }
  return r;
}

struct ClaimResult {
  std::string name;
  Index samples = 0;
  Index violations = 0;
  double worst_excess = 0.0;  // max (lhs − rhs)/scale over samples
  double acceptance_rate = 1.0;
};

struct ClaimReport {
  std::vector<ClaimResult> claims;
  Index total_violations() const {
    Index v = 0;
    for (const auto& c : claims) v += c.violations;
    return v;
  }
};

/// Randomized check of the scalar inequalities used by the distortion
/// analysis. A sample violates when lhs − rhs exceeds slack·scale, where
/// scale is the magnitude of the terms being compared.
inline ClaimReport verify_scalar_claims(Index samples, Seed seed, double slack = 1e-9) {
  require(samples >= 1, ErrorKind::invalid_argument, "samples must be >= 1");
  ClaimReport report;
  auto run = [&](const std::string& name, std::uint64_t tag, auto&& draw) {
    ClaimResult r;
    r.name = name;
    Rng rng = make_rng(seed, {tag});
    Index attempts = 0;
    while (r.samples < samples) {
      ++attempts;
      double lhs = 0.0, rhs = 0.0, scale = 0.0;
      if (!draw(rng, lhs, rhs, scale)) continue;
      ++r.samples;
      const double excess = (lhs - rhs) / std::max(scale, std::numeric_limits<double>::min());
      r.worst_excess = std::max(r.worst_excess, excess);
      if (lhs - rhs > slack * scale) ++r.violations;
    }
    r.acceptance_rate = static_cast<double>(r.samples) / static_cast<double>(attempts);
    report.claims.push_back(r);
  };
  auto unit = [](Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto magnitude = [&](Rng& rng) { return std::pow(10.0, 6.0 * unit(rng) - 3.0); };
  // Pairs b >= c >= 0 with occasional exact edge cases (c = 0, c = b).
  auto pair_bc = [&](Rng& rng, double& b, double& c) {
    b = magnitude(rng) * unit(rng);
    const double u = unit(rng);
    c = u < 0.05 ? 0.0 : (u < 0.1 ? b : b * unit(rng));
  };

  run("claim_one", 101, [&](Rng& rng, double& lhs, double& rhs, double& scale) {
    double b, c;
    pair_bc(rng, b, c);
    const double a = std::sqrt(std::max(b * b - c * c, 0.0));
    const double p = 2.0 + 8.0 * unit(rng);
    lhs = std::pow(a, p);
    rhs = std::pow(b, p) - std::pow(c, p);
    scale = std::pow(b, p) + std::pow(c, p);
    return true;
  });

  run("claim_two", 102, [&](Rng& rng, double& lhs, double& rhs, double& scale) {
    double b, c;
    pair_bc(rng, b, c);
    const double a = std::sqrt(std::max(b * b - c * c, 0.0));
    const double p = 1.0 + unit(rng);
    const double eps = unit(rng) < 0.5 ? 1.0 - unit(rng) : std::pow(10.0, -6.0 * unit(rng));
    if (!(std::pow(a, p) >= eps * std::pow(b, p)) || !(std::pow(b, p) >= std::pow(c, p))) return false;
    const double factor = 10.0 * std::pow(eps, (p - 2.0) / p);
    lhs = std::pow(a, p);
    rhs = factor * (std::pow(b, p) - std::pow(c, p));
    scale = std::max(lhs, factor * (std::pow(b, p) + std::pow(c, p)));
    return true;
  });

  run("claim_four", 104, [&](Rng& rng, double& lhs, double& rhs, double& scale) {
    const double a = magnitude(rng) * unit(rng);
    const double b = unit(rng) < 0.05 ? a : magnitude(rng) * unit(rng);
    const double x = magnitude(rng) * unit(rng);
    const double p = 1.0 - unit(rng);  // (0, 1]
    lhs = std::abs(std::pow(a + x, p) - std::pow(b + x, p));
    rhs = std::abs(std::pow(a, p) - std::pow(b, p));
    scale = std::pow(a + x, p) + std::pow(b + x, p) + std::pow(a, p) + std::pow(b, p);
    return true;
  });

  run("claim_five", 105, [&](Rng& rng, double& lhs, double& rhs, double& scale) {
    const double a = magnitude(rng) * unit(rng);
    const double b = unit(rng) < 0.05 ? 0.0 : magnitude(rng) * unit(rng);
    const double eps = 1.0 - unit(rng);
    const double p = 1.0 + 7.0 * unit(rng);
    lhs = std::pow(a + b, p);
    rhs = (1.0 + eps) * std::pow(a, p) + std::pow(1.0 + 2.0 * p / eps, p) * std::pow(b, p);
    scale = std::max(lhs, rhs);
    return true;
  });

  run("lemma_numbers", 106, [&](Rng& rng, double& lhs, double& rhs, double& scale) {
    const double a = magnitude(rng) * unit(rng);
    const double b = magnitude(rng) * unit(rng);
    const bool same = unit(rng) < 0.05;
    const double f = same ? a : magnitude(rng) * unit(rng);
    const double g = same ? b : magnitude(rng) * unit(rng);
    lhs = std::abs(std::hypot(a, b) - std::hypot(f, g));
    rhs = std::abs(a - f) + std::abs(b - g);
    scale = std::hypot(a, b) + std::hypot(f, g);
    return true;
  });
  return report;
}

/// Planted rank-k structure plus isotropic Gaussian noise.
inline PointMatrix planted_subspace_data(Index n, Index d, Index k, double noise, Seed seed) {
  Rng rng = make_rng(seed, {stream::queries, 7});
  std::normal_distribution<double> g;
  const Subspace s = random_subspace(d, std::min(k, d), rng);
  RowMatrix a(n, d);
  for (Index i = 0; i < n; ++i) {
    Vector coef(s.dim());
    for (Index j = 0; j < s.dim(); ++j) coef[j] = g(rng) * (1.0 + 2.0 * static_cast<double>(s.dim() - j));
    Vector x = s.basis() * coef;
    for (Index j = 0; j < d; ++j) x[j] += noise * g(rng);
    a.row(i) = x.transpose();
  }
  return PointMatrix::dense(std::move(a));
}

/// k Gaussian clusters with separated means and unequal sizes, plus a few outliers.
inline PointMatrix planted_cluster_data(Index n, Index d, Index k, Seed seed) {
  Rng rng = make_rng(seed, {stream::queries, 8});
  std::normal_distribution<double> g;
  RowMatrix means(k, d);
  for (Index j = 0; j < k; ++j)
    for (Index t = 0; t < d; ++t) means(j, t) = 4.0 * g(rng);
  RowMatrix a(n, d);
  for (Index i = 0; i < n; ++i) {
    const Index j = (i * (i % 3 + 1)) % k;
    const double spread = i % 50 == 0 ? 6.0 : 1.0;
    for (Index t = 0; t < d; ++t) a(i, t) = means(j, t) + spread * g(rng);
  }
  return PointMatrix::dense(std::move(a));
}

}  // namespace coreset::oracle
