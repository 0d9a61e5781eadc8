#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <vector>

#include "coreset/linalg.hpp"

namespace coreset::oracle {

struct BruteForceResult {
  Subspace subspace;
  double cost = 0.0;         // Σ dist^p at the returned subspace
  double lower_bound = 0.0;  // certified lower bound on the optimum
  bool certified = false;    // cost <= (1+eps)·lower_bound (or within abs_gap)
  Index evaluations = 0;
};

inline constexpr Index brute_force_max_ambient = 4;
inline constexpr Index brute_force_max_dim = 2;

namespace detail {

// Point on S^{dim-1} from hyperspherical angles. The partial derivatives are
// mutually orthogonal with norm <= 1, so ‖u(θ) − u(θ')‖ <= ‖θ − θ'‖₂.
inline Vector sphere_point(const std::vector<double>& angles, Index dim) {
  Vector u(dim);
  double s = 1.0;
  for (Index j = 0; j + 1 < dim; ++j) {
    u[j] = s * std::cos(angles[static_cast<std::size_t>(j)]);
    s *= std::sin(angles[static_cast<std::size_t>(j)]);
  }
  u[dim - 1] = s;
  return u;
}

struct Cell {
  std::vector<double> center;
  std::vector<double> half;
  double lower = 0.0;
  double value = 0.0;
  bool operator<(const Cell& o) const { return lower > o.lower; }  // min-heap
};

// dist(a, span(u)) when normal == false, |a·u| (distance to u⊥) otherwise.
struct DirectionObjective {
  const RowMatrix& points;
  Vector norms;
  Vector norm_sq;
  double p;
  bool normal;

  DirectionObjective(const RowMatrix& pts, double p_, bool normal_)
      : points(pts), norms(pts.rowwise().norm()), norm_sq(pts.rowwise().squaredNorm()), p(p_), normal(normal_) {}

  Vector distances(const Vector& u) const {
    Vector dots = points * u;
    Vector r(points.rows());
    for (Index i = 0; i < r.size(); ++i)
      r[i] = normal ? std::abs(dots[i]) : std::sqrt(std::max(norm_sq[i] - dots[i] * dots[i], 0.0));
    return r;
  }

  double cost(const Vector& r) const {
    double s = 0.0;
    for (Index i = 0; i < r.size(); ++i) s += std::pow(r[i], p);
    return s;
  }

  // Each row's distance moves by at most ‖a‖·δ when u moves by δ.
  double lower(const Vector& r, double delta) const {
    double s = 0.0;
    for (Index i = 0; i < r.size(); ++i) s += std::pow(std::max(r[i] - norms[i] * delta, 0.0), p);
    return s;
  }
};

}  // namespace detail

/// Certified minimizer of Σ dist(Aᵢ, S)^p over m-dimensional S in R^d for
/// d <= 4, m <= 2. Lines and hyperplanes are searched by branch-and-bound
/// over hyperspherical angle boxes with a per-row Lipschitz lower bound; the
/// remaining shape (d = 4, m = 2) falls back to grid + pattern search and is
/// reported uncertified.
inline BruteForceResult brute_force_subspace(const RowMatrix& a, Index m, double p, double eps,
                                             double abs_gap = 0.0, Index max_evaluations = 2'000'000) {
  const Index d = a.cols();
  coreset::detail::check_norm_exponent(p);
  require(d <= brute_force_max_ambient && m <= brute_force_max_dim, ErrorKind::invalid_argument,
          "brute force supports d <= 4 and m <= 2 (got d=" + std::to_string(d) + ", m=" + std::to_string(m) + ")");
  require(m >= 0 && m <= d, ErrorKind::invalid_argument, "subspace dimension out of range");
  require(eps > 0.0, ErrorKind::invalid_argument, "brute force accuracy must be positive");

  BruteForceResult result;
  if (m == d || a.rows() == 0 || a.squaredNorm() == 0.0) {
    result.subspace = m == d ? Subspace::full(d) : orthonormalize(Matrix::Identity(d, m));
    result.cost = m == d ? 0.0 : std::pow(norm_p2(a, p), p);
    result.lower_bound = result.cost;
    result.certified = true;
    return result;
  }
  if (m == 0) {
    result.subspace = Subspace::zero(d);
    result.cost = std::pow(norm_p2(a, p), p);
    result.lower_bound = result.cost;
    result.certified = true;
    return result;
  }

  const bool line = m == 1;
  const bool hyperplane = m == d - 1;
  if (line || hyperplane) {
    detail::DirectionObjective obj(a, p, /*normal=*/!line);
    const Index angles = d - 1;
    std::priority_queue<detail::Cell> queue;
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> best_angles(static_cast<std::size_t>(angles), 0.0);

    auto evaluate = [&](detail::Cell& cell) {
      double delta = 0.0;
      for (double h : cell.half) delta += h * h;
      delta = std::sqrt(delta);
      Vector r = obj.distances(detail::sphere_point(cell.center, d));
      cell.value = obj.cost(r);
      cell.lower = obj.lower(r, delta);
      ++result.evaluations;
      if (cell.value < best) {
        best = cell.value;
        best_angles = cell.center;
      }
    };

    // Last angle ranges over [0, π) since ±u describe the same line/hyperplane.
    const int initial = 12;
    std::vector<int> counter(static_cast<std::size_t>(angles), 0);
    for (;;) {
      detail::Cell cell;
      for (Index j = 0; j < angles; ++j) {
        const double width = std::numbers::pi / initial;
        cell.center.push_back((counter[static_cast<std::size_t>(j)] + 0.5) * width);
        cell.half.push_back(0.5 * width);
      }
      evaluate(cell);
      queue.push(cell);
      Index j = 0;
      while (j < angles && ++counter[static_cast<std::size_t>(j)] == initial) counter[static_cast<std::size_t>(j++)] = 0;
      if (j == angles) break;
    }

    double global_lower = 0.0;
    while (!queue.empty()) {
      detail::Cell cell = queue.top();
      global_lower = cell.lower;
      if (best - global_lower <= std::max(eps * global_lower, abs_gap)) break;
      if (result.evaluations >= max_evaluations) break;
      queue.pop();
      const auto widest = static_cast<std::size_t>(
          std::max_element(cell.half.begin(), cell.half.end()) - cell.half.begin());
      for (int side = -1; side <= 1; side += 2) {
        detail::Cell child = cell;
        child.half[widest] *= 0.5;
        child.center[widest] += side * child.half[widest];
        evaluate(child);
        if (child.lower < best) queue.push(child);
      }
    }
    if (queue.empty()) global_lower = best;
    result.lower_bound = std::min(global_lower, best);
    result.certified = best - result.lower_bound <= std::max(eps * result.lower_bound, abs_gap);

    // Local polish of the incumbent; only lowers the reported cost.
    double step = 1e-3;
    while (step > 1e-12) {
      bool improved = false;
      for (Index j = 0; j < angles; ++j) {
        for (int side = -1; side <= 1; side += 2) {
          auto trial = best_angles;
          trial[static_cast<std::size_t>(j)] += side * step;
          const double v = obj.cost(obj.distances(detail::sphere_point(trial, d)));
          ++result.evaluations;
          if (v < best) {
            best = v;
            best_angles = trial;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }

    Vector u = detail::sphere_point(best_angles, d);
    if (line) {
      result.subspace = orthonormalize(u);
    } else {
      Subspace normal = orthonormalize(u);
      result.subspace = orthonormalize(orthogonal_complement(normal));
    }
    result.cost = best;
    return result;
  }

  // d = 4, m = 2: frame (u₁, u₂) with u₂ drawn from a sphere in u₁⊥.
  auto frame_cost = [&](const std::vector<double>& th) {
    Vector u1 = detail::sphere_point({th[0], th[1], th[2]}, 4);
    Subspace first = orthonormalize(u1);
    Matrix comp = orthogonal_complement(first);
    Vector u2 = comp * detail::sphere_point({th[3], th[4]}, 3);
    Matrix frame(4, 2);
    frame << u1, u2;
    Subspace s = orthonormalize(frame);
    double c = 0.0;
    for (Index i = 0; i < a.rows(); ++i) c += std::pow(s.distance(a.row(i).transpose()), p);
    ++result.evaluations;
    return std::make_pair(c, s);
  };
  const int grid = 8;
  std::vector<double> best_th(5, 0.0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> counter(5, 0);
  for (;;) {
    std::vector<double> th(5);
    for (int j = 0; j < 5; ++j) th[static_cast<std::size_t>(j)] = (counter[static_cast<std::size_t>(j)] + 0.5) * std::numbers::pi / grid;
    const double v = frame_cost(th).first;
    if (v < best) {
      best = v;
      best_th = th;
    }
    int j = 0;
    while (j < 5 && ++counter[static_cast<std::size_t>(j)] == grid) counter[static_cast<std::size_t>(j++)] = 0;
    if (j == 5) break;
  }
  double step = 0.5 * std::numbers::pi / grid;
  while (step > 1e-10) {
    bool improved = false;
    for (std::size_t j = 0; j < 5; ++j)
      for (int side = -1; side <= 1; side += 2) {
        auto trial = best_th;
        trial[j] += side * step;
        const double v = frame_cost(trial).first;
        if (v < best) {
          best = v;
          best_th = trial;
          improved = true;
        }
      }
    if (!improved) step *= 0.5;
  }
  result.subspace = frame_cost(best_th).second;
  result.cost = best;
  result.lower_bound = 0.0;
  result.certified = false;
  return result;
}

}  // namespace coreset::oracle
