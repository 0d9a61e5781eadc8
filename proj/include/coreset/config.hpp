#pragma once

namespace coreset {

/// Numerical tolerances shared by every module.
struct Tolerances {
  double orthonormality = 1e-10;  // max |UᵀU - I| entry accepted for a basis
  double rank_pivot = 1e-10;      // relative to the largest column norm
  double projection = 1e-8;
  double relative_error_floor = 1e-12;  // times the data scale
};

/// Tunable constants of the randomized constructions. Defaults are the
/// shipped values; every one of them can be overridden from a constants file.
struct Constants {
  // Sketching.
  double sketch_width_c = 20.0;        // CountSketch rows = c * ell^2 / eps^2
  double leverage_sketch_c = 20.0;     // CountSketch rows = c * m^2
  double gaussian_columns_c = 16.0;    // ceil(c * ln n) JL columns
  double median_repeats_c = 8.0;       // ceil(c * ln n) repeats
  double lewis_failure_change = 0.5;   // max relative change flagged non-converged
  double lewis_damping = 0.5;          // best-effort mode for p > 2
  double lewis_sample_c = 0.5;         // count = c * f * ln(f) / eps^2

  // Dimensionality reduction.
  double tau_divisor = 8.0;        // tau = eps^max(2/p,1) / tau_divisor
  double threshold_divisor = 80.0; // drop threshold = eps^max(2/p,1) * opt / divisor
  double tau_index_c = 10.0;       // i* drawn from {1, ..., ceil(c / tau)}
  int irls_iterations = 60;
  int irls_restarts = 3;
  double irls_floor = 1e-8;
  double irls_tolerance = 1e-10;

  // Coreset sizes.
  double subspace_size_c = 1.0;   // s <= c * k * ln(k/eps) / eps^4
  double kmedian_size_c = 0.25;   // s = floor(c * k^2 * ln(max(k,2)) / eps^4)
  double sensitivity_total_c = 2.0;  // total sensitivity <= c * k + 1

  // Validate-and-retry amplification.
  int validate_queries = 50;
  int validate_retries = 3;
  bool validate = true;

  // Local search.
  int local_search_rounds = 20;
  double weiszfeld_tolerance = 1e-7;
  int weiszfeld_max_iterations = 200;
};

}  // namespace coreset
