#pragma once

#include <chrono>
#include <string>

#include "coreset/io.hpp"

namespace coreset::cli {

using coreset::json;
using io::RunConfig;

inline const char* const commands[] = {"reduce", "coreset-subspace", "coreset-kmedian", "eval",
                                        "verify", "counterexample",   "bench"};

namespace detail {

inline PointMatrix load_input(const RunConfig& cfg) {
  require(!cfg.input.empty(), ErrorKind::invalid_argument, cfg.command + " needs --input");
  return io::ingest(cfg.input, io::parse_format(cfg.format));
}

inline std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

inline double floor_for(const PointMatrix& a, const RunConfig& cfg) {
  return cfg.tolerances.relative_error_floor * oracle::data_scale(a);
}

inline Reduction reduce(const PointMatrix& a, const RunConfig& cfg) {
  return cfg.variant_enum() == Variant::exact ? dim_reduce_exact(a, cfg.k, cfg.epsilon, cfg.p, cfg.seed, cfg.constants)
                                              : dim_reduce_sampled(a, cfg.k, cfg.epsilon, cfg.p, cfg.seed, cfg.constants);
}

inline std::vector<Subspace> random_projections(const RunConfig& cfg, Index d) {
  oracle::QueryFamily f;
  f.count = cfg.samples;
  f.seed = derive_seed(cfg.seed, {stream::queries, 1});
  f.d = d;
  f.k = std::min(cfg.k, d);
  return oracle::subspace_queries(f);
}

inline json with_verdict(json body, bool pass) {
  body["pass"] = pass;
  return body;
}

inline json verify_subspace(const PointMatrix& a, const RunConfig& cfg) {
  const SubspaceCoreset core =
      build_subspace_coreset(a, cfg.k, cfg.epsilon, cfg.p, cfg.variant_enum(), cfg.seed, cfg.constants);
  std::vector<Subspace> queries = random_projections(cfg, a.cols());
  queries.push_back(coreset_optimal_subspace(core, derive_seed(cfg.seed, {stream::queries, 2}), cfg.constants));
  const auto report = oracle::measure_distortion<Subspace>(
      [&](const Subspace& v) { return oracle::true_subspace_cost(a, v, cfg.p); },
      [&](const Subspace& v) { return eval_subspace_cost_pth(core, v); }, queries, floor_for(a, cfg));
  json body = io::to_json(report);
  body["coreset_rows"] = core.size();
  body["size_bound"] = subspace_size_bound(cfg.k, cfg.epsilon, cfg.constants);
  body["attempts"] = core.attempts;
  return with_verdict(body, report.max_rel_err <= cfg.epsilon);
}

inline json verify_kmedian(const PointMatrix& a, const RunConfig& cfg) {
  const WeightedCoreset core = build_kmedian_coreset(a, cfg.k, cfg.epsilon, cfg.seed, cfg.constants);
  auto [lo, hi] = oracle::bounding_box(a);
  oracle::QueryFamily f;
  f.kind = oracle::QueryKind::center_set;
  f.count = cfg.samples;
  f.seed = derive_seed(cfg.seed, {stream::queries, 3});
  f.d = a.cols();
  f.k = cfg.k;
  f.box_lo = lo;
  f.box_hi = hi;
  std::vector<CenterSet> queries = oracle::center_queries(f);
  queries.push_back(kmedian_on_coreset(core, derive_seed(cfg.seed, {stream::queries, 4}), cfg.constants).centers);
  const auto report = oracle::measure_distortion<CenterSet>(
      [&](const CenterSet& c) { return oracle::true_kmedian_cost(a, c); },
      [&](const CenterSet& c) { return eval_kmedian_cost(core, c); }, queries, floor_for(a, cfg));
  json body = io::to_json(report);
  body["coreset_rows"] = core.size();
  body["size_bound"] = kmedian_sample_count(cfg.k, cfg.epsilon, cfg.constants);
  body["weight_mass"] = core.weights.sum();
  return with_verdict(body, report.max_rel_err <= cfg.epsilon);
}

inline json verify_reduction(const PointMatrix& a, const RunConfig& cfg) {
  const Reduction red = reduce(a, cfg);
  const auto report = oracle::measure_distortion<Subspace>(
      [&](const Subspace& v) { return oracle::true_subspace_cost(a, v, cfg.p); },
      [&](const Subspace& v) { return augmented_cost(red.matrix, v, cfg.p); }, random_projections(cfg, a.cols()),
      floor_for(a, cfg));
  json body = io::to_json(report);
  body["reduction"] = red.report;
  return with_verdict(body, report.max_rel_err <= cfg.epsilon);
}

inline json evaluate(const RunConfig& cfg) {
  require(!cfg.input.empty() && !cfg.queries.empty(), ErrorKind::invalid_argument, "eval needs --input and --queries");
  const io::Container c = io::load(cfg.input);
  const io::QueryFile q = io::read_queries(cfg.queries);
  json costs = json::array();
  if (c.type == "subspace") {
    require(q.kind == "subspace", ErrorKind::invalid_argument, "a subspace coreset needs subspace queries");
    const SubspaceCoreset core = io::subspace_from_container(c);
    for (const RowMatrix& m : q.queries) costs.push_back(eval_subspace_cost(core, orthonormalize(Matrix(m))));
  } else if (c.type == "kmedian") {
    require(q.kind == "centers", ErrorKind::invalid_argument, "a kmedian coreset needs center queries");
    const WeightedCoreset core = io::kmedian_from_container(c);
    for (const RowMatrix& m : q.queries) costs.push_back(eval_kmedian_cost(core, CenterSet(m)));
  } else {
    require(q.kind == "subspace", ErrorKind::invalid_argument, "an augmented matrix needs subspace queries");
    const Reduction red = io::reduction_from_container(c);
    const double p = c.header.at("p").get<double>();
    for (const RowMatrix& m : q.queries)
      costs.push_back(std::pow(augmented_cost(red.matrix, orthonormalize(Matrix(m)), p), 1.0 / p));
  }
  return json{{"container", c.type}, {"costs", costs}};
}

template <class Fn>
double time_ms(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline json bench(const RunConfig& cfg) {
  PointMatrix a;
  json rows = json::array();
  rows.push_back({{"stage", "ingest"}, {"ms", time_ms([&] { a = load_input(cfg); })}});
  rows.push_back({{"stage", "reduce_exact"},
                  {"ms", time_ms([&] { dim_reduce_exact(a, cfg.k, cfg.epsilon, cfg.p, cfg.seed, cfg.constants); })}});
  rows.push_back({{"stage", "reduce_sampled"},
                  {"ms", time_ms([&] { dim_reduce_sampled(a, cfg.k, cfg.epsilon, cfg.p, cfg.seed, cfg.constants); })}});
  SubspaceCoreset sub;
  rows.push_back({{"stage", "coreset_subspace"}, {"ms", time_ms([&] {
                    sub = build_subspace_coreset(a, cfg.k, cfg.epsilon, cfg.p, cfg.variant_enum(), cfg.seed, cfg.constants);
                  })}});
  WeightedCoreset km;
  rows.push_back({{"stage", "coreset_kmedian"},
                  {"ms", time_ms([&] { km = build_kmedian_coreset(a, cfg.k, cfg.epsilon, cfg.seed, cfg.constants); })}});
  const std::vector<Subspace> queries = random_projections(cfg, a.cols());
  rows.push_back({{"stage", "eval_subspace_queries"}, {"ms", time_ms([&] {
                    for (const auto& v : queries) eval_subspace_cost(sub, v);
                  })}});
  return json{{"rows", a.rows()}, {"cols", a.cols()}, {"threads", num_threads()}, {"queries", queries.size()},
              {"table", rows}};
}

}  // namespace detail

/// Runs one command and returns the artifact bytes: a container for
/// reduce/coreset-*, a report document otherwise. The bytes depend only on
/// the configuration and the input files, except for bench timings.
inline std::string run_command(const RunConfig& cfg) {
  cfg.validate();
  set_num_threads(cfg.threads);
  const json config = io::to_json(cfg);
  const std::string& cmd = cfg.command;

  if (cmd == "reduce") {
    const PointMatrix a = detail::load_input(cfg);
    return io::to_bytes(io::to_container(detail::reduce(a, cfg), cfg.p, cfg.k, cfg.epsilon, config), cfg.binary);
  }
  if (cmd == "coreset-subspace") {
    const PointMatrix a = detail::load_input(cfg);
    const SubspaceCoreset core =
        build_subspace_coreset(a, cfg.k, cfg.epsilon, cfg.p, cfg.variant_enum(), cfg.seed, cfg.constants);
    return io::to_bytes(io::to_container(core, config), cfg.binary);
  }
  if (cmd == "coreset-kmedian") {
    const PointMatrix a = detail::load_input(cfg);
    const WeightedCoreset core = build_kmedian_coreset(a, cfg.k, cfg.epsilon, cfg.seed, cfg.constants);
    return io::to_bytes(io::to_container(core, config), cfg.binary);
  }
  if (cmd == "eval") return detail::dump(io::report("eval", detail::evaluate(cfg), config));
  if (cmd == "verify") {
    json body;
    if (cfg.suite == "claims") {
      const oracle::ClaimReport r = oracle::verify_scalar_claims(cfg.samples, cfg.seed);
      body = detail::with_verdict(io::to_json(r), r.total_violations() == 0);
    } else if (cfg.suite == "subspace") {
      body = detail::verify_subspace(detail::load_input(cfg), cfg);
    } else if (cfg.suite == "kmedian") {
      body = detail::verify_kmedian(detail::load_input(cfg), cfg);
    } else if (cfg.suite == "reduction") {
      body = detail::verify_reduction(detail::load_input(cfg), cfg);
    } else {
      throw Error(ErrorKind::invalid_argument,
                  "unknown suite '" + cfg.suite + "' (expected claims, subspace, kmedian or reduction)");
    }
    body["suite"] = cfg.suite;
    return detail::dump(io::report("verify", body, config));
  }
  if (cmd == "counterexample") {
    const auto r = oracle::gaussian_counterexample(cfg.n, cfg.d, cfg.k, cfg.seed);
    return detail::dump(io::report("counterexample", io::to_json(r), config));
  }
  if (cmd == "bench") return detail::dump(io::report("bench", detail::bench(cfg), config));
  throw Error(ErrorKind::invalid_argument, "unknown command '" + cmd + "'");
}

/// Embedded replay configuration of an artifact (container or report).
inline RunConfig embedded_config(const std::string& bytes) {
  if (bytes.rfind(io::text_magic, 0) == 0) return io::run_config_from_json(io::from_bytes(bytes).header.at("config"));
  try {
    return io::run_config_from_json(json::parse(bytes).at("config"));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, std::string("artifact has no embedded config: ") + e.what());
  }
}

}  // namespace coreset::cli
