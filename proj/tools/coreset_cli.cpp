#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "coreset/cli.hpp"

namespace {

using coreset::Error;
using coreset::ErrorKind;
using coreset::cli::RunConfig;

int fail(const Error& e) {
  std::cerr << coreset::io::error_document(e).dump(2) << '\n';
  return 1;
}

void emit(const std::string& bytes, const std::string& output) {
  if (output.empty()) {
    std::cout << bytes;
    return;
  }
  std::ofstream out(output, std::ios::binary);
  coreset::require(static_cast<bool>(out), ErrorKind::invalid_argument, "cannot open output '" + output + "'");
  out << bytes;
  coreset::require(static_cast<bool>(out), ErrorKind::invalid_argument, "failed writing '" + output + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  coreset::require(static_cast<bool>(in), ErrorKind::invalid_argument, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void add_run_options(CLI::App& sub, RunConfig& cfg) {
  auto opt = [&](const std::string& flag, auto& field, const std::string& help) {
    std::string env = "CORESET_" + flag;
    for (char& ch : env) ch = ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return sub.add_option("--" + flag, field, help)->envname(env)->capture_default_str();
  };
  opt("k", cfg.k, "number of centers or subspace dimension");
  opt("epsilon", cfg.epsilon, "accuracy in (0, 1]");
  opt("p", cfg.p, "norm exponent p >= 1");
  opt("variant", cfg.variant, "exact or fast")->check(CLI::IsMember({"exact", "fast"}));
  opt("seed", cfg.seed, "master seed");
  opt("input", cfg.input, "dataset, or a container for eval");
  opt("format", cfg.format, "dense_csv or sparse_triplets");
  opt("output", cfg.output, "artifact path (stdout when empty)");
  opt("queries", cfg.queries, "query file for eval");
  opt("suite", cfg.suite, "claims, subspace, kmedian or reduction");
  opt("samples", cfg.samples, "claim tuples or random queries");
  opt("n", cfg.n, "rows of the counterexample instance");
  opt("d", cfg.d, "columns of the counterexample instance");
  opt("threads", cfg.threads, "worker threads (0 = all cores)");
  opt("constants", cfg.constants_path, "JSON file of constant and tolerance overrides");
  sub.add_flag("--binary", cfg.binary, "write IEEE-754 binary containers")->envname("CORESET_BINARY");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strong coresets for k-median and subspace approximation"};
  app.require_subcommand(1);
  RunConfig cfg;
  for (const char* name : coreset::cli::commands) add_run_options(*app.add_subcommand(name, name), cfg);

  std::string replay_path;
  std::string replay_output;
  int replay_threads = 0;
  CLI::App* replay = app.add_subcommand("replay", "rerun the configuration embedded in an artifact");
  replay->add_option("artifact", replay_path, "container or report to replay")->required();
  replay->add_option("--output", replay_output, "artifact path (stdout when empty)");
  replay->add_option("--threads", replay_threads, "worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << coreset::json{{"schema", "coreset-error"},
                                   {"version", coreset::io::report_schema_version},
                                   {"kind", "usage"},
                                   {"message", e.what()}}
                     .dump(2)
              << '\n';
    return 2;
  }

  try {
    if (replay->parsed()) {
      RunConfig again = coreset::cli::embedded_config(read_file(replay_path));
      again.threads = replay_threads;
      emit(coreset::cli::run_command(again), replay_output);
      return 0;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (!cfg.constants_path.empty()) coreset::io::load_constants(cfg.constants_path, cfg.constants, cfg.tolerances);
    emit(coreset::cli::run_command(cfg), cfg.output);
    return 0;
  } catch (const Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    return fail(Error(ErrorKind::invalid_argument, e.what()));
  }
}
