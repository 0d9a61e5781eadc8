#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "coreset/config.hpp"
#include "coreset/dimreduce.hpp"
#include "coreset/kmedian_coreset.hpp"
#include "coreset/oracle/harness.hpp"
#include "coreset/subspace_coreset.hpp"

namespace coreset {

using json = nlohmann::json;

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Tolerances, orthonormality, rank_pivot, projection,
                                                relative_error_floor)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Constants, sketch_width_c, leverage_sketch_c, gaussian_columns_c,
                                                median_repeats_c, lewis_failure_change, lewis_damping,
                                                lewis_sample_c, tau_divisor, threshold_divisor, tau_index_c,
                                                irls_iterations, irls_restarts, irls_floor, irls_tolerance,
                                                subspace_size_c, kmedian_size_c, sensitivity_total_c,
                                                validate_queries, validate_retries, validate, local_search_rounds,
                                                weiszfeld_tolerance, weiszfeld_max_iterations)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ReductionReport, iterations, cost_trace, opt_estimate, threshold, i_star,
                                   dimension, hit_cap, seed)

}  // namespace coreset

namespace coreset::io {

inline constexpr std::string_view text_magic = "CORESET";
inline constexpr std::string_view binary_magic = "CORESETB";
inline constexpr std::uint32_t container_version = 1;
inline constexpr std::uint32_t report_schema_version = 1;

// ---------------------------------------------------------------------------
// Decimal formatting and parsing (locale independent).

/// Shortest form that still carries 17 significant digits of precision.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

inline double parse_double(std::string_view field, std::size_t line) {
  const std::string t = trim(field);
  double x = 0.0;
  const char* first = t.data();
  if (!t.empty() && t.front() == '+') ++first;
  const auto res = std::from_chars(first, t.data() + t.size(), x);
  require(!t.empty() && res.ec == std::errc() && res.ptr == t.data() + t.size(), ErrorKind::parse,
          at_line(line) + "malformed number '" + t + "'");
  require(std::isfinite(x), ErrorKind::non_finite, at_line(line) + "non-finite value '" + t + "'");
  return x;
}

inline long long parse_integer(std::string_view field, std::size_t line) {
  const std::string t = trim(field);
  long long x = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
  require(!t.empty() && res.ec == std::errc() && res.ptr == t.data() + t.size(), ErrorKind::parse,
          at_line(line) + "malformed integer '" + t + "'");
  return x;
}

inline std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset ingestion.

enum class InputFormat { dense_csv, sparse_triplets };

inline InputFormat parse_format(std::string_view s) {
  if (s == "dense_csv" || s == "csv") return InputFormat::dense_csv;
  if (s == "sparse_triplets" || s == "triplets") return InputFormat::sparse_triplets;
  throw Error(ErrorKind::invalid_argument, "unknown input format '" + std::string(s) + "'");
}

/// One point per line, comma separated; blank lines are skipped.
inline PointMatrix read_dense_csv(std::istream& in) {
  std::vector<double> values;
  Index d = -1;
  Index n = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    Index count = 0;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      const std::string_view field = std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      values.push_back(parse_double(field, lineno));
      ++count;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (d < 0) d = count;
    require(count == d, ErrorKind::dimension_mismatch,
            at_line(lineno) + "expected " + std::to_string(d) + " fields, found " + std::to_string(count));
    ++n;
  }
  require(n >= 1, ErrorKind::parse, "csv input contains no points");
  RowMatrix m(n, d);
  std::copy(values.begin(), values.end(), m.data());
  return PointMatrix::dense(std::move(m));
}

/// Header "n d nnz" then nnz lines "row col value", 0-indexed.
inline PointMatrix read_sparse_triplets(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!trim(line).empty()) return true;
    }
    return false;
  };
  require(next_line(), ErrorKind::parse, "triplet input is empty");
  const auto header = split_whitespace(line);
  require(header.size() == 3, ErrorKind::parse, at_line(lineno) + "header must be 'n d nnz'");
  const long long n = parse_integer(header[0], lineno);
  const long long d = parse_integer(header[1], lineno);
  const long long nnz = parse_integer(header[2], lineno);
  require(n >= 0 && d >= 0 && nnz >= 0, ErrorKind::parse, at_line(lineno) + "negative header field");
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz));
  for (long long t = 0; t < nnz; ++t) {
    require(next_line(), ErrorKind::parse,
            "truncated triplet input: expected " + std::to_string(nnz) + " entries, found " + std::to_string(t));
    const auto f = split_whitespace(line);
    require(f.size() == 3, ErrorKind::parse, at_line(lineno) + "expected 'row col value'");
    const long long r = parse_integer(f[0], lineno);
    const long long c = parse_integer(f[1], lineno);
    const double v = parse_double(f[2], lineno);
    require(r >= 0 && r < n && c >= 0 && c < d, ErrorKind::dimension_mismatch,
            at_line(lineno) + "entry (" + std::to_string(r) + "," + std::to_string(c) + ") outside " +
                std::to_string(n) + "x" + std::to_string(d));
    triplets.emplace_back(static_cast<Index>(r), static_cast<Index>(c), v);
  }
  require(!next_line(), ErrorKind::parse, at_line(lineno) + "more entries than the header's nnz");
  return PointMatrix::from_triplets(static_cast<Index>(n), static_cast<Index>(d), triplets);
}

inline PointMatrix ingest(const std::string& path, InputFormat format) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::invalid_argument, "cannot open input '" + path + "'");
  return format == InputFormat::dense_csv ? read_dense_csv(in) : read_sparse_triplets(in);
}

inline void write_dense_csv(std::ostream& out, const PointMatrix& a) {
  const RowMatrix m = a.to_dense();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

inline void write_sparse_triplets(std::ostream& out, const PointMatrix& a) {
  std::vector<std::string> lines;
  for (Index i = 0; i < a.rows(); ++i)
    a.for_each_in_row(i, [&](Index j, double v) {
      if (v != 0.0) lines.push_back(std::to_string(i) + " " + std::to_string(j) + " " + format_double(v));
    });
  out << a.rows() << ' ' << a.cols() << ' ' << lines.size() << '\n';
  for (const auto& l : lines) out << l << '\n';
}

// ---------------------------------------------------------------------------
// Run configuration.

struct RunConfig {
  std::string command;
  Index k = 1;
  double epsilon = 0.5;
  double p = 1.0;
  std::string variant = "exact";
  Seed seed = 0;
  std::string input;
  std::string format = "dense_csv";
  std::string output;
  std::string queries;
  std::string suite;
  Index samples = 100000;
  Index n = 2000;  // counterexample shape
  Index d = 500;
  int threads = 0;  // 0 = all cores
  bool binary = false;
  std::string constants_path;
  Constants constants;
  Tolerances tolerances;

  void validate() const {
    require(k >= 1, ErrorKind::invalid_argument, "k must be >= 1");
    require(epsilon > 0.0 && epsilon <= 1.0, ErrorKind::invalid_argument, "epsilon must lie in (0, 1]");
    require(p >= 1.0 && std::isfinite(p), ErrorKind::invalid_argument, "p must be a finite value >= 1");
    require(variant == "exact" || variant == "fast", ErrorKind::invalid_argument, "variant must be exact or fast");
    require(threads >= 0, ErrorKind::invalid_argument, "threads must be >= 0");
    require(samples >= 1, ErrorKind::invalid_argument, "samples must be >= 1");
    require(n >= 1 && d >= 1, ErrorKind::invalid_argument, "n and d must be >= 1");
  }

  Variant variant_enum() const { return variant == "fast" ? Variant::fast : Variant::exact; }
};

/// Replay document for an artifact. The thread count and output path are
/// left out so the same computation produces the same bytes regardless of
/// where it is written or how many cores ran it.
inline json to_json(const RunConfig& c) {
  return json{{"command", c.command},     {"k", c.k},           {"epsilon", c.epsilon},
              {"p", c.p},                 {"variant", c.variant}, {"seed", c.seed},
              {"input", c.input},         {"format", c.format}, {"queries", c.queries},
              {"suite", c.suite},         {"samples", c.samples}, {"n", c.n},
              {"d", c.d},                 {"binary", c.binary}, {"constants", c.constants},
              {"tolerances", c.tolerances}};
}

/// Inverse of to_json; absent keys keep their defaults.
inline RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  try {
    c.command = j.value("command", c.command);
    c.k = j.value("k", c.k);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.p = j.value("p", c.p);
    c.variant = j.value("variant", c.variant);
    c.seed = j.value("seed", c.seed);
    c.input = j.value("input", c.input);
    c.format = j.value("format", c.format);
    c.queries = j.value("queries", c.queries);
    c.suite = j.value("suite", c.suite);
    c.samples = j.value("samples", c.samples);
    c.n = j.value("n", c.n);
    c.d = j.value("d", c.d);
    c.binary = j.value("binary", c.binary);
    if (j.contains("constants")) c.constants = j.at("constants").get<Constants>();
    if (j.contains("tolerances")) c.tolerances = j.at("tolerances").get<Tolerances>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("embedded config: ") + e.what());
  }
  return c;
}

/// Applies a constants document: top-level keys override Constants fields,
/// an optional "tolerances" object overrides Tolerances. Unknown keys are errors.
inline void apply_overrides(const json& doc, Constants& constants, Tolerances& tolerances) {
  require(doc.is_object(), ErrorKind::parse, "constants document must be a JSON object");
  const json known_c = Constants{};
  const json known_t = Tolerances{};
  json c = known_c;
  c.update(json(constants));
  json t = json(tolerances);
  for (const auto& [key, value] : doc.items()) {
    if (key == "tolerances") {
      require(value.is_object(), ErrorKind::parse, "tolerances must be a JSON object");
      for (const auto& [tk, tv] : value.items()) {
        require(known_t.contains(tk), ErrorKind::parse, "unknown tolerance '" + tk + "'");
        require(tv.is_number(), ErrorKind::parse, "tolerance '" + tk + "' must be a number");
        t[tk] = tv;
      }
      continue;
    }
    require(known_c.contains(key), ErrorKind::parse, "unknown constant '" + key + "'");
    require(value.type() == known_c[key].type() || (value.is_number() && known_c[key].is_number()),
            ErrorKind::parse, "constant '" + key + "' has the wrong type");
    c[key] = value;
  }
  constants = c.get<Constants>();
  tolerances = t.get<Tolerances>();
}

inline void load_constants(const std::string& path, Constants& constants, Tolerances& tolerances) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::invalid_argument, "cannot open constants file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, "constants file '" + path + "': " + e.what());
  }
  apply_overrides(doc, constants, tolerances);
}

// ---------------------------------------------------------------------------
// Containers.

struct Block {
  std::string name;
  RowMatrix values;
};

struct Container {
  std::string type;  // subspace | kmedian | augmented
  json header;
  std::vector<Block> blocks;

  const RowMatrix& block(const std::string& name) const {
    for (const auto& b : blocks)
      if (b.name == name) return b.values;
    throw Error(ErrorKind::format, "container has no block '" + name + "'");
  }
};

inline void check_type_tag(const std::string& type) {
  require(type == "subspace" || type == "kmedian" || type == "augmented", ErrorKind::format,
          "unknown container type '" + type + "'");
}

inline void write_text(std::ostream& out, const Container& c) {
  check_type_tag(c.type);
  out << text_magic << ' ' << container_version << '\n';
  out << "type " << c.type << '\n';
  out << "header " << c.header.dump() << '\n';
  for (const auto& b : c.blocks) {
    out << "block " << b.name << ' ' << b.values.rows() << ' ' << b.values.cols() << '\n';
    for (Index i = 0; i < b.values.rows(); ++i) {
      for (Index j = 0; j < b.values.cols(); ++j) out << (j ? " " : "") << format_double(b.values(i, j));
      out << '\n';
    }
  }
  out << "end\n";
}

inline Container read_text(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](const char* what) {
    require(static_cast<bool>(std::getline(in, line)), ErrorKind::format,
            std::string("truncated container: missing ") + what);
    ++lineno;
  };
  next("magic");
  const auto magic = split_whitespace(line);
  require(magic.size() == 2 && magic[0] == text_magic, ErrorKind::format, "not a coreset container");
  const long long version = parse_integer(magic[1], lineno);
  require(version == container_version, ErrorKind::format,
          "container version " + std::to_string(version) + " unsupported (expected " +
              std::to_string(container_version) + ")");
  Container c;
  next("type");
  require(line.rfind("type ", 0) == 0, ErrorKind::format, at_line(lineno) + "expected type tag");
  c.type = trim(std::string_view(line).substr(5));
  check_type_tag(c.type);
  next("header");
  require(line.rfind("header ", 0) == 0, ErrorKind::format, at_line(lineno) + "expected header");
  try {
    c.header = json::parse(line.substr(7));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::format, at_line(lineno) + "bad header: " + e.what());
  }
  for (;;) {
    next("end marker");
    if (trim(line) == "end") break;
    const auto f = split_whitespace(line);
    require(f.size() == 4 && f[0] == "block", ErrorKind::format, at_line(lineno) + "expected block header");
    Block b;
    b.name = std::string(f[1]);
    const long long rows = parse_integer(f[2], lineno);
    const long long cols = parse_integer(f[3], lineno);
    require(rows >= 0 && cols >= 0, ErrorKind::format, at_line(lineno) + "negative block shape");
    b.values.resize(rows, cols);
    for (long long i = 0; i < rows; ++i) {
      next("block rows");
      const auto vals = split_whitespace(line);
      require(static_cast<long long>(vals.size()) == cols, ErrorKind::format,
              at_line(lineno) + "expected " + std::to_string(cols) + " values");
      for (long long j = 0; j < cols; ++j) b.values(i, j) = parse_double(vals[static_cast<std::size_t>(j)], lineno);
    }
    c.blocks.push_back(std::move(b));
  }
  return c;
}

namespace detail {

static_assert(std::endian::native == std::endian::little, "binary containers assume a little-endian host");

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void put_string(std::ostream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <class T>
T get(std::istream& in, const char* what) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  require(in.gcount() == static_cast<std::streamsize>(sizeof v), ErrorKind::format,
          std::string("truncated container: missing ") + what);
  return v;
}

inline std::string get_string(std::istream& in, const char* what) {
  const auto n = get<std::uint64_t>(in, what);
  require(n < (1ull << 32), ErrorKind::format, std::string("implausible length for ") + what);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  require(in.gcount() == static_cast<std::streamsize>(n), ErrorKind::format,
          std::string("truncated container: missing ") + what);
  return s;
}

}  // namespace detail

/// IEEE-754 binary64 little-endian payload; round trips are bit exact.
inline void write_binary(std::ostream& out, const Container& c) {
  check_type_tag(c.type);
  out.write(binary_magic.data(), static_cast<std::streamsize>(binary_magic.size()));
  detail::put<std::uint32_t>(out, container_version);
  detail::put_string(out, c.type);
  detail::put_string(out, c.header.dump());
  detail::put<std::uint64_t>(out, c.blocks.size());
  for (const auto& b : c.blocks) {
    detail::put_string(out, b.name);
    detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(b.values.rows()));
    detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(b.values.cols()));
    out.write(reinterpret_cast<const char*>(b.values.data()),
              static_cast<std::streamsize>(b.values.size() * static_cast<Index>(sizeof(double))));
  }
  out.write("END\n", 4);
}

inline Container read_binary(std::istream& in) {
  std::string magic(binary_magic.size(), '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  require(magic == binary_magic, ErrorKind::format, "not a binary coreset container");
  const auto version = detail::get<std::uint32_t>(in, "version");
  require(version == container_version, ErrorKind::format,
          "container version " + std::to_string(version) + " unsupported (expected " +
              std::to_string(container_version) + ")");
  Container c;
  c.type = detail::get_string(in, "type tag");
  check_type_tag(c.type);
  try {
    c.header = json::parse(detail::get_string(in, "header"));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::format, std::string("bad header: ") + e.what());
  }
  const auto nblocks = detail::get<std::uint64_t>(in, "block count");
  for (std::uint64_t k = 0; k < nblocks; ++k) {
    Block b;
    b.name = detail::get_string(in, "block name");
    const auto rows = detail::get<std::uint64_t>(in, "block rows");
    const auto cols = detail::get<std::uint64_t>(in, "block cols");
    require(rows < (1ull << 32) && cols < (1ull << 32), ErrorKind::format, "implausible block shape");
    b.values.resize(static_cast<Index>(rows), static_cast<Index>(cols));
    const auto bytes = static_cast<std::streamsize>(rows * cols * sizeof(double));
    in.read(reinterpret_cast<char*>(b.values.data()), bytes);
    require(in.gcount() == bytes, ErrorKind::format, "truncated container: block '" + b.name + "' is short");
    c.blocks.push_back(std::move(b));
  }
  std::string trailer(4, '\0');
  in.read(trailer.data(), 4);
  require(in.gcount() == 4 && trailer == "END\n", ErrorKind::format, "truncated container: missing end marker");
  return c;
}

inline std::string to_bytes(const Container& c, bool binary) {
  std::ostringstream out(std::ios::binary);
  if (binary) {
    write_binary(out, c);
  } else {
    write_text(out, c);
  }
  return out.str();
}

inline Container from_bytes(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  if (bytes.rfind(binary_magic, 0) == 0) return read_binary(in);
  return read_text(in);
}

inline void save(const std::string& path, const Container& c, bool binary) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::invalid_argument, "cannot open output '" + path + "'");
  out << to_bytes(c, binary);
  require(static_cast<bool>(out), ErrorKind::invalid_argument, "failed writing '" + path + "'");
}

inline Container load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::invalid_argument, "cannot open container '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_bytes(buf.str());
}

// ---------------------------------------------------------------------------
// Typed conversions. `config` is the replay document embedded in the header.

inline RowMatrix column_block(const Vector& v) { return RowMatrix(v); }

inline Container to_container(const SubspaceCoreset& core, const json& config = json::object()) {
  Container c;
  c.type = "subspace";
  c.header = json{{"rows", core.size()},
                  {"ambient", core.ambient()},
                  {"p", core.p},
                  {"k", core.k},
                  {"epsilon", core.epsilon},
                  {"variant", std::string(to_string(core.variant))},
                  {"seed", core.seed},
                  {"sample_count", core.sample_count},
                  {"attempts", core.attempts},
                  {"validation_error", core.validation_error},
                  {"reduction", core.reduction},
                  {"config", config}};
  c.blocks.push_back({"points", core.points});
  c.blocks.push_back({"weights", column_block(core.weights)});
  return c;
}

inline SubspaceCoreset subspace_from_container(const Container& c) {
  require(c.type == "subspace", ErrorKind::format, "expected a subspace container, found '" + c.type + "'");
  SubspaceCoreset core;
  try {
    core.p = c.header.at("p").get<double>();
    core.k = c.header.at("k").get<Index>();
    core.epsilon = c.header.at("epsilon").get<double>();
    core.variant = c.header.at("variant").get<std::string>() == "fast" ? Variant::fast : Variant::exact;
    core.seed = c.header.at("seed").get<Seed>();
    core.sample_count = c.header.at("sample_count").get<Index>();
    core.attempts = c.header.at("attempts").get<int>();
    core.validation_error = c.header.at("validation_error").get<double>();
    core.reduction = c.header.at("reduction").get<ReductionReport>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, std::string("subspace header: ") + e.what());
  }
  core.points = c.block("points");
  const RowMatrix& w = c.block("weights");
  require(w.cols() == 1 && w.rows() == core.points.rows(), ErrorKind::format, "weights block does not match points");
  core.weights = w.col(0);
  return core;
}

inline Container to_container(const WeightedCoreset& core, const json& config = json::object()) {
  Container c;
  c.type = "kmedian";
  c.header = json{{"rows", core.size()},
                  {"ambient", core.ambient()},
                  {"p", 1.0},
                  {"k", core.k},
                  {"epsilon", core.epsilon},
                  {"seed", core.seed},
                  {"sample_count", core.sample_count},
                  {"source_rows", core.source_rows},
                  {"sensitivity_total", core.sensitivity_total},
                  {"reduction", core.reduction},
                  {"config", config}};
  c.blocks.push_back({"points", core.points});
  c.blocks.push_back({"weights", column_block(core.weights)});
  return c;
}

inline WeightedCoreset kmedian_from_container(const Container& c) {
  require(c.type == "kmedian", ErrorKind::format, "expected a kmedian container, found '" + c.type + "'");
  WeightedCoreset core;
  try {
    core.k = c.header.at("k").get<Index>();
    core.epsilon = c.header.at("epsilon").get<double>();
    core.seed = c.header.at("seed").get<Seed>();
    core.sample_count = c.header.at("sample_count").get<Index>();
    core.source_rows = c.header.at("source_rows").get<Index>();
    core.sensitivity_total = c.header.at("sensitivity_total").get<double>();
    core.reduction = c.header.at("reduction").get<ReductionReport>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, std::string("kmedian header: ") + e.what());
  }
  core.points = c.block("points");
  const RowMatrix& w = c.block("weights");
  require(w.cols() == 1 && w.rows() == core.points.rows(), ErrorKind::format, "weights block does not match points");
  core.weights = w.col(0);
  return core;
}

inline Container to_container(const Reduction& red, double p, Index k, double eps, const json& config = json::object()) {
  const AugmentedMatrix& b = red.matrix;
  Container c;
  c.type = "augmented";
  c.header = json{{"rows", b.rows()},   {"ambient", b.ambient()}, {"p", p},
                  {"k", k},             {"epsilon", eps},         {"exact_tail", b.exact_tail},
                  {"reduction", red.report}, {"config", config}};
  c.blocks.push_back({"coeffs", RowMatrix(b.coeffs)});
  c.blocks.push_back({"basis", RowMatrix(b.basis.basis())});
  c.blocks.push_back({"tail", column_block(b.tail)});
  return c;
}

inline Reduction reduction_from_container(const Container& c) {
  require(c.type == "augmented", ErrorKind::format, "expected an augmented container, found '" + c.type + "'");
  Reduction red;
  try {
    red.matrix.exact_tail = c.header.at("exact_tail").get<bool>();
    red.report = c.header.at("reduction").get<ReductionReport>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, std::string("augmented header: ") + e.what());
  }
  red.matrix.coeffs = c.block("coeffs");
  red.matrix.basis = Subspace::from_orthonormal(c.block("basis"), 1e-8);
  red.matrix.tail = c.block("tail").col(0);
  require(red.matrix.coeffs.rows() == red.matrix.tail.size() && red.matrix.coeffs.cols() == red.matrix.basis.dim(),
          ErrorKind::format, "augmented blocks have inconsistent shapes");
  return red;
}

// ---------------------------------------------------------------------------
// Query files: {"kind": "subspace" | "centers", "queries": [matrix, ...]}
// with each matrix a list of rows (d x m bases, or k x d center sets).

inline RowMatrix matrix_from_json(const json& rows) {
  require(rows.is_array() && !rows.empty() && rows[0].is_array(), ErrorKind::parse, "query matrix must be a list of rows");
  RowMatrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].is_array() && rows[i].size() == rows[0].size(), ErrorKind::parse, "ragged query matrix");
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      require(rows[i][j].is_number(), ErrorKind::parse, "query entries must be numbers");
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j].get<double>();
    }
  }
  require(m.allFinite(), ErrorKind::non_finite, "query matrix has non-finite entries");
  return m;
}

inline json matrix_to_json(const RowMatrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

struct QueryFile {
  std::string kind;
  std::vector<RowMatrix> queries;
};

inline QueryFile read_queries(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::invalid_argument, "cannot open query file '" + path + "'");
  QueryFile q;
  try {
    const json doc = json::parse(in);
    q.kind = doc.at("kind").get<std::string>();
    for (const auto& m : doc.at("queries")) q.queries.push_back(matrix_from_json(m));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, "query file '" + path + "': " + e.what());
  }
  require(q.kind == "subspace" || q.kind == "centers", ErrorKind::parse, "query kind must be subspace or centers");
  return q;
}

// ---------------------------------------------------------------------------
// Reports.

inline json to_json(const oracle::DistortionReport& r, bool trace = false) {
  json j{{"queries", r.queries},         {"empty", r.empty},
         {"max_rel_err", r.max_rel_err}, {"mean_rel_err", r.mean_rel_err},
         {"p95_rel_err", r.p95_rel_err}, {"worst_query", r.worst_query}};
  if (trace) j["per_query"] = r.per_query;
  return j;
}

inline json to_json(const oracle::ClaimReport& r) {
  json claims = json::array();
  for (const auto& c : r.claims)
    claims.push_back({{"name", c.name},
                      {"samples", c.samples},
                      {"violations", c.violations},
                      {"worst_excess", c.worst_excess},
                      {"acceptance_rate", c.acceptance_rate}});
  return json{{"claims", claims}, {"total_violations", r.total_violations()}};
}

inline json to_json(const oracle::CounterexampleResult& r) {
  return json{{"naive_estimate", r.naive_estimate},
              {"true_cost", r.true_cost},
              {"augmented_estimate", r.augmented_estimate},
              {"naive_ratio", r.naive_estimate / r.true_cost},
              {"augmented_ratio", r.augmented_estimate / r.true_cost}};
}

inline json report(const std::string& kind, json body, const json& config) {
  return json{{"schema", "coreset-report"},
              {"version", report_schema_version},
              {"kind", kind},
              {"config", config},
              {"result", std::move(body)}};
}

inline json error_document(const Error& e) {
  return json{{"schema", "coreset-error"},
              {"version", report_schema_version},
              {"kind", std::string(to_string(e.kind()))},
              {"message", e.what()}};
}

}  // namespace coreset::io
