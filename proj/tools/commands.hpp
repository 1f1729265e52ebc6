#pragma once

// Command implementations behind the discoreset CLI. Each returns the JSON
// payload it would write, so tests can drive them in-process.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "discoreset/colorizer.hpp"
#include "discoreset/coreset.hpp"
#include "discoreset/errors.hpp"
#include "discoreset/eval.hpp"
#include "discoreset/io.hpp"
#include "discoreset/schedule.hpp"

namespace discoreset::cli {

using discoreset::to_json;

struct RunConfig {
  std::string command;
  std::string input;
  std::string output;
  std::optional<int> dim;
  std::optional<std::size_t> target_size;
  std::optional<double> epsilon;
  std::uint64_t seed = 0;
  std::optional<double> c0;
  std::optional<double> c1;
  std::optional<double> c_big;
  bool strict_constants = false;
  std::optional<double> resolution;
  bool literal_width = false;
  int retry_budget = 64;
  bool presample = false;
  double c_s = 4.0;
  double c_q = 4.0;
  std::string coreset;        // eval: build output
  std::string coloring;       // verify: coloring file
  std::string emit_coloring;  // build: also write the first round's coloring
  std::string csv;            // bench: optional table
  std::vector<std::size_t> sizes;
  int seeds = 20;
};

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

inline json to_json(const RunConfig& c) {
  return json{{"command", c.command},
              {"input", c.input},
              {"output", c.output},
              {"dim", opt_json(c.dim)},
              {"target_size", opt_json(c.target_size)},
              {"epsilon", opt_json(c.epsilon)},
              {"seed", c.seed},
              {"c0", opt_json(c.c0)},
              {"c1", opt_json(c.c1)},
              {"c_big", opt_json(c.c_big)},
              {"strict_constants", c.strict_constants},
              {"resolution", opt_json(c.resolution)},
              {"literal_width", c.literal_width},
              {"retry_budget", c.retry_budget},
              {"presample", c.presample},
              {"c_s", c.c_s},
              {"c_q", c.c_q},
              {"coreset", c.coreset},
              {"coloring", c.coloring},
              {"emit_coloring", c.emit_coloring},
              {"csv", c.csv},
              {"sizes", c.sizes},
              {"seeds", c.seeds}};
}

inline RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    c.command = j.value("command", "");
    c.input = j.value("input", "");
    c.output = j.value("output", "");
    c.dim = opt_from<int>(j, "dim");
    c.target_size = opt_from<std::size_t>(j, "target_size");
    c.epsilon = opt_from<double>(j, "epsilon");
    c.seed = j.value("seed", std::uint64_t{0});
    c.c0 = opt_from<double>(j, "c0");
    c.c1 = opt_from<double>(j, "c1");
    c.c_big = opt_from<double>(j, "c_big");
    c.strict_constants = j.value("strict_constants", false);
    c.resolution = opt_from<double>(j, "resolution");
    c.literal_width = j.value("literal_width", false);
    c.retry_budget = j.value("retry_budget", 64);
    c.presample = j.value("presample", false);
    c.c_s = j.value("c_s", 4.0);
    c.c_q = j.value("c_q", 4.0);
    c.coreset = j.value("coreset", "");
    c.coloring = j.value("coloring", "");
    c.emit_coloring = j.value("emit_coloring", "");
    c.csv = j.value("csv", "");
    c.sizes = j.value("sizes", std::vector<std::size_t>{});
    c.seeds = j.value("seeds", 20);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

inline Constants resolve_constants(const RunConfig& c, int dim) {
  Constants k = c.strict_constants ? strict_constants(dim) : default_constants(dim);
  if (c.c0) k.c0 = *c.c0;
  if (c.c1) k.c1 = *c.c1;
  if (c.c_big) k.c_big = *c.c_big;
  detail::require(k.c0 > 0 && k.c1 > 0 && k.c_big > 0, "constants c0, c1, c_big must be positive");
  return k;
}

inline void validate(const RunConfig& c) {
  detail::require(!c.input.empty(), "--input is required");
  detail::require(!c.dim || *c.dim >= 1, "--dim must be positive");
  detail::require(c.retry_budget >= 1, "--retry-budget must be positive");
  detail::require(!c.resolution || *c.resolution > 0.0, "--resolution must be positive");
  detail::require(c.c_s > 0.0 && c.c_q > 0.0, "c_s and c_q must be positive");
  if (c.command == "build") {
    detail::require(c.target_size.has_value() != c.epsilon.has_value(),
                    "build: give exactly one of --target-size or --epsilon");
  } else if (c.command == "eval") {
    detail::require(!c.coreset.empty(), "eval: --coreset is required");
  } else if (c.command == "bench") {
    detail::require(!c.sizes.empty(), "bench: --sizes must be nonempty");
    detail::require(c.seeds >= 1, "bench: --seeds must be positive");
  } else if (c.command == "verify") {
    detail::require(!c.coloring.empty(), "verify: --coloring is required");
  } else {
    throw ValidationError("unknown command '" + c.command + "'");
  }
}

inline ColorizerOptions colorizer_options(const RunConfig& c, int dim) {
  ColorizerOptions o;
  o.constants = resolve_constants(c, dim);
  o.retry_budget = c.retry_budget;
  return o;
}

inline QueryGridOptions query_options(const RunConfig& c) {
  QueryGridOptions o;
  o.resolution = c.resolution;
  o.literal_width = c.literal_width;
  return o;
}

inline json envelope(const RunConfig& c, const std::string& input_hash) {
  return json{{"schema_version", kSchemaVersion},
              {"created_utc", utc_timestamp()},
              {"input_hash", input_hash},
              {"seed", c.seed},
              {"config", to_json(c)}};
}

struct BuildOutput {
  json payload;
  std::optional<json> coloring;  // set when emit_coloring is requested
};

inline BuildOutput run_build(const RunConfig& c) {
  validate(c);
  const PointSet p = read_points(c.input, c.dim);
  const std::string hash = hash_file(c.input);
  CoresetOptions opts;
  opts.presample = c.presample;
  opts.c_s = c.c_s;
  opts.c_q = c.c_q;
  opts.colorizer = colorizer_options(c, p.dim());
  const CoresetGoal goal = c.target_size ? CoresetGoal::size(*c.target_size) : CoresetGoal::eps(*c.epsilon);
  const CoresetResult r = build_coreset(p, goal, c.seed, opts);

  BuildOutput out;
  out.payload = envelope(c, hash);
  out.payload["dim"] = p.dim();
  out.payload["input_size"] = p.size();
  out.payload["constants"] = to_json(*opts.colorizer.constants);
  out.payload["result"] = to_json(r);

  if (!c.emit_coloring.empty() && !r.per_round_reports.empty()) {
    // Round-one coloring; its input is the presample when one ran.
    const auto& round = r.per_round_reports.front();
    std::vector<std::size_t> input;
    if (r.presampled_size > 0) {
      input = r.presample_indices;
    } else {
      input.resize(p.size());
      for (std::size_t i = 0; i < input.size(); ++i) input[i] = i;
    }
    std::vector<int> walk(input.size(), 0);
    std::vector<int> balanced(input.size(), 0);
    for (const auto& cell : round.cells) {
      for (std::size_t m = 0; m < cell.members.size(); ++m) {
        walk[cell.members[m]] = cell.walk_coloring[m];
        balanced[cell.members[m]] = cell.coloring[m];
      }
    }
    json col = envelope(c, hash);
    col["indices"] = input;
    col["signs"] = walk;
    col["balanced_signs"] = balanced;
    col["round_seed"] = round.seed;
    col["constants"] = to_json(*opts.colorizer.constants);
    out.coloring = std::move(col);
  }
  return out;
}

inline json run_eval(const RunConfig& c) {
  validate(c);
  const PointSet p = read_points(c.input, c.dim);
  const std::string hash = hash_file(c.input);
  const json built = read_json_file(c.coreset);
  if (built.contains("input_hash") && built.at("input_hash").get<std::string>() != hash) {
    throw ValidationError("eval: coreset file was built from a different input (hash mismatch)");
  }
  std::vector<std::size_t> idx;
  try {
    idx = built.at("result").at("indices").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("eval: malformed coreset file: ") + e.what());
  }
  detail::require(!idx.empty(), "eval: coreset is empty");
  for (std::size_t i : idx) detail::require(i < p.size(), "eval: coreset index out of range");
  const PointSet q = p.subset(idx);
  const QueryGrid grid = make_query_grid(p, q, query_options(c));
  const EvalReport r = linf_error(p, q, grid);

  json out = envelope(c, hash);
  out["coreset_size"] = idx.size();
  out["input_size"] = p.size();
  out["n_eff"] = grid.n_eff;
  out["margin"] = grid.margin;
  out["report"] = to_json(r);
  return out;
}

struct BenchRow {
  std::string method;
  std::size_t size = 0;
  std::vector<double> errors;  // one per seed
};

inline double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  detail::require(x.size() == y.size() && x.size() >= 2, "loglog_slope: need two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct BenchResult {
  std::vector<BenchRow> discrepancy;  // ascending size
  std::vector<BenchRow> random;
  double slope_discrepancy = 0.0;
  double slope_random = 0.0;
};

/// Per seed: one halving run down to the smallest size, evaluated at the first
/// round reaching each requested size; the random baseline uses the same sizes.
inline BenchResult bench(const PointSet& p, std::vector<std::size_t> sizes, int seeds, std::uint64_t seed,
                         const ColorizerOptions& colorizer, const QueryGridOptions& qopts = {}) {
  detail::require(!sizes.empty() && seeds >= 1, "bench: need sizes and seeds");
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  for (std::size_t s : sizes) detail::require(s >= 1 && s <= p.size(), "bench: size out of range");

  BenchResult out;
  for (std::size_t s : sizes) {
    out.discrepancy.push_back({"discrepancy", s, {}});
    out.random.push_back({"random", s, {}});
  }
  const QueryGrid grid = make_query_grid(p, qopts);
  const Eigen::VectorXd kde_p = kde_on_grid(p, grid);
  const CounterRng root(seed);
  CoresetOptions copts;
  copts.colorizer = colorizer;
  for (int t = 0; t < seeds; ++t) {
    const std::uint64_t run_seed = root.split(2 * static_cast<std::uint64_t>(t)).key();
    const std::uint64_t base_seed = root.split(2 * static_cast<std::uint64_t>(t) + 1).key();
    const CoresetResult r = build_coreset(p, CoresetGoal::size(sizes.front()), run_seed, copts);
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      std::vector<std::size_t> idx;
      if (sizes[k] >= p.size()) {
        idx.resize(p.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      } else {
        for (const auto& round : r.per_round_reports) {
          if (round.output_size <= sizes[k]) {
            idx = round.indices;
            break;
          }
        }
      }
      out.discrepancy[k].errors.push_back(linf_error_from(kde_p, p.subset(idx), grid).sup_error);
      const auto base = random_baseline(p, idx.size(), CounterRng(base_seed).split(k).key());
      out.random[k].errors.push_back(linf_error_from(kde_p, p.subset(base.indices), grid).sup_error);
    }
  }
  if (sizes.size() >= 2) {
    std::vector<double> x, yd, yr;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      x.push_back(static_cast<double>(sizes[k]));
      yd.push_back(std::max(quantile(out.discrepancy[k].errors, 0.5), 1e-300));
      yr.push_back(std::max(quantile(out.random[k].errors, 0.5), 1e-300));
    }
    out.slope_discrepancy = loglog_slope(x, yd);
    out.slope_random = loglog_slope(x, yr);
  }
  return out;
}

inline json to_json(const BenchRow& r) {
  return json{{"method", r.method},
              {"size", r.size},
              {"median", quantile(r.errors, 0.5)},
              {"q25", quantile(r.errors, 0.25)},
              {"q75", quantile(r.errors, 0.75)},
              {"errors", r.errors}};
}

inline std::string bench_csv(const BenchResult& b) {
  std::ostringstream ss;
  ss.precision(17);
  ss << "method,size,median,q25,q75\n";
  for (const auto* rows : {&b.discrepancy, &b.random}) {
    for (const auto& r : *rows) {
      ss << r.method << ',' << r.size << ',' << quantile(r.errors, 0.5) << ',' << quantile(r.errors, 0.25) << ','
         << quantile(r.errors, 0.75) << '\n';
    }
  }
  return ss.str();
}

inline json run_bench(const RunConfig& c) {
  validate(c);
  const PointSet p = read_points(c.input, c.dim);
  const std::string hash = hash_file(c.input);
  const BenchResult b = bench(p, c.sizes, c.seeds, c.seed, colorizer_options(c, p.dim()), query_options(c));
  json rows = json::array();
  for (const auto* set : {&b.discrepancy, &b.random}) {
    for (const auto& r : *set) rows.push_back(to_json(r));
  }
  json out = envelope(c, hash);
  out["input_size"] = p.size();
  out["rows"] = rows;
  out["slope_discrepancy"] = b.slope_discrepancy;
  out["slope_random"] = b.slope_random;
  if (!c.csv.empty()) write_text(c.csv, bench_csv(b));
  return out;
}

/// Rechecks a stored coloring cell by cell; payload["pass"] is the verdict.
inline json run_verify(const RunConfig& c) {
  validate(c);
  const PointSet all = read_points(c.input, c.dim);
  const std::string hash = hash_file(c.input);
  const json doc = read_json_file(c.coloring);
  std::vector<int> signs;
  std::vector<std::size_t> idx;
  try {
    signs = doc.at("signs").get<std::vector<int>>();
    if (doc.contains("indices")) idx = doc.at("indices").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("verify: malformed coloring file: ") + e.what());
  }
  if (idx.empty()) {
    idx.resize(all.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  }
  for (std::size_t i : idx) detail::require(i < all.size(), "verify: coloring index out of range");
  detail::require(signs.size() == idx.size(), "verify: coloring length does not match the input");
  const PointSet p = all.subset(idx);
  const Coloring sigma(signs);
  const Constants k = resolve_constants(c, p.dim());

  json cells = json::array();
  bool pass = true;
  for (const auto& cell : partition(p)) {
    const PointSet centered = p.subset(cell.members).translated(cell.center);
    std::vector<int> s;
    for (std::size_t m : cell.members) s.push_back(sigma[m]);
    const GridSchedule sched = build_schedule(static_cast<long long>(centered.size()), p.dim(), k);
    const VerifyResult v = verify(centered, Coloring(s), sched);
    const bool bypass = cell.members.size() <= 2;
    pass = pass && (v.pass || bypass);
    json row = to_json(v);
    row["center"] = to_json(cell.center);
    row["size"] = cell.members.size();
    row["bypassed"] = bypass;
    cells.push_back(row);
  }
  json out = envelope(c, hash);
  out["pass"] = pass;
  out["constants"] = to_json(k);
  out["cells"] = cells;
  return out;
}

}  // namespace discoreset::cli
