#pragma once

// Point-file ingestion (CSV or JSON), file hashing and JSON encoders for the
// result types.

#include <nlohmann/json.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "discoreset/colorizer.hpp"
#include "discoreset/coreset.hpp"
#include "discoreset/errors.hpp"
#include "discoreset/eval.hpp"
#include "discoreset/kernel.hpp"
#include "discoreset/schedule.hpp"

namespace discoreset {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline std::optional<double> parse_double(const std::string& field) {
  if (field.empty()) return std::nullopt;
  double v = 0.0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path);
  return ss.str();
}

inline void check_dim(const std::string& where, std::size_t got, std::optional<int> expected) {
  if (expected && static_cast<int>(got) != *expected) {
    throw ValidationError(where + ": expected " + std::to_string(*expected) + " coordinates, got " +
                          std::to_string(got));
  }
}

}  // namespace detail

/// CSV: one point per line, comma separated, optional header line, blank
/// lines and '#' comments skipped.
inline PointSet parse_csv_points(const std::string& text, std::optional<int> dim = std::nullopt,
                                 const std::string& name = "<csv>") {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<double> row;
    std::vector<std::string> bad;
    std::stringstream fields(t);
    std::string f;
    while (std::getline(fields, f, ',')) {
      const std::string ft = detail::trim(f);
      if (auto v = detail::parse_double(ft)) {
        row.push_back(*v);
      } else {
        bad.push_back(ft);
      }
    }
    const std::string where = name + ":" + std::to_string(lineno);
    if (!bad.empty()) {
      if (!seen_content) {  // header
        seen_content = true;
        continue;
      }
      throw ValidationError(where + ": non-numeric field '" + bad.front() + "'");
    }
    seen_content = true;
    for (double v : row) {
      if (!std::isfinite(v)) throw ValidationError(where + ": non-finite coordinate");
    }
    detail::check_dim(where, row.size(), dim ? dim : (rows.empty() ? std::nullopt : std::optional<int>(static_cast<int>(rows.front().size()))));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(name + ": no points");
  return PointSet::from_rows(rows);
}

/// JSON: array of arrays of numbers.
inline PointSet parse_json_points(const std::string& text, std::optional<int> dim = std::nullopt,
                                  const std::string& name = "<json>") {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(name + ": " + e.what());
  }
  if (!doc.is_array() || doc.empty()) throw ValidationError(name + ": expected a nonempty array of points");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = name + ": row " + std::to_string(i + 1);
    const auto& r = doc[i];
    if (!r.is_array()) throw ValidationError(where + ": expected an array");
    std::vector<double> row;
    for (const auto& v : r) {
      if (!v.is_number()) throw ValidationError(where + ": non-numeric coordinate");
      row.push_back(v.get<double>());
      if (!std::isfinite(row.back())) throw ValidationError(where + ": non-finite coordinate");
    }
    detail::check_dim(where, row.size(), dim ? dim : (rows.empty() ? std::nullopt : std::optional<int>(static_cast<int>(rows.front().size()))));
    rows.push_back(std::move(row));
  }
  return PointSet::from_rows(rows);
}

inline bool looks_like_json(const std::string& path, const std::string& text) {
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) return true;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) return c == '[';
  }
  return false;
}

inline PointSet read_points(const std::string& path, std::optional<int> dim = std::nullopt) {
  const std::string text = detail::read_file(path);
  return looks_like_json(path, text) ? parse_json_points(text, dim, path) : parse_csv_points(text, dim, path);
}

/// FNV-1a 64-bit, hex encoded.
inline std::string fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

inline std::string hash_file(const std::string& path) { return fnv1a64(detail::read_file(path)); }

inline json read_json_file(const std::string& path) {
  const std::string text = detail::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

inline void write_json(const std::string& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json to_json(const Point& p) { return json(std::vector<double>(p.data(), p.data() + p.size())); }

inline json to_json(const Constants& c) {
  return json{{"c0", c.c0}, {"c1", c.c1}, {"c_big", c.c_big}, {"strict_constants", c.strict}};
}

inline json to_json(const CellColoringReport& r) {
  return json{{"center", to_json(r.center)},
              {"size", r.members.size()},
              {"attempts", r.attempts},
              {"retries", r.retries},
              {"flipped", r.flipped},
              {"max_grid_ratio", r.max_grid_ratio},
              {"post_flip_ratio", r.post_flip_ratio},
              {"imbalance_before", r.imbalance_before},
              {"imbalance_after", r.coloring.imbalance()},
              {"bypassed", r.bypassed},
              {"seed", r.seed}};
}

inline json to_json(const RoundReport& r) {
  json cells = json::array();
  for (const auto& c : r.cells) cells.push_back(to_json(c));
  return json{{"input_size", r.input_size}, {"output_size", r.output_size}, {"seed", r.seed}, {"cells", cells}};
}

inline json to_json(const CoresetResult& r) {
  json rounds = json::array();
  for (const auto& rr : r.per_round_reports) rounds.push_back(to_json(rr));
  return json{{"indices", r.indices},
              {"size", r.indices.size()},
              {"target_size", r.target_size},
              {"rounds", r.rounds},
              {"seed", r.seed},
              {"presampled_size", r.presampled_size},
              {"reports", rounds}};
}

inline json to_json(const EvalReport& r) {
  return json{{"sup_error", r.sup_error},
              {"argmax_query", to_json(r.argmax_query)},
              {"discretization_bound", r.discretization_bound},
              {"tail_bound", r.tail_bound},
              {"upper_bound", r.upper_bound},
              {"query_count", r.query_count},
              {"width", r.width},
              {"runtime_seconds", r.runtime_seconds}};
}

inline json to_json(const VerifyResult& r) {
  return json{{"pass", r.pass},
              {"grids_ok", r.grids_ok},
              {"balance_ok", r.balance_ok},
              {"max_grid_ratio", r.max_grid_ratio},
              {"imbalance", r.imbalance},
              {"checked_points", r.checked_points}};
}

}  // namespace discoreset
