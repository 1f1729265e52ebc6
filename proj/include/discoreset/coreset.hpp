#pragma once

// Coreset by repeated halving: color, keep the +1 half, repeat.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "discoreset/colorizer.hpp"
#include "discoreset/errors.hpp"
#include "discoreset/kernel.hpp"
#include "discoreset/rng.hpp"

namespace discoreset {

struct HalvingRound {
  std::vector<std::size_t> kept;  // indices into the round's input set, ascending
  GlobalColoring coloring;
};

inline HalvingRound halve(const PointSet& points, std::uint64_t seed, const ColorizerOptions& options = {}) {
  detail::require(points.size() >= 2, "halve: need at least two points");
  HalvingRound r;
  r.coloring = color_all(points, seed, options);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (r.coloring.coloring[i] > 0) r.kept.push_back(i);
  }
  return r;
}

struct RoundReport {
  std::size_t input_size = 0;
  std::size_t output_size = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> indices;       // survivors, as indices into the original input
  std::vector<CellColoringReport> cells;  // members index the round's input set
};

struct CoresetResult {
  std::vector<std::size_t> indices;  // ascending indices into the original input
  std::size_t target_size = 0;
  std::size_t rounds = 0;
  std::uint64_t seed = 0;
  std::size_t presampled_size = 0;  // 0 when no presampling ran
  std::vector<std::size_t> presample_indices;
  std::vector<RoundReport> per_round_reports;
};

struct CoresetOptions {
  bool presample = false;
  double c_s = 4.0;  // presample size ceil(c_s / eps^2)
  double c_q = 4.0;  // target size ceil(c_q / eps)
  ColorizerOptions colorizer;
};

/// Either an explicit target size or an error level eps.
struct CoresetGoal {
  std::optional<std::size_t> target;
  std::optional<double> epsilon;

  static CoresetGoal size(std::size_t t) { return {t, std::nullopt}; }
  static CoresetGoal eps(double e) { return {std::nullopt, e}; }
};

/// Sorted uniform sample of `size` distinct indices in [0, n).
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t size, CounterRng rng) {
  detail::require(size <= n, "sample: size exceeds population");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(size);
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline CoresetResult random_baseline(const PointSet& points, std::size_t size, std::uint64_t seed) {
  detail::require(size >= 1 && size <= points.size(), "random_baseline: size must be in [1, |P|]");
  CoresetResult r;
  r.indices = sample_indices(points.size(), size, CounterRng(seed));
  r.target_size = size;
  r.seed = seed;
  return r;
}

inline CoresetResult build_coreset(const PointSet& points, const CoresetGoal& goal, std::uint64_t seed,
                                   const CoresetOptions& options = {}) {
  detail::require(!points.empty(), "build_coreset: empty point set");
  detail::require(goal.target.has_value() != goal.epsilon.has_value(),
                  "build_coreset: give exactly one of target size or epsilon");
  const CounterRng root(seed);

  std::size_t target = 0;
  if (goal.target) {
    target = *goal.target;
    detail::require(target >= 1, "build_coreset: target size must be at least 1");
    detail::require(target <= points.size(), "build_coreset: target size exceeds |P|");
  } else {
    const double eps = *goal.epsilon;
    detail::require(eps > 0.0 && eps < 1.0, "build_coreset: epsilon must lie in (0, 1)");
    detail::require(options.c_q > 0.0 && options.c_s > 0.0, "build_coreset: c_q and c_s must be positive");
    target = static_cast<std::size_t>(std::ceil(options.c_q / eps));
  }

  CoresetResult r;
  r.seed = seed;
  std::vector<std::size_t> current(points.size());
  std::iota(current.begin(), current.end(), std::size_t{0});

  if (options.presample) {
    double cap = std::numeric_limits<double>::infinity();
    if (goal.epsilon) {
      cap = std::ceil(options.c_s / (*goal.epsilon * *goal.epsilon));
    } else {
      // eps implied by the target through c_q
      const double eps = options.c_q / static_cast<double>(target);
      cap = std::ceil(options.c_s / (eps * eps));
    }
    if (cap < static_cast<double>(points.size())) {
      current = sample_indices(points.size(), static_cast<std::size_t>(cap), root.split(0));
      r.presampled_size = current.size();
      r.presample_indices = current;
    }
  }
  target = std::min(target, current.size());
  r.target_size = target;

  while (current.size() > target) {
    const std::uint64_t round_seed = root.split(r.rounds + 1).key();
    const PointSet round_points = points.subset(current);
    HalvingRound h = halve(round_points, round_seed, options.colorizer);
    RoundReport rep;
    rep.input_size = current.size();
    rep.seed = round_seed;
    std::vector<std::size_t> next;
    next.reserve(h.kept.size());
    for (std::size_t k : h.kept) next.push_back(current[k]);
    rep.output_size = next.size();
    rep.indices = next;
    rep.cells = std::move(h.coloring.cells);
    r.per_round_reports.push_back(std::move(rep));
    current = std::move(next);
    ++r.rounds;
  }
  r.indices = std::move(current);
  return r;
}

inline constexpr std::size_t kOracleMaxPoints = 16;

struct OracleResult {
  double sup = 0.0;
  Coloring coloring;
};

/// Exhaustive minimum over colorings of max_q |D(q)|. The first sign is fixed
/// to +1 (sigma and -sigma tie); D is summed directly in index order.
inline OracleResult oracle_min_discrepancy(const PointSet& points, const PointSet& queries) {
  const std::size_t n = points.size();
  detail::require(n >= 1, "oracle_min_discrepancy: empty point set");
  detail::require(n <= kOracleMaxPoints, "oracle_min_discrepancy: at most 16 points");
  detail::require(!queries.empty() && queries.dim() == points.dim(), "oracle_min_discrepancy: bad query set");

  Eigen::MatrixXd k(static_cast<Eigen::Index>(queries.size()), static_cast<Eigen::Index>(n));
  for (std::size_t q = 0; q < queries.size(); ++q) {
    for (std::size_t i = 0; i < n; ++i) {
      k(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(i)) = gauss(queries.point(q), points.point(i));
    }
  }

  OracleResult best;
  best.sup = std::numeric_limits<double>::infinity();
  std::uint32_t best_mask = 0;
  const std::uint32_t masks = 1u << (n - 1);
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    double worst = 0.0;
    for (Eigen::Index q = 0; q < k.rows() && worst < best.sup; ++q) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool minus = i > 0 && ((mask >> (i - 1)) & 1u);
        d += minus ? -k(q, static_cast<Eigen::Index>(i)) : k(q, static_cast<Eigen::Index>(i));
      }
      worst = std::max(worst, std::abs(d));
    }
    if (worst < best.sup) {
      best.sup = worst;
      best_mask = mask;
    }
  }
  std::vector<int> s(n, 1);
  for (std::size_t i = 1; i < n; ++i) s[i] = ((best_mask >> (i - 1)) & 1u) ? -1 : 1;
  best.coloring = Coloring(std::move(s));
  return best;
}

}  // namespace discoreset
