#pragma once

// Low-discrepancy coloring of an arbitrary point set: split the points into
// l_inf unit cells around Grid_d(2), color each cell with the walk until the
// coloring passes every grid threshold of the cell's schedule, then flip
// lowest-index majority points until the cell is balanced.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "discoreset/decomp.hpp"
#include "discoreset/errors.hpp"
#include "discoreset/kernel.hpp"
#include "discoreset/rng.hpp"
#include "discoreset/schedule.hpp"
#include "discoreset/walk.hpp"

namespace discoreset {

struct CellAssignment {
  Point center;                      // point of Grid_d(2)
  std::vector<std::size_t> members;  // ascending indices into the input set
};

/// Nearest Grid_d(2) point; on exact ties the smaller lattice coordinate wins.
inline Point nearest_cell_center(const Point& p) {
  Point g(p.size());
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double t = p(j) / 2.0;
    const double f = std::floor(t);
    g(j) = 2.0 * (t - f > 0.5 ? f + 1.0 : f);
  }
  return g;
}

/// Cells ordered lexicographically by center.
inline std::vector<CellAssignment> partition(const PointSet& points) {
  detail::require(!points.empty(), "partition: empty point set");
  std::map<std::vector<double>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point g = nearest_cell_center(points.point(i));
    cells[std::vector<double>(g.data(), g.data() + g.size())].push_back(i);
  }
  std::vector<CellAssignment> out;
  out.reserve(cells.size());
  for (auto& [key, members] : cells) {
    out.push_back(CellAssignment{Eigen::Map<const Eigen::VectorXd>(key.data(), static_cast<Eigen::Index>(key.size())),
                                 std::move(members)});
  }
  return out;
}

struct VerifyResult {
  bool pass = false;
  bool grids_ok = false;
  bool balance_ok = false;
  double max_grid_ratio = 0.0;  // max over checked grid points of |D(s)| / threshold(s)
  long imbalance = 0;           // sum of signs
  std::size_t checked_points = 0;
};

/// Precomputed grid factors for repeated verification of one cell.
/// Points must already be centered on the cell (schedule grids sit at the origin).
class CellVerifier {
 public:
  CellVerifier(const PointSet& centered, const GridSchedule& schedule) : schedule_(&schedule), n_(centered.size()) {
    detail::require(centered.dim() == schedule.dim, "verify: schedule/cell dimension mismatch");
    for (int level = 0; level < schedule.ell; ++level) {
      const auto& grid = schedule.grids[static_cast<std::size_t>(level)];
      LatticeAxes lat = grid.axes();
      thresholds_.push_back(level_thresholds(lat, grid, schedule.constants.c1 * schedule.n_at(level + 1)));
      summers_.emplace_back(centered, std::move(lat));
    }
  }

  const GridSchedule& schedule() const { return *schedule_; }
  const LatticeSummer& summer(int level) const { return summers_.at(static_cast<std::size_t>(level)); }
  const Eigen::VectorXd& thresholds(int level) const { return thresholds_.at(static_cast<std::size_t>(level)); }

  VerifyResult check(const Coloring& sigma) const {
    detail::require(sigma.size() == n_, "verify: coloring length mismatch");
    VerifyResult r;
    const Eigen::VectorXd w = sigma.as_vector();
    for (std::size_t level = 0; level < summers_.size(); ++level) {
      const Eigen::VectorXd disc = summers_[level].sums(w);
      const double ratio = (disc.cwiseAbs().array() / thresholds_[level].array()).maxCoeff();
      r.max_grid_ratio = std::max(r.max_grid_ratio, ratio);
      r.checked_points += static_cast<std::size_t>(disc.size());
    }
    r.imbalance = sigma.imbalance();
    r.grids_ok = r.max_grid_ratio < 1.0;
    r.balance_ok = static_cast<double>(std::labs(r.imbalance)) <= schedule_->constants.c_big;
    r.pass = r.grids_ok && r.balance_ok;
    return r;
  }

 private:
  static Eigen::VectorXd level_thresholds(const LatticeAxes& lat, const Grid& grid, double scale) {
    // c1 n_{i+1} e^{-(2/3)|s - center|^2}, separable over coordinates.
    std::vector<Eigen::VectorXd> f;
    for (int j = 0; j < lat.dim(); ++j) {
      const auto& axis = lat.axes[static_cast<std::size_t>(j)];
      f.emplace_back((-(2.0 / 3.0) * (axis.array() - grid.center(j)).square()).exp());
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(lat.count()));
    for (std::size_t flat = 0; flat < lat.count(); ++flat) {
      std::size_t rest = flat;
      double v = scale;
      for (int j = lat.dim() - 1; j >= 0; --j) {
        const auto len = static_cast<std::size_t>(f[static_cast<std::size_t>(j)].size());
        v *= f[static_cast<std::size_t>(j)](static_cast<Eigen::Index>(rest % len));
        rest /= len;
      }
      out(static_cast<Eigen::Index>(flat)) = v;
    }
    return out;
  }

  const GridSchedule* schedule_;
  std::size_t n_;
  std::vector<LatticeSummer> summers_;
  std::vector<Eigen::VectorXd> thresholds_;
};

/// Passes iff |D(s')| < threshold_at(i, s') for every level i and s' in S_i,
/// and |sum sigma| <= c_big.
inline VerifyResult verify(const PointSet& centered, const Coloring& sigma, const GridSchedule& schedule) {
  detail::require(sigma.size() == centered.size(), "verify: coloring length mismatch");
  for (std::size_t i = 0; i < centered.size(); ++i) {
    detail::require(centered.row(i).cwiseAbs().maxCoeff() <= 1.0 + kUnitBallSlack,
                    "verify: cell points must lie in the unit l_inf ball after centering");
  }
  return CellVerifier(centered, schedule).check(sigma);
}

struct ColorizerOptions {
  std::optional<Constants> constants;  // default_constants(d) when empty
  int retry_budget = 64;
  WalkOptions walk;
};

struct CellColoringReport {
  Point center;
  std::vector<std::size_t> members;
  Coloring coloring;       // final, balanced; parallel to members
  Coloring walk_coloring;  // accepted coloring before the balance flip
  std::size_t attempts = 0;  // walk executions (0 for bypassed cells)
  std::size_t retries = 0;   // rejected walk executions
  std::size_t flipped = 0;
  double max_grid_ratio = 0.0;     // accepted coloring
  double post_flip_ratio = 0.0;    // after the flip, same grids
  long imbalance_before = 0;
  bool bypassed = false;           // cells of size <= 2 skip the walk
  std::uint64_t seed = 0;
};

/// Seed used for the k-th cell (lexicographic order) of a color_all call.
inline std::uint64_t cell_seed(std::uint64_t seed, std::size_t cell_index) {
  return CounterRng(seed).split(cell_index + 1).key();
}

namespace detail {

/// Flip lowest-index majority points until #(+1) - #(-1) is 0 (even size) or
/// odd_extra (odd size). Returns the number of flips.
inline std::size_t balance_flip(std::vector<int>& signs, int odd_extra) {
  const auto n = static_cast<long>(signs.size());
  long plus = 0;
  for (int s : signs) plus += (s > 0);
  const long want = n / 2 + ((n % 2 != 0 && odd_extra > 0) ? 1 : 0);
  const int from = plus > want ? 1 : -1;
  long todo = std::labs(plus - want);
  std::size_t flips = 0;
  for (std::size_t i = 0; i < signs.size() && todo > 0; ++i) {
    if (signs[i] == from) {
      signs[i] = -from;
      --todo;
      ++flips;
    }
  }
  return flips;
}

}  // namespace detail

inline CellColoringReport color_cell(const CellAssignment& cell, const PointSet& points, std::uint64_t seed,
                                     const ColorizerOptions& options = {}, int odd_extra = 1) {
  detail::require(!cell.members.empty(), "color_cell: empty cell");
  detail::require(options.retry_budget >= 1, "color_cell: retry budget must be positive");
  const PointSet centered = points.subset(cell.members).translated(cell.center);
  const int dim = points.dim();
  const GridSchedule schedule =
      build_schedule(static_cast<long long>(centered.size()), dim, options.constants.value_or(default_constants(dim)));
  const CellVerifier verifier(centered, schedule);

  CellColoringReport rep;
  rep.center = cell.center;
  rep.members = cell.members;
  rep.seed = seed;

  if (centered.size() <= 2) {
    std::vector<int> s = centered.size() == 1 ? std::vector<int>{odd_extra} : std::vector<int>{1, -1};
    rep.bypassed = true;
    rep.walk_coloring = Coloring(s);
    rep.coloring = Coloring(std::move(s));
    rep.imbalance_before = rep.coloring.imbalance();
    rep.max_grid_ratio = verifier.check(rep.coloring).max_grid_ratio;
    rep.post_flip_ratio = rep.max_grid_ratio;
    return rep;
  }

  const AugmentedVectors aug = augment(psd_factor(build_gram(centered)), centered, dim);
  const CounterRng attempts_rng(seed);
  double best_ratio = std::numeric_limits<double>::infinity();
  long best_imbalance = 0;
  for (int attempt = 0; attempt < options.retry_budget; ++attempt) {
    const auto walk = gsw_color(WalkInput{aug.vectors, attempts_rng.split(static_cast<std::uint64_t>(attempt)).key()},
                                options.walk);
    const VerifyResult check = verifier.check(walk.signs);
    ++rep.attempts;
    if (check.max_grid_ratio < best_ratio) {
      best_ratio = check.max_grid_ratio;
      best_imbalance = check.imbalance;
    }
    if (!check.pass) continue;

    rep.retries = rep.attempts - 1;
    rep.walk_coloring = walk.signs;
    rep.max_grid_ratio = check.max_grid_ratio;
    rep.imbalance_before = check.imbalance;
    std::vector<int> s = walk.signs.signs();
    rep.flipped = detail::balance_flip(s, odd_extra);
    rep.coloring = Coloring(std::move(s));
    rep.post_flip_ratio = verifier.check(rep.coloring).max_grid_ratio;
    return rep;
  }

  std::ostringstream msg;
  msg << "color_cell: retry budget (" << options.retry_budget << ") exhausted for cell centered at ("
      << cell.center.transpose() << ") with " << centered.size() << " points; best grid ratio " << best_ratio
      << ", imbalance " << best_imbalance << "; constants c0=" << schedule.constants.c0
      << " c1=" << schedule.constants.c1 << " c_big=" << schedule.constants.c_big;
  throw ColoringFailure(msg.str());
}

struct GlobalColoring {
  Coloring coloring;  // over all input indices
  std::vector<CellColoringReport> cells;
};

/// Colors every cell; odd cells alternately carry the extra +1 / -1 so the
/// global imbalance is at most one.
inline GlobalColoring color_all(const PointSet& points, std::uint64_t seed, const ColorizerOptions& options = {}) {
  const auto cells = partition(points);
  GlobalColoring out;
  std::vector<int> signs(points.size(), 0);
  int next_extra = 1;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const int extra = next_extra;
    if (cells[k].members.size() % 2 == 1) next_extra = -next_extra;
    auto rep = color_cell(cells[k], points, cell_seed(seed, k), options, extra);
    for (std::size_t m = 0; m < rep.members.size(); ++m) signs[rep.members[m]] = rep.coloring[m];
    out.cells.push_back(std::move(rep));
  }
  out.coloring = Coloring(std::move(signs));
  return out;
}

}  // namespace discoreset
