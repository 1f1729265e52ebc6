#pragma once

// Gram-Schmidt walk: randomized +-1 coloring of vectors of norm <= 1 whose
// signed sum X = sum_i sigma_i v_i has subgaussian projections <X, theta>.
//
// The walk keeps a fractional coloring x in [-1,1]^n. Each step fixes a pivot
// (highest-priority live coordinate), picks the update direction u with
// u_pivot = 1, u_frozen = 0 minimizing |V u|, and moves x by +delta_plus or
// -delta_minus (chosen so that E[x] is preserved) until some coordinate hits
// +-1. The direction depends on the vectors only through their Gram matrix,
// so the solve runs on (G_AA + ridge*I)^{-1} kept current by rank-one
// downdates as coordinates freeze. The ridge makes the minimizer unique when
// the live vectors are linearly dependent; it is equivalent to running the
// walk on the vectors stacked with sqrt(ridge) * e_i.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "discoreset/errors.hpp"
#include "discoreset/kernel.hpp"
#include "discoreset/rng.hpp"

namespace discoreset {

inline constexpr double kWalkNormSlack = 1e-9;

struct WalkInput {
  Eigen::MatrixXd vectors;  // one column per element
  std::uint64_t rng_seed = 0;
};

struct WalkOptions {
  double ridge = 1e-8;         // relative to the largest squared norm
  int refresh_every = 64;      // rebuild the inverse after this many freezes
  std::vector<std::size_t> priority;  // pivot priority per column; empty = column index
};

struct WalkOutput {
  Coloring signs;
  std::size_t steps = 0;
  Eigen::VectorXd sum;  // X = sum_i sigma_i v_i
};

namespace detail {

class ActiveInverse {
 public:
  ActiveInverse(const Eigen::MatrixXd& gram, double ridge) : gram_(gram), ridge_(ridge) {}

  void reset(std::vector<Eigen::Index> active) {
    active_ = std::move(active);
    rebuild();
  }

  void rebuild() {
    const auto k = static_cast<Eigen::Index>(active_.size());
    Eigen::MatrixXd h(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) h(a, b) = gram_(active_[a], active_[b]);
      h(a, a) += ridge_;
    }
    inv_ = h.llt().solve(Eigen::MatrixXd::Identity(k, k));
  }

  const std::vector<Eigen::Index>& active() const { return active_; }
  bool empty() const { return active_.empty(); }

  /// Coefficients on the active set for direction with u_pivot = 1.
  Eigen::VectorXd direction(Eigen::Index pivot) const {
    const auto k = static_cast<Eigen::Index>(active_.size());
    Eigen::VectorXd b(k);
    for (Eigen::Index a = 0; a < k; ++a) b(a) = gram_(active_[a], pivot);
    return -(inv_ * b);
  }

  void remove(Eigen::Index element) {
    const auto it = std::find(active_.begin(), active_.end(), element);
    if (it == active_.end()) return;
    const auto pos = static_cast<Eigen::Index>(it - active_.begin());
    const auto last = static_cast<Eigen::Index>(active_.size()) - 1;
    if (pos != last) {
      std::swap(active_[pos], active_[last]);
      inv_.row(pos).swap(inv_.row(last));
      inv_.col(pos).swap(inv_.col(last));
    }
    if (last > 0) {
      const Eigen::VectorXd c = inv_.col(last).head(last);
      const double h = inv_(last, last);
      Eigen::MatrixXd next = inv_.topLeftCorner(last, last);
      next.noalias() -= (c * c.transpose()) / h;
      inv_ = std::move(next);
    } else {
      inv_.resize(0, 0);
    }
    active_.pop_back();
  }

 private:
  const Eigen::MatrixXd& gram_;
  double ridge_;
  std::vector<Eigen::Index> active_;
  Eigen::MatrixXd inv_;
};

}  // namespace detail

inline WalkOutput gsw_color(const WalkInput& input, const WalkOptions& options = {}) {
  const Eigen::MatrixXd& v = input.vectors;
  const Eigen::Index n = v.cols();
  WalkOutput out;
  if (n == 0) {
    out.sum = Eigen::VectorXd::Zero(v.rows());
    return out;
  }
  const Eigen::VectorXd norms = v.colwise().norm().transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(norms(i) <= 1.0 + kWalkNormSlack)) {
      throw ValidationError("gsw_color: vector " + std::to_string(i) + " has norm " + std::to_string(norms(i)) +
                            " > 1");
    }
  }
  std::vector<std::size_t> rank = options.priority;
  if (rank.empty()) {
    rank.resize(static_cast<std::size_t>(n));
    std::iota(rank.begin(), rank.end(), std::size_t{0});
  }
  detail::require(rank.size() == static_cast<std::size_t>(n), "gsw_color: priority length mismatch");

  const Eigen::MatrixXd gram = v.transpose() * v;
  const double scale = std::max(gram.diagonal().maxCoeff(), std::numeric_limits<double>::min());
  detail::ActiveInverse inv(gram, options.ridge * scale);

  CounterRng rng(input.rng_seed);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> alive(static_cast<std::size_t>(n), true);

  auto by_priority = [&](Eigen::Index a, Eigen::Index b) {
    return rank[static_cast<std::size_t>(a)] > rank[static_cast<std::size_t>(b)];
  };
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), by_priority);

  Eigen::Index pivot = order.front();
  inv.reset(std::vector<Eigen::Index>(order.begin() + 1, order.end()));

  std::size_t live = static_cast<std::size_t>(n);
  int since_refresh = 0;
  constexpr double kSnap = 1e-12;

  while (live > 0) {
    if (!alive[static_cast<std::size_t>(pivot)]) {
      const auto& act = inv.active();
      pivot = *std::min_element(act.begin(), act.end(), by_priority);
      inv.remove(pivot);
    }
    const Eigen::VectorXd coef = inv.direction(pivot);
    const auto& act = inv.active();

    // Largest moves in each direction that keep x inside the cube.
    double dplus = (1.0 - x(pivot));
    double dminus = (1.0 + x(pivot));
    for (std::size_t a = 0; a < act.size(); ++a) {
      const double u = coef(static_cast<Eigen::Index>(a));
      const double xi = x(act[a]);
      if (u > 0.0) {
        dplus = std::min(dplus, (1.0 - xi) / u);
        dminus = std::min(dminus, (1.0 + xi) / u);
      } else if (u < 0.0) {
        dplus = std::min(dplus, (1.0 + xi) / -u);
        dminus = std::min(dminus, (1.0 - xi) / -u);
      }
    }
    const double delta = rng.uniform01() < dminus / (dplus + dminus) ? dplus : -dminus;

    x(pivot) += delta;
    for (std::size_t a = 0; a < act.size(); ++a) x(act[a]) += delta * coef(static_cast<Eigen::Index>(a));
    ++out.steps;
    if (out.steps > 2 * static_cast<std::size_t>(n)) {
      throw std::logic_error("gsw_color: walk exceeded 2n steps");
    }

    // Freeze everything that reached the boundary (at least one coordinate does).
    std::vector<Eigen::Index> frozen;
    auto try_freeze = [&](Eigen::Index i) {
      if (std::abs(x(i)) >= 1.0 - kSnap) {
        x(i) = x(i) > 0.0 ? 1.0 : -1.0;
        alive[static_cast<std::size_t>(i)] = false;
        frozen.push_back(i);
      }
    };
    try_freeze(pivot);
    for (Eigen::Index i : act) try_freeze(i);
    if (frozen.empty()) {
      // Rounding kept the limiting coordinate a hair inside; snap the closest one.
      Eigen::Index best = pivot;
      double gap = 1.0 - std::abs(x(pivot));
      for (Eigen::Index i : act) {
        if (1.0 - std::abs(x(i)) < gap) {
          gap = 1.0 - std::abs(x(i));
          best = i;
        }
      }
      x(best) = x(best) > 0.0 ? 1.0 : -1.0;
      alive[static_cast<std::size_t>(best)] = false;
      frozen.push_back(best);
    }
    for (Eigen::Index i : frozen) {
      if (i != pivot) inv.remove(i);
    }
    live -= frozen.size();
    since_refresh += static_cast<int>(frozen.size());
    if (since_refresh >= options.refresh_every && !inv.empty()) {
      inv.rebuild();
      since_refresh = 0;
    }
  }

  std::vector<int> signs(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) signs[static_cast<std::size_t>(i)] = x(i) > 0.0 ? 1 : -1;
  out.signs = Coloring(std::move(signs));
  out.sum = v * out.signs.as_vector();
  return out;
}

struct TailRow {
  double alpha = 0.0;
  std::size_t exceed = 0;
  std::size_t total = 0;
  double frequency = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
};

struct TailTable {
  std::vector<TailRow> rows;
  double max_abs_projection = 0.0;
  bool exact_signs = true;  // every output entry was exactly +1 or -1
};

/// Wilson score interval for k successes out of n at normal quantile z.
inline std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Empirical Pr[|<X, theta>| > alpha] over `trials` seeded walks and
/// `directions` random unit vectors theta (fixed across trials).
inline TailTable subgaussian_audit(const Eigen::MatrixXd& vectors, std::size_t trials, const std::vector<double>& alphas,
                                   std::size_t directions = 50, std::uint64_t seed = 0,
                                   const WalkOptions& options = {}) {
  detail::require(trials >= 100, "subgaussian_audit: need at least 100 trials");
  detail::require(directions >= 1, "subgaussian_audit: need at least one direction");
  CounterRng rng(seed);
  CounterRng dir_rng = rng.split(0xd1);
  Eigen::MatrixXd thetas(vectors.rows(), static_cast<Eigen::Index>(directions));
  for (Eigen::Index c = 0; c < thetas.cols(); ++c) {
    do {
      for (Eigen::Index r = 0; r < thetas.rows(); ++r) thetas(r, c) = dir_rng.normal();
    } while (thetas.col(c).norm() == 0.0);
    thetas.col(c).normalize();
  }

  TailTable table;
  table.rows.resize(alphas.size());
  for (std::size_t a = 0; a < alphas.size(); ++a) table.rows[a].alpha = alphas[a];
  for (std::size_t t = 0; t < trials; ++t) {
    const auto out = gsw_color(WalkInput{vectors, rng.split(t + 1).key()}, options);
    for (int sgn : out.signs.signs()) table.exact_signs = table.exact_signs && (sgn == 1 || sgn == -1);
    const Eigen::VectorXd proj = (thetas.transpose() * out.sum).cwiseAbs();
    table.max_abs_projection = std::max(table.max_abs_projection, proj.maxCoeff());
    for (auto& row : table.rows) {
      for (Eigen::Index c = 0; c < proj.size(); ++c) row.exceed += proj(c) > row.alpha;
      row.total += static_cast<std::size_t>(proj.size());
    }
  }
  for (auto& row : table.rows) {
    row.frequency = static_cast<double>(row.exceed) / static_cast<double>(row.total);
    std::tie(row.wilson_low, row.wilson_high) = wilson_interval(row.exceed, row.total);
  }
  return table;
}

}  // namespace discoreset
