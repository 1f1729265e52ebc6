#pragma once

// Multi-scale verification schedule: the iterated-log depth, the shrinking
// radii n_0 > n_1 > ... > n_ell, the lattice grids S_i on which a coloring is
// checked, and the per-level thresholds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "discoreset/errors.hpp"
#include "discoreset/kernel.hpp"

namespace discoreset {

/// Below this cell size the schedule degenerates to a single fallback grid.
inline constexpr long long kScheduleMinN = 16;

struct Constants {
  double c0 = 0.5;     // grid cell width is 1/(c0 * n_i)
  double c1 = 10.0;    // grid threshold multiplier
  double c_big = 47.0; // bound on |sum sigma| before the balance flip
  bool strict = false;
};

/// Calibrated defaults. c0 is far below the proofs' 20d so that grids stay
/// enumerable; thresholds c1, c_big were tuned for a low retry rate in d <= 2.
inline Constants default_constants(int /*dim*/) { return Constants{}; }

/// Proof-faithful constants: c0 = 20d, c_big >= max(e^{2d^2}, 4 c1 + 7).
/// Grids get enormous quickly; intended for small d and small cells only.
inline Constants strict_constants(int dim) {
  Constants c;
  c.c0 = 20.0 * dim;
  c.c1 = std::max(Constants{}.c1, c.c0 + 1.0);
  c.c_big = std::max(std::exp(2.0 * dim * dim), 4.0 * c.c1 + 7.0);
  c.strict = true;
  return c;
}

/// ilog(k, n) = log(log(...log(n))) with k natural logs. nullopt when an
/// intermediate value is non-positive before all k logs were applied.
inline std::optional<double> ilog(int k, double n) {
  detail::require(k >= 0, "ilog: k must be nonnegative");
  double v = n;
  for (int t = 0; t < k; ++t) {
    if (!(v > 0.0)) return std::nullopt;
    v = std::log(v);
  }
  return v;
}

/// ell(n) = max(k - 3, 0) for the smallest k with ilog(k, n) < 0.
inline int ell(long long n) {
  detail::require(n >= 2, "ell: n must be at least 2");
  for (int k = 0;; ++k) {
    const auto v = ilog(k, static_cast<double>(n));
    if (v && *v < 0.0) return std::max(k - 3, 0);
  }
}

/// [n_0, ..., n_ell] with n_0 = ln^2 n, n_1 = sqrt(3 ln n) + 3 and
/// n_{i+1} = sqrt(3 * 2^{ell-i} * ln n_i). nullopt for n below kScheduleMinN.
inline std::optional<std::vector<double>> n_sequence(long long n) {
  if (n < kScheduleMinN) return std::nullopt;
  const int depth = std::max(ell(n), 1);
  const double ln = std::log(static_cast<double>(n));
  std::vector<double> seq{ln * ln, std::sqrt(3.0 * ln) + 3.0};
  for (int i = 1; i < depth; ++i) {
    seq.push_back(std::sqrt(3.0 * std::ldexp(1.0, depth - i) * std::log(seq.back())));
  }
  return seq;
}

/// Lattice {center + width * (i_1..i_d) : |width * i_j| <= radius}.
struct Grid {
  double width = 1.0;
  double radius = 0.0;
  int dim = 1;
  Point center;

  std::int64_t steps_per_side() const { return static_cast<std::int64_t>(std::floor(radius / width + 1e-9)); }

  LatticeAxes axes() const {
    const auto k = steps_per_side();
    LatticeAxes lat;
    for (int j = 0; j < dim; ++j) {
      Eigen::VectorXd axis(2 * k + 1);
      for (std::int64_t i = -k; i <= k; ++i) axis(i + k) = center(j) + width * static_cast<double>(i);
      lat.axes.push_back(std::move(axis));
    }
    return lat;
  }

  double count() const { return std::pow(static_cast<double>(2 * steps_per_side() + 1), dim); }
  double count_bound() const { return std::pow(2.0 * radius / width + 1.0, dim); }
};

struct GridSchedule {
  long long n = 0;
  int dim = 1;
  int ell = 0;
  bool degenerate = false;
  std::vector<double> seq;     // n_0 .. n_ell
  Constants constants;
  std::vector<double> d_seq;   // D_1 .. D_ell
  std::vector<double> i_seq;   // I_1 .. I_ell
  std::vector<Grid> grids;     // S_0 .. S_{ell-1}

  double n_at(int i) const { return seq.at(static_cast<std::size_t>(i)); }
  double d_at(int i) const { return d_seq.at(static_cast<std::size_t>(i - 1)); }
  double i_at(int i) const { return i_seq.at(static_cast<std::size_t>(i - 1)); }

  /// c1 * n_{level+1} * exp(-(2/3) |s - center|^2).
  double threshold_at(int level, const Point& s) const {
    detail::require(level >= 0 && level < ell, "threshold_at: level " + std::to_string(level) + " out of range");
    const auto& g = grids[static_cast<std::size_t>(level)];
    detail::require(s.size() == g.dim, "threshold_at: dimension mismatch");
    return constants.c1 * n_at(level + 1) * std::exp(-2.0 / 3.0 * (s - g.center).squaredNorm());
  }
};

inline GridSchedule build_schedule(long long n, int dim, std::optional<Constants> constants = std::nullopt,
                                   const Point* center = nullptr) {
  detail::require(n >= 1, "build_schedule: n must be positive");
  detail::require(dim >= 1, "build_schedule: dimension must be positive");
  GridSchedule s;
  s.n = n;
  s.dim = dim;
  s.constants = constants.value_or(default_constants(dim));
  detail::require(s.constants.c0 > 0 && s.constants.c1 > 0 && s.constants.c_big > 0,
                  "build_schedule: constants must be positive");

  if (auto seq = n_sequence(n)) {
    s.seq = std::move(*seq);
    s.ell = static_cast<int>(s.seq.size()) - 1;
  } else {
    const double n_floor = static_cast<double>(kScheduleMinN);
    s.degenerate = true;
    s.ell = 1;
    s.seq = {n_floor, std::sqrt(3.0 * std::log(n_floor)) + 3.0};
  }

  const Point origin = center ? *center : Point::Zero(dim);
  detail::require(origin.size() == dim, "build_schedule: center dimension mismatch");
  for (int i = 0; i < s.ell; ++i) {
    s.grids.push_back(Grid{1.0 / (s.constants.c0 * s.seq[static_cast<std::size_t>(i)]),
                           s.seq[static_cast<std::size_t>(i) + 1], dim, origin});
  }
  for (int i = 1; i <= s.ell; ++i) {
    s.d_seq.push_back(s.constants.c_big * 1.25 * (1.0 - std::pow(5.0, -i)));
    s.i_seq.push_back(1.0 / 3.0 + (1.0 - std::ldexp(1.0, -(s.ell - i))) / 3.0);
  }
  return s;
}

}  // namespace discoreset
