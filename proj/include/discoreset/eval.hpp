#pragma once

// L_inf error between two KDEs on a query lattice, the Taylor truncation
// audit, and per-grid discrepancy tables.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "discoreset/errors.hpp"
#include "discoreset/kernel.hpp"
#include "discoreset/schedule.hpp"

namespace discoreset {

/// sup_t |d/dt e^{-t^2}|; bounds each partial derivative of a KDE.
inline const double kKernelLipschitz = std::sqrt(2.0) * std::exp(-0.5);

struct QueryGridOptions {
  std::optional<double> resolution;    // n_eff; default min(n, 512)
  bool literal_width = false;          // use n_eff = n
  std::size_t max_points = 1u << 20;   // width grows until the lattice fits
};

/// Axis-aligned lattice of global multiples of `width` covering the bounding
/// box of the data expanded by `margin`.
struct QueryGrid {
  LatticeAxes lattice;
  double width = 0.0;
  double margin = 0.0;
  double n_eff = 0.0;
  Point lower;
  Point upper;

  std::size_t count() const { return lattice.count(); }
};

inline QueryGrid make_query_grid(const PointSet& a, const PointSet& b, const QueryGridOptions& options = {}) {
  detail::require(!a.empty() && !b.empty(), "make_query_grid: empty point set");
  detail::require(a.dim() == b.dim(), "make_query_grid: dimension mismatch");
  detail::require(options.max_points >= 1, "make_query_grid: max_points must be positive");
  const int d = a.dim();
  const double n = static_cast<double>(std::max(a.size(), b.size()));

  QueryGrid g;
  g.margin = std::sqrt(3.0 * std::log(std::max(n, 2.0))) + 3.0;
  g.n_eff = options.literal_width ? n : options.resolution.value_or(std::min(n, 512.0));
  detail::require(g.n_eff > 0.0, "make_query_grid: resolution must be positive");
  g.lower = a.coords().colwise().minCoeff().transpose().cwiseMin(b.coords().colwise().minCoeff().transpose());
  g.upper = a.coords().colwise().maxCoeff().transpose().cwiseMax(b.coords().colwise().maxCoeff().transpose());
  g.lower.array() -= g.margin;
  g.upper.array() += g.margin;

  auto steps = [&](double w, int j) {
    return std::ceil(g.upper(j) / w) - std::floor(g.lower(j) / w) + 1.0;
  };
  auto total = [&](double w) {
    double c = 1.0;
    for (int j = 0; j < d; ++j) c *= steps(w, j);
    return c;
  };
  g.width = 1.0 / g.n_eff;
  while (total(g.width) > static_cast<double>(options.max_points)) g.width *= 1.0 + 1.0 / 64.0;

  for (int j = 0; j < d; ++j) {
    const double lo = std::floor(g.lower(j) / g.width);
    const auto len = static_cast<Eigen::Index>(steps(g.width, j));
    Eigen::VectorXd axis(len);
    for (Eigen::Index k = 0; k < len; ++k) axis(k) = (lo + static_cast<double>(k)) * g.width;
    g.lattice.axes.push_back(std::move(axis));
  }
  return g;
}

inline QueryGrid make_query_grid(const PointSet& p, const QueryGridOptions& options = {}) {
  return make_query_grid(p, p, options);
}

struct EvalReport {
  double sup_error = 0.0;  // max over the query lattice; a lower bound on the true sup
  Point argmax_query;
  double discretization_bound = 0.0;  // Lipschitz slack between lattice points
  double tail_bound = 0.0;            // outside the expanded box
  double upper_bound = 0.0;           // max(sup + discretization, tail)
  std::size_t query_count = 0;
  double width = 0.0;
  double runtime_seconds = 0.0;
};

/// KDE of `points` at every lattice point.
inline Eigen::VectorXd kde_on_grid(const PointSet& points, const QueryGrid& grid) {
  detail::require(!points.empty(), "kde_on_grid: empty point set");
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(points.size()),
                                                      1.0 / static_cast<double>(points.size()));
  return LatticeSummer(points, grid.lattice).sums(w);
}

/// Variant reusing a precomputed kde_on_grid(P, grid).
inline EvalReport linf_error_from(const Eigen::VectorXd& kde_p, const PointSet& q, const QueryGrid& grid) {
  const auto t0 = std::chrono::steady_clock::now();
  detail::require(static_cast<std::size_t>(kde_p.size()) == grid.count(), "linf_error: grid size mismatch");
  const Eigen::VectorXd kde_q = kde_on_grid(q, grid);
  EvalReport r;
  Eigen::Index arg = 0;
  r.sup_error = (kde_p - kde_q).cwiseAbs().maxCoeff(&arg);
  r.argmax_query = grid.lattice.point(static_cast<std::size_t>(arg));
  r.query_count = grid.count();
  r.width = grid.width;
  r.discretization_bound = kKernelLipschitz * grid.lattice.dim() * grid.width;
  r.tail_bound = 2.0 * std::exp(-grid.margin * grid.margin);
  r.upper_bound = std::max(r.sup_error + r.discretization_bound, r.tail_bound);
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline EvalReport linf_error(const PointSet& p, const PointSet& q, const QueryGrid& grid) {
  detail::require(!p.empty() && !q.empty(), "linf_error: empty point set");
  detail::require(p.dim() == q.dim() && p.dim() == grid.lattice.dim(), "linf_error: dimension mismatch");
  const auto t0 = std::chrono::steady_clock::now();
  EvalReport r = linf_error_from(kde_on_grid(p, grid), q, grid);
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// rho with rho + 1 = ceil(2 e^2 d (sqrt(3 ln n) + 3) + ln n + 2d).
inline int taylor_degree(std::size_t n, int d) {
  detail::require(n >= 1 && d >= 1, "taylor_degree: n and d must be positive");
  const double ln = std::log(static_cast<double>(n));
  return static_cast<int>(std::ceil(2.0 * std::exp(2.0) * d * (std::sqrt(3.0 * ln) + 3.0) + ln + 2.0 * d)) - 1;
}

/// |sum_p sigma(p) e^{2|p|^2} e^{-|x-3p|^2/3}
///   - e^{-|x|^2/3} sum_p sigma(p) e^{-|p|^2} sum_{k<=rho} (2<x,p>)^k / k!|
inline double truncation_audit(const PointSet& points, const Coloring& sigma, const Point& x, int rho) {
  detail::require(rho >= 0, "truncation_audit: rho must be nonnegative");
  detail::require(sigma.size() == points.size(), "truncation_audit: coloring length mismatch");
  detail::require(x.size() == points.dim(), "truncation_audit: dimension mismatch");
  detail::CompensatedSum exact;
  detail::CompensatedSum series;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point p = points.point(i);
    exact.add(sigma[i] * std::exp(2.0 * p.squaredNorm() - (x - 3.0 * p).squaredNorm() / 3.0));

    const double t = 2.0 * x.dot(p);
    detail::CompensatedSum taylor;
    if (t == 0.0) {
      taylor.add(1.0);
    } else {
      const double lt = std::log(std::abs(t));
      for (int k = 0; k <= rho; ++k) {
        const double mag = std::exp(k * lt - std::lgamma(k + 1.0));
        taylor.add((t < 0.0 && k % 2 == 1) ? -mag : mag);
      }
    }
    series.add(sigma[i] * std::exp(-p.squaredNorm()) * taylor.value());
  }
  return std::abs(exact.value() - std::exp(-x.squaredNorm() / 3.0) * series.value());
}

struct DiscrepancyProfile {
  LatticeAxes lattice;
  Eigen::VectorXd abs_discrepancy;  // |D(s)| per lattice point
  Eigen::VectorXd ratio;            // |D(s)| / threshold(s); empty without a schedule level
  double max_abs = 0.0;
  double max_ratio = 0.0;
};

inline DiscrepancyProfile discrepancy_profile(const PointSet& points, const Coloring& sigma, const LatticeAxes& lattice) {
  detail::require(sigma.size() == points.size(), "discrepancy_profile: coloring length mismatch");
  DiscrepancyProfile prof;
  prof.lattice = lattice;
  prof.abs_discrepancy = LatticeSummer(points, lattice).sums(sigma.as_vector()).cwiseAbs();
  prof.max_abs = prof.abs_discrepancy.size() ? prof.abs_discrepancy.maxCoeff() : 0.0;
  return prof;
}

/// Profile over S_level of the schedule, with threshold ratios.
inline DiscrepancyProfile discrepancy_profile(const PointSet& points, const Coloring& sigma,
                                              const GridSchedule& schedule, int level) {
  detail::require(level >= 0 && level < schedule.ell, "discrepancy_profile: level out of range");
  DiscrepancyProfile prof = discrepancy_profile(points, sigma, schedule.grids[static_cast<std::size_t>(level)].axes());
  prof.ratio.resize(prof.abs_discrepancy.size());
  for (Eigen::Index k = 0; k < prof.ratio.size(); ++k) {
    prof.ratio(k) = prof.abs_discrepancy(k) / schedule.threshold_at(level, prof.lattice.point(static_cast<std::size_t>(k)));
  }
  prof.max_ratio = prof.ratio.size() ? prof.ratio.maxCoeff() : 0.0;
  return prof;
}

}  // namespace discoreset
