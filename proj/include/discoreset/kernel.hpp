#pragma once

// Gaussian kernel e^{-|x-y|^2} (unit bandwidth), kernel density estimates and
// signed discrepancy sums. Callers apply a bandwidth h by scaling coordinates by 1/h.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "discoreset/errors.hpp"

namespace discoreset {

using Point = Eigen::VectorXd;

/// Finite point set in R^d, stored one point per row.
class PointSet {
 public:
  PointSet() = default;

  /// Empty set of the given dimension.
  explicit PointSet(int dim) : coords_(0, dim) { detail::require(dim > 0, "PointSet: dimension must be positive"); }

  explicit PointSet(Eigen::MatrixXd coords) : coords_(std::move(coords)) {
    detail::require(coords_.cols() > 0, "PointSet: dimension must be positive");
    for (Eigen::Index i = 0; i < coords_.rows(); ++i) {
      for (Eigen::Index j = 0; j < coords_.cols(); ++j) {
        if (!std::isfinite(coords_(i, j))) {
          throw ValidationError("PointSet: non-finite coordinate at point " + std::to_string(i));
        }
      }
    }
  }

  static PointSet from_rows(const std::vector<std::vector<double>>& rows) {
    detail::require(!rows.empty(), "PointSet: no rows");
    const auto d = rows.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      detail::require(rows[i].size() == d, "PointSet: row " + std::to_string(i) + " has inconsistent dimension");
      for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return PointSet(std::move(m));
  }

  std::size_t size() const { return static_cast<std::size_t>(coords_.rows()); }
  int dim() const { return static_cast<int>(coords_.cols()); }
  bool empty() const { return coords_.rows() == 0; }

  Point point(std::size_t i) const { return coords_.row(static_cast<Eigen::Index>(i)).transpose(); }
  auto row(std::size_t i) const { return coords_.row(static_cast<Eigen::Index>(i)); }
  const Eigen::MatrixXd& coords() const { return coords_; }

  PointSet subset(std::span<const std::size_t> indices) const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(indices.size()), coords_.cols());
    for (std::size_t k = 0; k < indices.size(); ++k) {
      detail::require(indices[k] < size(), "PointSet::subset: index out of range");
      m.row(static_cast<Eigen::Index>(k)) = coords_.row(static_cast<Eigen::Index>(indices[k]));
    }
    return PointSet(std::move(m));
  }

  /// Copy with every point shifted by -offset.
  PointSet translated(const Point& offset) const {
    detail::require(offset.size() == coords_.cols(), "PointSet::translated: dimension mismatch");
    Eigen::MatrixXd m = coords_.rowwise() - offset.transpose();
    return PointSet(std::move(m));
  }

 private:
  Eigen::MatrixXd coords_;
};

/// A +-1 assignment over point indices.
class Coloring {
 public:
  Coloring() = default;
  explicit Coloring(std::vector<int> signs) : signs_(std::move(signs)) {
    for (int s : signs_) detail::require(s == 1 || s == -1, "Coloring: entries must be exactly -1 or +1");
  }
  static Coloring all(std::size_t n, int sign) { return Coloring(std::vector<int>(n, sign)); }

  std::size_t size() const { return signs_.size(); }
  int operator[](std::size_t i) const { return signs_[i]; }
  void set(std::size_t i, int sign) {
    detail::require(sign == 1 || sign == -1, "Coloring: entries must be exactly -1 or +1");
    signs_[i] = sign;
  }
  const std::vector<int>& signs() const { return signs_; }

  Coloring negated() const {
    std::vector<int> s(signs_);
    for (int& v : s) v = -v;
    return Coloring(std::move(s));
  }

  /// Sum of signs, i.e. #(+1) - #(-1).
  long imbalance() const {
    long acc = 0;
    for (int s : signs_) acc += s;
    return acc;
  }

  Eigen::VectorXd as_vector() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(signs_.size()));
    for (std::size_t i = 0; i < signs_.size(); ++i) v(static_cast<Eigen::Index>(i)) = signs_[i];
    return v;
  }

  bool operator==(const Coloring&) const = default;

 private:
  std::vector<int> signs_;
};

namespace detail {

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline constexpr std::size_t kCompensateAbove = 1024;

template <class Term>
double accumulate(std::size_t n, Term&& term) {
  if (n > kCompensateAbove) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(term(i));
    return acc.value();
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += term(i);
  return acc;
}

template <class A, class B>
double squared_distance(const A& x, const B& y) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double diff = x(j) - y(j);
    acc += diff * diff;
  }
  return acc;
}

}  // namespace detail

inline double gauss(const Point& x, const Point& y) {
  detail::require(x.size() == y.size(), "gauss: dimension mismatch");
  return std::exp(-detail::squared_distance(x, y));
}

inline double kde(const PointSet& points, const Point& x) {
  detail::require(!points.empty(), "kde: empty point set");
  detail::require(x.size() == points.dim(), "kde: dimension mismatch");
  const double total = detail::accumulate(points.size(), [&](std::size_t i) {
    return std::exp(-detail::squared_distance(points.row(i), x));
  });
  return total / static_cast<double>(points.size());
}

/// D(x) = sum_p sigma(p) e^{-|x-p|^2}.
inline double signed_discrepancy(const PointSet& points, const Coloring& sigma, const Point& x) {
  detail::require(sigma.size() == points.size(), "signed_discrepancy: coloring length mismatch");
  detail::require(points.empty() || x.size() == points.dim(), "signed_discrepancy: dimension mismatch");
  return detail::accumulate(points.size(), [&](std::size_t i) {
    return sigma[i] * std::exp(-detail::squared_distance(points.row(i), x));
  });
}

inline Eigen::VectorXd kde_batch(const PointSet& points, const PointSet& queries) {
  detail::require(!points.empty(), "kde_batch: empty point set");
  Eigen::VectorXd out(static_cast<Eigen::Index>(queries.size()));
  if (queries.empty()) return out;
  detail::require(queries.dim() == points.dim(), "kde_batch: dimension mismatch");
  for (std::size_t q = 0; q < queries.size(); ++q) out(static_cast<Eigen::Index>(q)) = kde(points, queries.point(q));
  return out;
}

/// Per-axis coordinates of an axis-aligned lattice; lattice points are the
/// Cartesian product, flattened row-major (last axis varies fastest).
struct LatticeAxes {
  std::vector<Eigen::VectorXd> axes;

  int dim() const { return static_cast<int>(axes.size()); }
  std::size_t count() const {
    std::size_t c = 1;
    for (const auto& a : axes) c *= static_cast<std::size_t>(a.size());
    return c;
  }
  Point point(std::size_t flat) const {
    Point p(dim());
    for (int j = dim() - 1; j >= 0; --j) {
      const auto len = static_cast<std::size_t>(axes[static_cast<std::size_t>(j)].size());
      p(j) = axes[static_cast<std::size_t>(j)](static_cast<Eigen::Index>(flat % len));
      flat /= len;
    }
    return p;
  }
};

namespace detail {

inline Eigen::MatrixXd axis_factor(const Eigen::MatrixXd& coords, Eigen::Index j, const Eigen::VectorXd& axis) {
  Eigen::MatrixXd f(coords.rows(), axis.size());
  for (Eigen::Index k = 0; k < axis.size(); ++k) {
    for (Eigen::Index p = 0; p < coords.rows(); ++p) {
      const double diff = axis(k) - coords(p, j);
      f(p, k) = std::exp(-diff * diff);
    }
  }
  return f;
}

}  // namespace detail

/// Evaluates sum_p w_p e^{-|s-p|^2} at every lattice point s. The kernel
/// factorizes over coordinates, so the work reduces to one small GEMM per
/// leading multi-index. Precomputing the factors with LatticeSummer lets the
/// same lattice be re-evaluated cheaply for many weight vectors.
class LatticeSummer {
 public:
  LatticeSummer(const PointSet& points, LatticeAxes lattice) : lattice_(std::move(lattice)) {
    detail::require(lattice_.dim() == points.dim(), "LatticeSummer: dimension mismatch");
    n_ = static_cast<Eigen::Index>(points.size());
    factors_.reserve(lattice_.axes.size());
    for (int j = 0; j < lattice_.dim(); ++j) {
      factors_.push_back(detail::axis_factor(points.coords(), j, lattice_.axes[static_cast<std::size_t>(j)]));
    }
  }

  const LatticeAxes& lattice() const { return lattice_; }

  Eigen::VectorXd sums(const Eigen::VectorXd& weights) const {
    detail::require(weights.size() == n_, "LatticeSummer: weight length mismatch");
    Eigen::VectorXd out(static_cast<Eigen::Index>(lattice_.count()));
    const int d = lattice_.dim();
    if (n_ == 0) {
      out.setZero();
      return out;
    }
    if (d == 1) {
      out = factors_[0].transpose() * weights;
      return out;
    }
    const auto& fa = factors_[static_cast<std::size_t>(d - 2)];
    const auto& fb = factors_[static_cast<std::size_t>(d - 1)];
    const Eigen::Index block = fa.cols() * fb.cols();
    std::size_t leading = 1;
    for (int j = 0; j < d - 2; ++j) leading *= static_cast<std::size_t>(factors_[static_cast<std::size_t>(j)].cols());

    std::vector<Eigen::Index> idx(static_cast<std::size_t>(std::max(d - 2, 0)), 0);
    Eigen::VectorXd w(n_);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> tile;
    for (std::size_t lead = 0; lead < leading; ++lead) {
      w = weights;
      for (int j = 0; j < d - 2; ++j) w.array() *= factors_[static_cast<std::size_t>(j)].col(idx[static_cast<std::size_t>(j)]).array();
      tile.noalias() = fa.transpose() * w.asDiagonal() * fb;
      out.segment(static_cast<Eigen::Index>(lead) * block, block) = Eigen::Map<const Eigen::VectorXd>(tile.data(), block);
      for (int j = d - 3; j >= 0; --j) {
        auto& k = idx[static_cast<std::size_t>(j)];
        if (++k < factors_[static_cast<std::size_t>(j)].cols()) break;
        k = 0;
      }
    }
    return out;
  }

 private:
  LatticeAxes lattice_;
  Eigen::Index n_ = 0;
  std::vector<Eigen::MatrixXd> factors_;
};

inline Eigen::VectorXd lattice_sums(const PointSet& points, const Eigen::VectorXd& weights, const LatticeAxes& lattice) {
  return LatticeSummer(points, lattice).sums(weights);
}

}  // namespace discoreset
