#pragma once

// Scaled Gaussian Gram matrix over data points (and optional grid witnesses),
// its PSD factorization into unit-norm feature columns, and the augmented
// walk inputs (1; v_p e^{2|p|^2}) / sqrt(1 + e^{4d}).

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "discoreset/errors.hpp"
#include "discoreset/kernel.hpp"
#include "discoreset/schedule.hpp"

namespace discoreset {

enum class ColumnKind { Data, Witness };

struct GramMatrix {
  Eigen::MatrixXd m;
  std::vector<ColumnKind> labels;  // data columns first, then witnesses
};

struct GramFactor {
  Eigen::MatrixXd columns;  // dim_m x (#data + #witness)
  std::vector<ColumnKind> labels;

  Eigen::Index dim_m() const { return columns.rows(); }
  Eigen::Index data_count() const {
    Eigen::Index c = 0;
    for (auto k : labels) c += (k == ColumnKind::Data);
    return c;
  }
};

struct AugmentedVectors {
  Eigen::MatrixXd vectors;  // (dim_m + 1) x n, one column per data point
};

inline constexpr double kUnitBallSlack = 1e-12;

namespace detail {

inline void require_in_unit_ball(const PointSet& points) {
  const double lim = 1.0 + kUnitBallSlack;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points.row(i).cwiseAbs().maxCoeff() > lim) {
      throw ValidationError("build_gram: point " + std::to_string(i) + " lies outside the unit l_inf ball");
    }
  }
}

}  // namespace detail

/// Entries: e^{-3|p-q|^2} (data/data), e^{-|s/sqrt3 - sqrt3 p|^2} (witness/data),
/// e^{-|s-t|^2/3} (witness/witness).
inline GramMatrix build_gram(const PointSet& data, const PointSet& witnesses) {
  detail::require(!data.empty(), "build_gram: no data points");
  detail::require(witnesses.empty() || witnesses.dim() == data.dim(), "build_gram: witness dimension mismatch");
  detail::require_in_unit_ball(data);

  const double r3 = std::sqrt(3.0);
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto w = static_cast<Eigen::Index>(witnesses.size());
  Eigen::MatrixXd scaled(n + w, data.dim());
  scaled.topRows(n) = r3 * data.coords();
  if (w > 0) scaled.bottomRows(w) = witnesses.coords() / r3;

  GramMatrix g;
  g.m.resize(n + w, n + w);
  for (Eigen::Index a = 0; a < n + w; ++a) {
    g.m(a, a) = 1.0;
    for (Eigen::Index b = 0; b < a; ++b) {
      const double v = std::exp(-(scaled.row(a) - scaled.row(b)).squaredNorm());
      g.m(a, b) = v;
      g.m(b, a) = v;
    }
  }
  g.labels.assign(static_cast<std::size_t>(n), ColumnKind::Data);
  g.labels.insert(g.labels.end(), static_cast<std::size_t>(w), ColumnKind::Witness);
  return g;
}

inline GramMatrix build_gram(const PointSet& data) { return build_gram(data, PointSet(data.dim())); }

/// Enumerates every point of every grid as a witness column.
inline GramMatrix build_gram(const PointSet& data, const std::vector<Grid>& grids) {
  std::vector<std::vector<double>> rows;
  for (const auto& grid : grids) {
    const auto lat = grid.axes();
    for (std::size_t k = 0; k < lat.count(); ++k) {
      const Point p = lat.point(k);
      rows.emplace_back(p.data(), p.data() + p.size());
    }
  }
  return build_gram(data, rows.empty() ? PointSet(data.dim()) : PointSet::from_rows(rows));
}

/// Factor M = U^T U by symmetric eigendecomposition. Eigenvalues in
/// [-tol * lambda_max, 0] are clamped to zero; anything more negative means
/// the matrix was corrupted upstream.
inline GramFactor psd_factor(const GramMatrix& gram, double tol = 1e-8) {
  const auto& m = gram.m;
  detail::require(m.rows() == m.cols() && m.rows() > 0, "psd_factor: matrix must be square and nonempty");
  detail::require(static_cast<std::size_t>(m.rows()) == gram.labels.size(), "psd_factor: label count mismatch");
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  detail::require(asym <= 1e-12, "psd_factor: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) throw NotPsdError("psd_factor: eigendecomposition did not converge");
  const Eigen::VectorXd& vals = eig.eigenvalues();  // ascending
  const double lmax = vals(vals.size() - 1);
  if (vals(0) < -tol * std::max(lmax, 1.0)) {
    throw NotPsdError("psd_factor: matrix is not positive semidefinite (min eigenvalue " + std::to_string(vals(0)) +
                      ", max " + std::to_string(lmax) + ")");
  }
  Eigen::Index first = 0;
  while (first < vals.size() && vals(first) <= 0.0) ++first;
  const Eigen::Index rank = vals.size() - first;

  GramFactor f;
  f.labels = gram.labels;
  f.columns = vals.tail(rank).cwiseSqrt().asDiagonal() * eig.eigenvectors().rightCols(rank).transpose();
  return f;
}

/// One column per data point: (1; v_p * e^{2|p|^2}) / sqrt(1 + e^{4d}).
inline AugmentedVectors augment(const GramFactor& factor, const PointSet& data, int dim) {
  detail::require(dim == data.dim(), "augment: dimension mismatch");
  detail::require(factor.data_count() == static_cast<Eigen::Index>(data.size()), "augment: data column count mismatch");
  const double norm = std::sqrt(1.0 + std::exp(4.0 * dim));
  AugmentedVectors out;
  out.vectors.resize(factor.dim_m() + 1, static_cast<Eigen::Index>(data.size()));
  Eigen::Index p = 0;
  for (std::size_t c = 0; c < factor.labels.size(); ++c) {
    if (factor.labels[c] != ColumnKind::Data) continue;
    const double scale = std::exp(2.0 * data.row(static_cast<std::size_t>(p)).squaredNorm());
    out.vectors(0, p) = 1.0 / norm;
    out.vectors.col(p).tail(factor.dim_m()) = factor.columns.col(static_cast<Eigen::Index>(c)) * (scale / norm);
    ++p;
  }
  return out;
}

}  // namespace discoreset
