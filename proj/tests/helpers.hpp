#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "discoreset/kernel.hpp"
#include "discoreset/rng.hpp"

namespace testing_support {

using discoreset::Coloring;
using discoreset::CounterRng;
using discoreset::PointSet;

inline PointSet uniform_box(std::size_t n, int d, double half_width, std::uint64_t seed) {
  CounterRng rng(seed);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = half_width * (2.0 * rng.uniform01() - 1.0);
  }
  return PointSet(m);
}

inline Coloring random_coloring(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<int> s(n);
  for (auto& v : s) v = rng.below(2) ? 1 : -1;
  return Coloring(s);
}

// Naive double loop, written independently of the library's kernel code.
inline double naive_discrepancy(const PointSet& p, const Coloring& sigma, const std::vector<double>& x) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double diff = x[j] - p.coords()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      sq += diff * diff;
    }
    total += sigma[i] * std::exp(-sq);
  }
  return total;
}

inline std::vector<double> as_std(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace testing_support
