#include <gtest/gtest.h>

#include <cmath>

#include "discoreset/kernel.hpp"
#include "helpers.hpp"

using namespace discoreset;
using namespace testing_support;

namespace {

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p(i++) = x;
  return p;
}

}  // namespace

TEST(Gauss, ClosedFormValues) {
  EXPECT_EQ(gauss(pt({0.3, -1.2}), pt({0.3, -1.2})), 1.0);
  EXPECT_NEAR(gauss(pt({0.0}), pt({std::sqrt(std::log(2.0))})), 0.5, 1e-15);
  EXPECT_NEAR(gauss(pt({0.0, 0.0}), pt({1.0, 1.0})), 0.1353352832366127, 1e-15);
}

TEST(Gauss, SymmetricAndInRange) {
  const PointSet p = uniform_box(50, 3, 4.0, 1);
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    const double a = gauss(p.point(i), p.point(i + 1));
    EXPECT_EQ(a, gauss(p.point(i + 1), p.point(i)));
    EXPECT_GT(a, 0.0);
    EXPECT_LE(a, 1.0);
  }
}

TEST(Gauss, DimensionMismatchThrows) { EXPECT_THROW(gauss(pt({0.0}), pt({0.0, 1.0})), ValidationError); }

TEST(Kde, ForcedValues) {
  const PointSet single = PointSet::from_rows({{0.4, 0.1}});
  EXPECT_EQ(kde(single, pt({0.4, 0.1})), 1.0);
  const PointSet dup = PointSet::from_rows({{0.5}, {0.5}});
  EXPECT_NEAR(kde(dup, pt({1.7})), gauss(pt({1.7}), pt({0.5})), 1e-16);
  const PointSet two = PointSet::from_rows({{0.0}, {std::sqrt(std::log(2.0))}});
  EXPECT_NEAR(kde(two, pt({0.0})), 0.75, 1e-15);
}

TEST(Kde, EmptyThrows) { EXPECT_THROW(kde(PointSet(2), pt({0.0, 0.0})), ValidationError); }

TEST(SignedDiscrepancy, SinglePointAndCancellation) {
  const PointSet one = PointSet::from_rows({{0.2, 0.3}});
  const Point x = pt({1.0, -0.5});
  EXPECT_EQ(std::abs(signed_discrepancy(one, Coloring({-1}), x)), gauss(x, one.point(0)));
  const PointSet dup = PointSet::from_rows({{0.2, 0.3}, {0.2, 0.3}});
  EXPECT_EQ(signed_discrepancy(dup, Coloring({1, -1}), x), 0.0);
}

TEST(SignedDiscrepancy, MatchesNaiveLoop) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const PointSet p = uniform_box(8, 2, 1.0, s);
    const Coloring sigma = random_coloring(8, s + 100);
    const PointSet xs = uniform_box(5, 2, 3.0, s + 200);
    for (std::size_t q = 0; q < xs.size(); ++q) {
      EXPECT_NEAR(signed_discrepancy(p, sigma, xs.point(q)), naive_discrepancy(p, sigma, as_std(xs.point(q))), 1e-12);
    }
  }
}

TEST(SignedDiscrepancy, AntisymmetryAndTriangleBound) {
  const PointSet p = uniform_box(40, 2, 1.0, 5);
  const Coloring sigma = random_coloring(40, 6);
  const PointSet xs = uniform_box(30, 2, 3.0, 7);
  for (std::size_t q = 0; q < xs.size(); ++q) {
    const Point x = xs.point(q);
    EXPECT_EQ(signed_discrepancy(p, sigma.negated(), x), -signed_discrepancy(p, sigma, x));
    double mx = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) mx = std::max(mx, gauss(x, p.point(i)));
    EXPECT_LE(std::abs(signed_discrepancy(p, sigma, x)), p.size() * mx);
  }
}

TEST(SignedDiscrepancy, LengthMismatchThrows) {
  EXPECT_THROW(signed_discrepancy(uniform_box(3, 1, 1.0, 1), Coloring({1, -1}), pt({0.0})), ValidationError);
}

TEST(SignedDiscrepancy, CompensatedPathMatchesLongDouble) {
  const std::size_t n = 5000;
  const PointSet p = uniform_box(n, 1, 1.0, 11);
  const Coloring sigma = random_coloring(n, 12);
  const Point x = pt({0.3});
  long double ref = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const long double d = static_cast<long double>(x(0)) - p.coords()(static_cast<Eigen::Index>(i), 0);
    ref += sigma[i] * std::exp(-d * d);
  }
  EXPECT_NEAR(signed_discrepancy(p, sigma, x), static_cast<double>(ref), 1e-12);
}

TEST(KdeBatch, MatchesPerPointLoop) {
  const PointSet p = uniform_box(30, 3, 1.0, 21);
  const PointSet xs = uniform_box(17, 3, 2.0, 22);
  const Eigen::VectorXd out = kde_batch(p, xs);
  ASSERT_EQ(out.size(), 17);
  for (std::size_t q = 0; q < xs.size(); ++q) EXPECT_NEAR(out(static_cast<Eigen::Index>(q)), kde(p, xs.point(q)), 1e-12);
  EXPECT_EQ(kde_batch(p, PointSet(3)).size(), 0);
  const PointSet one = PointSet::from_rows({{1.0, 2.0}});
  EXPECT_EQ(kde_batch(one, one)(0), 1.0);
}

TEST(PointSet, RejectsNonFiniteAndRaggedRows) {
  Eigen::MatrixXd m(2, 2);
  m << 0.0, 1.0, std::nan(""), 0.0;
  EXPECT_THROW(PointSet{m}, ValidationError);
  EXPECT_THROW(PointSet::from_rows({{0.0, 1.0}, {1.0}}), ValidationError);
}

TEST(Coloring, RejectsNonSigns) { EXPECT_THROW(Coloring({1, 0, -1}), ValidationError); }

TEST(LatticeSummer, MatchesNaiveInEveryDimension) {
  for (int d = 1; d <= 4; ++d) {
    const PointSet p = uniform_box(13, d, 1.0, 30 + d);
    const Coloring sigma = random_coloring(13, 40 + d);
    LatticeAxes lat;
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXd axis(3 + j);
      for (Eigen::Index k = 0; k < axis.size(); ++k) axis(k) = -1.5 + 0.7 * static_cast<double>(k) + 0.1 * j;
      lat.axes.push_back(axis);
    }
    const Eigen::VectorXd sums = lattice_sums(p, sigma.as_vector(), lat);
    ASSERT_EQ(static_cast<std::size_t>(sums.size()), lat.count());
    for (std::size_t k = 0; k < lat.count(); ++k) {
      EXPECT_NEAR(sums(static_cast<Eigen::Index>(k)), naive_discrepancy(p, sigma, as_std(lat.point(k))), 1e-12);
    }
  }
}
