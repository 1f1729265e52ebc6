#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "discoreset/colorizer.hpp"
#include "helpers.hpp"

using namespace discoreset;
using namespace testing_support;

namespace {

// Rechecks a coloring on every grid point with the naive double loop.
bool naive_verify(const PointSet& centered, const Coloring& sigma, const GridSchedule& s) {
  for (int level = 0; level < s.ell; ++level) {
    const auto lat = s.grids[static_cast<std::size_t>(level)].axes();
    for (std::size_t k = 0; k < lat.count(); ++k) {
      const Point x = lat.point(k);
      if (!(std::abs(naive_discrepancy(centered, sigma, as_std(x))) < s.threshold_at(level, x))) return false;
    }
  }
  return std::abs(sigma.imbalance()) <= s.constants.c_big;
}

CellAssignment whole(const PointSet& p) {
  CellAssignment c{Point::Zero(p.dim()), {}};
  for (std::size_t i = 0; i < p.size(); ++i) c.members.push_back(i);
  return c;
}

}  // namespace

TEST(Partition, UnitBoxIsOneCell) {
  const auto cells = partition(uniform_box(40, 2, 1.0, 1));
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].center, Point::Zero(2));
  EXPECT_EQ(cells[0].members.size(), 40u);
}

TEST(Partition, TieGoesToSmallerCenter) {
  const auto cells = partition(PointSet::from_rows({{1.0, 0.0}, {-1.0, 3.0}}));
  ASSERT_EQ(cells.size(), 2u);
  Point a(2), b(2);
  a << -2.0, 2.0;
  b << 0.0, 0.0;
  EXPECT_EQ(cells[0].center, a);
  EXPECT_EQ(cells[1].center, b);
}

TEST(Partition, CoversDisjointAndWithinOne) {
  const PointSet p = uniform_box(500, 2, 10.0, 2);
  const auto cells = partition(p);
  std::set<std::size_t> seen;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k > 0) {
      const auto& prev = cells[k - 1].center;
      EXPECT_TRUE(std::lexicographical_compare(prev.data(), prev.data() + 2, cells[k].center.data(),
                                               cells[k].center.data() + 2));
    }
    for (std::size_t m : cells[k].members) {
      EXPECT_TRUE(seen.insert(m).second);
      EXPECT_LE((p.point(m) - cells[k].center).cwiseAbs().maxCoeff(), 1.0 + 1e-12);
    }
  }
  EXPECT_EQ(seen.size(), p.size());
}

TEST(Verify, DuplicatesPassAndAllPlusFails) {
  const PointSet dup = PointSet::from_rows({{0.1, 0.1}, {0.1, 0.1}});
  EXPECT_TRUE(verify(dup, Coloring({1, -1}), build_schedule(2, 2)).pass);

  CounterRng rng(4);
  Eigen::MatrixXd m(1000, 2);
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) << 0.05 * rng.uniform01(), 0.05 * rng.uniform01();
  const PointSet clustered(m);
  const auto r = verify(clustered, Coloring(std::vector<int>(1000, 1)), build_schedule(1000, 2));
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.balance_ok);
  EXPECT_GT(r.max_grid_ratio, 1.0);
}

TEST(Verify, AgreesWithNaiveRecheck) {
  Constants tight;
  tight.c1 = 2.0;  // makes both outcomes common
  for (std::uint64_t s = 0; s < 30; ++s) {
    const PointSet p = uniform_box(40, 1 + static_cast<int>(s % 2), 1.0, s);
    const auto sched = build_schedule(40, p.dim(), tight);
    const Coloring sigma = random_coloring(40, s + 50);
    EXPECT_EQ(verify(p, sigma, sched).pass, naive_verify(p, sigma, sched)) << "seed " << s;
  }
}

TEST(Verify, RejectsUncenteredOrMismatched) {
  const PointSet p = PointSet::from_rows({{1.5}});
  EXPECT_THROW(verify(p, Coloring({1}), build_schedule(1, 1)), ValidationError);
  EXPECT_THROW(verify(PointSet::from_rows({{0.5}}), Coloring({1}), build_schedule(1, 2)), ValidationError);
}

TEST(ColorCell, TinyCellsBypassWalk) {
  const PointSet one = PointSet::from_rows({{0.3, -0.2}});
  const auto r1 = color_cell(whole(one), one, 1);
  EXPECT_TRUE(r1.bypassed);
  EXPECT_EQ(r1.coloring.size(), 1u);
  EXPECT_EQ(r1.attempts, 0u);

  const PointSet dup = PointSet::from_rows({{0.3, -0.2}, {0.3, -0.2}});
  const auto r2 = color_cell(whole(dup), dup, 1);
  EXPECT_EQ(r2.coloring.imbalance(), 0);
  EXPECT_EQ(r2.max_grid_ratio, 0.0);
}

TEST(ColorCell, AcceptedColoringPassesNaiveRecheckAndBalances) {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const std::size_t n = 30 + 17 * s;
    const PointSet p = uniform_box(n, 2, 1.0, s);
    const auto rep = color_cell(whole(p), p, s);
    const auto sched = build_schedule(static_cast<long long>(n), 2);
    EXPECT_TRUE(naive_verify(p, rep.walk_coloring, sched));
    EXPECT_LT(rep.max_grid_ratio, 1.0);
    EXPECT_LE(std::abs(rep.coloring.imbalance()), 1);
    EXPECT_LE(rep.flipped, static_cast<std::size_t>(std::ceil(sched.constants.c_big / 2.0)) + 1);
    EXPECT_EQ(rep.retries + 1, rep.attempts);
  }
}

TEST(ColorCell, FlipPerturbationBound) {
  for (std::uint64_t s = 0; s < 6; ++s) {
    const PointSet p = uniform_box(101, 2, 1.0, 70 + s);
    const auto rep = color_cell(whole(p), p, s);
    const auto sched = build_schedule(101, 2);
    for (int level = 0; level < sched.ell; ++level) {
      const auto lat = sched.grids[static_cast<std::size_t>(level)].axes();
      for (std::size_t k = 0; k < lat.count(); k += 7) {
        const Point x = lat.point(k);
        double kmax = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) kmax = std::max(kmax, gauss(x, p.point(i)));
        const double delta =
            std::abs(signed_discrepancy(p, rep.coloring, x) - signed_discrepancy(p, rep.walk_coloring, x));
        EXPECT_LE(delta, rep.flipped * 2.0 * kmax + 1e-12);
      }
    }
  }
}

TEST(ColorCell, DeterministicForSeed) {
  const PointSet p = uniform_box(120, 2, 1.0, 9);
  const auto a = color_cell(whole(p), p, 42);
  const auto b = color_cell(whole(p), p, 42);
  EXPECT_EQ(a.coloring, b.coloring);
  EXPECT_EQ(a.attempts, b.attempts);
  EXPECT_EQ(a.max_grid_ratio, b.max_grid_ratio);
}

TEST(ColorCell, BudgetExhaustionReportsConstants) {
  const PointSet p = uniform_box(64, 2, 1.0, 3);
  ColorizerOptions opt;
  opt.constants = Constants{0.5, 1e-6, 47.0, false};
  opt.retry_budget = 2;
  try {
    color_cell(whole(p), p, 1, opt);
    FAIL() << "expected ColoringFailure";
  } catch (const ColoringFailure& e) {
    EXPECT_NE(std::string(e.what()).find("c1=1e-06"), std::string::npos);
  }
}

TEST(BalanceFlip, LowestIndexFirst) {
  std::vector<int> s{1, 1, -1, 1, 1};
  EXPECT_EQ(detail::balance_flip(s, 1), 1u);
  EXPECT_EQ(s, (std::vector<int>{-1, 1, -1, 1, 1}));
  std::vector<int> t{-1, -1, -1, 1};
  EXPECT_EQ(detail::balance_flip(t, 1), 1u);
  EXPECT_EQ(t, (std::vector<int>{1, -1, -1, 1}));
  std::vector<int> u{1, -1, 1};
  EXPECT_EQ(detail::balance_flip(u, -1), 1u);
  EXPECT_EQ(u, (std::vector<int>{-1, -1, 1}));
}

TEST(ColorAll, SingleCellMatchesColorCell) {
  const PointSet p = uniform_box(90, 2, 1.0, 12);
  const auto all = color_all(p, 5);
  const auto one = color_cell(whole(p), p, cell_seed(5, 0));
  EXPECT_EQ(all.coloring, one.coloring);
}

TEST(ColorAll, RestrictionToCellsAndGlobalBalance) {
  const PointSet p = uniform_box(400, 2, 4.0, 13);
  const auto all = color_all(p, 6);
  long total = 0;
  for (const auto& c : all.cells) {
    for (std::size_t m = 0; m < c.members.size(); ++m) EXPECT_EQ(all.coloring[c.members[m]], c.coloring[m]);
    EXPECT_LE(std::abs(c.coloring.imbalance()), 1);
    total += c.coloring.imbalance();
  }
  EXPECT_GE(all.cells.size(), 4u);
  EXPECT_EQ(total, all.coloring.imbalance());
  EXPECT_LE(std::abs(total), 1);
}
