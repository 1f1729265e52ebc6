#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "discoreset/coreset.hpp"
#include "helpers.hpp"

using namespace discoreset;
using namespace testing_support;

namespace {

// Recursive enumerator: independent of the library's mask loop, same
// summation order, so results must agree bit for bit.
void dfs(const Eigen::MatrixXd& k, std::vector<int>& s, std::size_t i, double& best) {
  const auto n = static_cast<std::size_t>(k.cols());
  if (i == n) {
    double worst = 0.0;
    for (Eigen::Index q = 0; q < k.rows(); ++q) {
      double d = 0.0;
      for (std::size_t j = 0; j < n; ++j) d += s[j] * k(q, static_cast<Eigen::Index>(j));
      worst = std::max(worst, std::abs(d));
    }
    best = std::min(best, worst);
    return;
  }
  for (int sign : {1, -1}) {
    if (i == 0 && sign < 0) continue;
    s[i] = sign;
    dfs(k, s, i + 1, best);
  }
}

double dfs_oracle(const PointSet& p, const PointSet& q) {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(q.size()), static_cast<Eigen::Index>(p.size()));
  for (std::size_t a = 0; a < q.size(); ++a) {
    for (std::size_t b = 0; b < p.size(); ++b) {
      k(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = std::exp(-(q.point(a) - p.point(b)).squaredNorm());
    }
  }
  std::vector<int> s(p.size(), 1);
  double best = std::numeric_limits<double>::infinity();
  dfs(k, s, 0, best);
  return best;
}

PointSet line_queries(double lo, double hi, int count) {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < count; ++i) rows.push_back({lo + (hi - lo) * i / (count - 1)});
  return PointSet::from_rows(rows);
}

}  // namespace

TEST(Halve, DuplicatePairKeepsOne) {
  const PointSet p = PointSet::from_rows({{0.2, 0.2}, {0.2, 0.2}});
  EXPECT_EQ(halve(p, 1).kept.size(), 1u);
}

TEST(Halve, SingleCellExactHalf) {
  const PointSet p = uniform_box(1000, 2, 1.0, 2);
  EXPECT_EQ(halve(p, 3).kept.size(), 500u);
}

TEST(Halve, KdeDeviationIdentity) {
  const PointSet p = uniform_box(300, 2, 3.0, 4);
  const auto h = halve(p, 5);
  const PointSet plus = p.subset(h.kept);
  const double imb = static_cast<double>(h.coloring.coloring.imbalance());
  const PointSet xs = uniform_box(50, 2, 5.0, 6);
  for (std::size_t q = 0; q < xs.size(); ++q) {
    const Point x = xs.point(q);
    const double lhs = kde(p, x) - kde(plus, x);
    const double d = signed_discrepancy(p, h.coloring.coloring, x);
    if (imb == 0.0) {
      EXPECT_NEAR(lhs, -d / static_cast<double>(p.size()), 1e-12);
    }
    // With odd leftovers: kde_P - kde_+ = (imb * kde_+ - D) / |P|.
    EXPECT_NEAR(lhs, (imb * kde(plus, x) - d) / static_cast<double>(p.size()), 1e-12);
    EXPECT_LE(std::abs(lhs + d / static_cast<double>(p.size())), std::abs(imb) / static_cast<double>(p.size()) + 1e-12);
  }
}

TEST(BuildCoreset, IdentityAndOneRound) {
  const PointSet p = uniform_box(200, 2, 1.0, 7);
  const auto same = build_coreset(p, CoresetGoal::size(200), 1);
  EXPECT_EQ(same.rounds, 0u);
  EXPECT_EQ(same.indices.size(), 200u);
  const auto half = build_coreset(p, CoresetGoal::size(100), 1);
  EXPECT_EQ(half.rounds, 1u);
  EXPECT_EQ(half.indices.size(), 100u);
}

TEST(BuildCoreset, SizeTrajectoryAndNesting) {
  const PointSet p = uniform_box(4096, 2, 4.0, 8);
  const auto r = build_coreset(p, CoresetGoal::size(128), 2);
  ASSERT_EQ(r.rounds, 5u);
  std::vector<std::size_t> prev(p.size());
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  std::size_t want = 4096;
  for (const auto& round : r.per_round_reports) {
    want /= 2;
    EXPECT_EQ(round.output_size, want);
    EXPECT_TRUE(std::includes(prev.begin(), prev.end(), round.indices.begin(), round.indices.end()));
    prev = round.indices;
  }
  EXPECT_EQ(r.indices, prev);
}

TEST(BuildCoreset, EpsilonTargetAndPresample) {
  const PointSet p = uniform_box(3000, 2, 3.0, 9);
  CoresetOptions opt;
  opt.presample = true;
  const auto r = build_coreset(p, CoresetGoal::eps(0.05), 3, opt);
  EXPECT_EQ(r.target_size, 80u);
  EXPECT_EQ(r.presampled_size, 1600u);
  EXPECT_LE(r.indices.size(), 80u);
  EXPECT_GE(r.indices.size(), 40u);
  for (std::size_t i : r.indices) EXPECT_TRUE(std::binary_search(r.presample_indices.begin(), r.presample_indices.end(), i));
}

TEST(BuildCoreset, RejectsBadGoals) {
  const PointSet p = uniform_box(20, 1, 1.0, 1);
  EXPECT_THROW(build_coreset(p, CoresetGoal::size(0), 1), ValidationError);
  EXPECT_THROW(build_coreset(p, CoresetGoal::size(21), 1), ValidationError);
  EXPECT_THROW(build_coreset(p, CoresetGoal::eps(1.5), 1), ValidationError);
  EXPECT_THROW(build_coreset(p, CoresetGoal{}, 1), ValidationError);
}

TEST(RandomBaseline, FullSetAndReproducible) {
  const PointSet p = uniform_box(30, 1, 1.0, 1);
  EXPECT_EQ(random_baseline(p, 30, 4).indices.size(), 30u);
  EXPECT_EQ(random_baseline(p, 10, 4).indices, random_baseline(p, 10, 4).indices);
  EXPECT_THROW(random_baseline(p, 31, 4), ValidationError);
  EXPECT_THROW(random_baseline(p, 0, 4), ValidationError);
}

TEST(RandomBaseline, SinglePickIsUniform) {
  const std::size_t n = 10;
  const PointSet p = uniform_box(n, 1, 1.0, 1);
  std::vector<int> hits(n, 0);
  const int runs = 10000;
  for (int s = 0; s < runs; ++s) ++hits[random_baseline(p, 1, static_cast<std::uint64_t>(s)).indices[0]];
  const double pr = 1.0 / n;
  const double se = std::sqrt(pr * (1 - pr) / runs);
  for (int h : hits) EXPECT_NEAR(static_cast<double>(h) / runs, pr, 3.0 * se + 1e-3);
}

TEST(Oracle, TrivialCases) {
  const PointSet q = line_queries(-3, 3, 61);
  const auto dup = oracle_min_discrepancy(PointSet::from_rows({{0.3}, {0.3}}), q);
  EXPECT_EQ(dup.sup, 0.0);
  EXPECT_EQ(dup.coloring.imbalance(), 0);
  const PointSet one = PointSet::from_rows({{0.25}});
  double mx = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) mx = std::max(mx, gauss(q.point(i), one.point(0)));
  EXPECT_EQ(oracle_min_discrepancy(one, q).sup, mx);
}

TEST(Oracle, AgreesWithRecursiveEnumerator) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const PointSet p = uniform_box(10, 1, 1.0, s);
    const PointSet q = line_queries(-4, 4, 81);
    const auto r = oracle_min_discrepancy(p, q);
    EXPECT_EQ(r.sup, dfs_oracle(p, q));
    double check = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) check = std::max(check, std::abs(signed_discrepancy(p, r.coloring, q.point(i))));
    EXPECT_NEAR(check, r.sup, 1e-14);
  }
}

TEST(Oracle, SizeCap) {
  EXPECT_THROW(oracle_min_discrepancy(uniform_box(17, 1, 1.0, 1), line_queries(0, 1, 2)), ValidationError);
}
