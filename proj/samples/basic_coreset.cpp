// Build a 64-point coreset of 2048 points and compare it with random sampling.

#include <cstdio>

#include "discoreset/coreset.hpp"
#include "discoreset/eval.hpp"

int main() {
  using namespace discoreset;
  CounterRng rng(3);
  Eigen::MatrixXd m(2048, 2);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double shift = rng.below(2) ? 2.0 : -2.0;
    m(i, 0) = shift + 0.7 * rng.normal();
    m(i, 1) = 0.7 * rng.normal();
  }
  const PointSet p(m);

  const CoresetResult q = build_coreset(p, CoresetGoal::size(64), /*seed=*/1);
  const CoresetResult r = random_baseline(p, q.indices.size(), /*seed=*/1);

  const QueryGrid grid = make_query_grid(p);
  const EvalReport eq = linf_error(p, p.subset(q.indices), grid);
  const EvalReport er = linf_error(p, p.subset(r.indices), grid);
  std::printf("rounds %zu, size %zu\n", q.rounds, q.indices.size());
  std::printf("discrepancy coreset: sup error %.5f (upper bound %.5f)\n", eq.sup_error, eq.upper_bound);
  std::printf("random sample:       sup error %.5f (upper bound %.5f)\n", er.sup_error, er.upper_bound);
}
