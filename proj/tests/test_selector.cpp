#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "otselect/errors.hpp"
#include "otselect/fixtures.hpp"
#include "otselect/selection.hpp"
#include "otselect/selector.hpp"
#include "test_util.hpp"

using namespace otselect;

TEST_SUITE("selector") {

TEST_CASE("standardize") {
  const auto z = standardize({1.0, 2.0, 3.0});
  CHECK(z[0] == doctest::Approx(-1.224744871391589).epsilon(1e-14));
  CHECK(z[1] == 0.0);
  CHECK(z[2] == doctest::Approx(1.224744871391589).epsilon(1e-14));
  CHECK(standardize({4.2, 4.2, 4.2}) == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(standardize({7.0}) == std::vector<double>{0.0});

  Rng rng(3);
  std::vector<double> v(57);
  for (double& x : v) x = 5.0 + 3.0 * rng.normal();
  const auto s = standardize(v);
  double mean = 0.0, var = 0.0;
  for (double x : s) mean += x / s.size();
  for (double x : s) var += (x - mean) * (x - mean) / s.size();
  CHECK(std::abs(mean) <= 1e-12);
  CHECK(std::abs(std::sqrt(var) - 1.0) <= 1e-9);
}

TEST_CASE("exp_update") {
  const auto w = SimplexWeights::uniform(2);
  const auto u = exp_update(w, {1.0, -1.0}, 0.1);
  CHECK(u[0] == doctest::Approx(0.4501660026875221).epsilon(1e-14));
  CHECK(u[1] == doctest::Approx(0.549833997312478).epsilon(1e-14));
  Rng rng(1);
  const auto wr = SimplexWeights::from(testutil::random_simplex(7, rng));
  std::vector<double> g(7);
  for (double& x : g) x = rng.normal();
  const auto same_g = exp_update(wr, std::vector<double>(7, 0.0), 0.3);
  const auto same_lr = exp_update(wr, g, 0.0);
  const auto moved = exp_update(wr, g, 0.5);
  double sum = 0.0;
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(same_g[i] == doctest::Approx(wr[i]).epsilon(1e-15));
    CHECK(same_lr[i] == doctest::Approx(wr[i]).epsilon(1e-15));
    CHECK(moved[i] > 0.0);
    sum += moved[i];
  }
  CHECK(std::abs(sum - 1.0) <= 1e-12);
  CHECK_THROWS_AS(exp_update(wr, {1.0}, 0.1), DimensionMismatch);
}

TEST_CASE("top_k and budget") {
  CHECK(top_k(std::vector<double>{0.1, 0.5, 0.4}, 1) == std::vector<std::size_t>{1});
  CHECK(top_k(SimplexWeights::uniform(6), 3) == std::vector<std::size_t>{0, 1, 2});
  CHECK(top_k(std::vector<double>{0.2, 0.3, 0.2, 0.3}, 3) == std::vector<std::size_t>{0, 1, 3});
  Rng rng(4);
  const auto w = testutil::random_simplex(11, rng);
  std::vector<std::size_t> all(11);
  std::iota(all.begin(), all.end(), 0);
  CHECK(top_k(w, 11) == all);
  CHECK_THROWS_AS(top_k(w, 0), InvalidArgument);
  CHECK_THROWS_AS(top_k(w, 12), InvalidArgument);

  CHECK(selection_budget(10, 0.25) == 2);
  CHECK(selection_budget(10, 0.01) == 1);
  CHECK(selection_budget(1, 0.2) == 1);
  CHECK(selection_budget(10, 0.3) == 3);  // 10 * 0.3 = 2.9999999999999996
  CHECK(selection_budget(7, 1.0) == 7);
}

TEST_CASE("degenerate budgets and step counts") {
  const auto train = testutil::random_unit(9, 5, 1);
  const auto val = testutil::random_unit(4, 5, 2);
  EvoParams p;
  p.rho = 1.0;
  auto r = evoselect(train, val, p);
  CHECK(r.k == 9);
  CHECK(r.selected.size() == 9);
  CHECK(r.method == "evoselect");
  CHECK(r.trace.size() == p.steps);

  p.rho = 0.2;
  r = evoselect(train.take({4}), val, p);
  CHECK(r.selected == std::vector<std::size_t>{0});

  p.steps = 0;
  p.rho = 0.4;
  r = evoselect(train, val, p);
  CHECK(r.selected == std::vector<std::size_t>{0, 1, 2});
  CHECK(r.final_weights == SimplexWeights::uniform(9));

  p.rho = 0.0;
  CHECK_THROWS_AS(evoselect(train, val, p), InvalidArgument);
  p.rho = 0.5;
  CHECK_THROWS_AS(evoselect(train, testutil::random_unit(3, 4, 1), p), DimensionMismatch);
}

TEST_CASE("weights stay on the simplex at every step") {
  const auto train = testutil::random_unit(60, 8, 5);
  const auto val = testutil::random_unit(15, 8, 6);
  EvoParams p;
  p.steps = 20;
  std::size_t seen = 0;
  const auto r = evoselect(train, val, p, [&](std::size_t t, const SimplexWeights& w) {
    CHECK(t == seen++);
    double s = 0.0;
    for (double x : w.values()) {
      CHECK(x > 0.0);
      s += x;
    }
    CHECK(std::abs(s - 1.0) <= 1e-9);
  });
  CHECK(seen == 21);
  CHECK(r.selected == top_k(r.final_weights, r.k));
  CHECK(std::is_sorted(r.selected.begin(), r.selected.end()));
  for (const auto& rec : r.trace) CHECK(rec.converged);
}

TEST_CASE("warm and cold starts agree") {
  const auto train = testutil::random_unit(80, 10, 7);
  const auto val = testutil::random_unit(30, 10, 8);
  EvoParams p;
  p.sinkhorn.tol = 1e-10;
  const auto warm = evoselect(train, val, p);
  p.warm_start = false;
  const auto cold = evoselect(train, val, p);
  for (std::size_t i = 0; i < 80; ++i)
    CHECK(std::abs(warm.final_weights[i] - cold.final_weights[i]) <= 1e-8);
  CHECK(warm.selected == cold.selected);
}

TEST_CASE("permuting training rows permutes the result") {
  const auto train = testutil::random_unit(40, 6, 9);
  const auto val = testutil::random_unit(12, 6, 10);
  std::vector<std::size_t> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(1);
  for (std::size_t i = 39; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
  EvoParams p;
  const auto a = evoselect(train, val, p);
  const auto b = evoselect(train.take(perm), val, p);
  for (std::size_t i = 0; i < 40; ++i)
    CHECK(b.final_weights[i] == doctest::Approx(a.final_weights[perm[i]]).epsilon(1e-12));
  std::vector<std::size_t> mapped;
  for (std::size_t i : b.selected) mapped.push_back(perm[i]);
  std::sort(mapped.begin(), mapped.end());
  CHECK(mapped == a.selected);
}

TEST_CASE("constant offsets of the OT gradient change nothing") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto train = testutil::random_unit(50, 8, 100 + seed);
    const auto val = testutil::random_unit(20, 8, 200 + seed);
    EvoParams p;
    std::vector<SimplexWeights> base, shifted;
    const auto a = evoselect(train, val, p, [&](std::size_t, const SimplexWeights& w) { base.push_back(w); });
    p.dual_shift = 7.3;
    const auto b = evoselect(train, val, p, [&](std::size_t, const SimplexWeights& w) { shifted.push_back(w); });
    CHECK(base == shifted);
    CHECK(a.selected == b.selected);
  }
}

TEST_CASE("planted duplicates are recovered") {
  for (std::uint64_t seed : fixtures::kShippedSeeds) {
    const auto fx = fixtures::planted_duplicates(seed);
    REQUIRE(fx.train.n() == 20);
    REQUIRE(fx.duplicates.size() == 10);
    // The OT gradient alone already separates copies from antipodes.
    const auto c = cost_matrix(fx.train, fx.val);
    const auto u = ot_gradient(SimplexWeights::uniform(20), SimplexWeights::uniform(10), c, {});
    double worst_dup = -INFINITY, best_far = INFINITY;
    for (std::size_t i = 0; i < 20; ++i) {
      const bool dup = std::binary_search(fx.duplicates.begin(), fx.duplicates.end(), i);
      (dup ? worst_dup : best_far) = dup ? std::max(worst_dup, u[i]) : std::min(best_far, u[i]);
    }
    CHECK(worst_dup < best_far);

    EvoParams p;
    p.rho = 0.5;
    p.steps = 20;
    CHECK(evoselect(fx.train, fx.val, p).selected == fx.duplicates);
  }
}

TEST_CASE("identical inputs give identical results") {
  const auto train = testutil::random_unit(30, 5, 11);
  const auto val = testutil::random_unit(10, 5, 12);
  EvoParams p;
  const auto a = evoselect(train, val, p);
  const auto b = evoselect(train, val, p);
  CHECK(a == b);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t t = 0; t < a.trace.size(); ++t) CHECK(a.trace[t].ot_value == b.trace[t].ot_value);
}

}
