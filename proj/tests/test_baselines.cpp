#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "otselect/baselines.hpp"
#include "otselect/errors.hpp"
#include "otselect/methods.hpp"
#include "test_util.hpp"

using namespace otselect;

namespace {

// Points drawn tightly around a unit direction.
DenseMatrix blob(const std::vector<double>& dir, std::size_t count, double spread, Rng& rng) {
  DenseMatrix m(count, dir.size());
  for (std::size_t i = 0; i < count; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < dir.size(); ++j) s += std::pow(m(i, j) = dir[j] + spread * rng.normal(), 2);
    for (std::size_t j = 0; j < dir.size(); ++j) m(i, j) /= std::sqrt(s);
  }
  return m;
}

DenseMatrix stack(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows + b.rows, a.cols);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + a.data.size());
  return out;
}

std::vector<std::size_t> sort_slice(const std::vector<double>& scores, std::size_t k) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
  });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

void check_contract(const SelectionResult& r, std::size_t n, double rho) {
  const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(n * rho + 1e-9)));
  CHECK(r.k == k);
  REQUIRE(r.selected.size() == k);
  CHECK(std::adjacent_find(r.selected.begin(), r.selected.end(),
                           [](std::size_t a, std::size_t b) { return a >= b; }) == r.selected.end());
  CHECK(r.selected.back() < n);
  CHECK(r.final_weights.size() == n);
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("attribution scores") {
  const auto train = testutil::random_unit(5, 3, 1);
  const auto val = testutil::random_unit(4, 3, 2);
  const auto s = attribution_scores(train, val);
  for (std::size_t i = 0; i < 5; ++i) {
    double brute = 0.0;
    for (std::size_t j = 0; j < 4; ++j) brute += dot(train.row(i), val.row(j)) / 4.0;
    CHECK(std::abs(s.scores[i] - brute) <= 1e-12);
  }
  const auto one = attribution_scores(train, val.take({2}));
  for (std::size_t i = 0; i < 5; ++i) CHECK(one.scores[i] == doctest::Approx(dot(train.row(i), val.row(2))));
  const auto ortho = attribution_scores(FeatureMatrix::from_unit_rows(DenseMatrix(1, 3, {0, 0, 1})),
                                        FeatureMatrix::from_unit_rows(DenseMatrix(2, 3, {1, 0, 0, 0, 1, 0})));
  CHECK(ortho.scores[0] == 0.0);
  CHECK_THROWS_AS(attribution_scores(train, testutil::random_unit(2, 4, 1)), DimensionMismatch);
}

TEST_CASE("random selection") {
  check_contract(select_random(50, 0.3, 1), 50, 0.3);
  CHECK(select_random(8, 1.0, 3).selected == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7});
  CHECK(select_random(1, 0.1, 3).selected == std::vector<std::size_t>{0});
  CHECK(select_random(100, 0.1, 9) == select_random(100, 0.1, 9));
  CHECK(select_random(100, 0.1, 9).selected != select_random(100, 0.1, 10).selected);
  // Every index is reachable and roughly equally likely.
  std::vector<int> hits(20);
  for (std::uint64_t s = 0; s < 2000; ++s)
    for (std::size_t i : select_random(20, 0.25, s).selected) ++hits[i];
  for (int h : hits) CHECK(h == doctest::Approx(500).epsilon(0.2));
}

TEST_CASE("attribution selection") {
  const auto train = testutil::random_unit(40, 6, 3);
  const auto val = testutil::random_unit(10, 6, 4);
  const auto r = select_attribution(train, val, 0.2);
  check_contract(r, 40, 0.2);
  CHECK(r.selected == sort_slice(attribution_scores(train, val).scores, 8));

  // Rescaling validation features leaves the set unchanged.
  FeatureMatrix scaled = val;
  for (double& x : scaled.values.data) x *= 3.5;
  CHECK(select_attribution(train, scaled, 0.2).selected == r.selected);

  // A training row along the normalized validation mean wins.
  std::vector<double> mean(6);
  for (std::size_t j = 0; j < 10; ++j)
    for (std::size_t c = 0; c < 6; ++c) mean[c] += val.values(j, c) / 10.0;
  const double nm = std::sqrt(dot(mean, mean));
  DenseMatrix planted = train.values;
  for (std::size_t c = 0; c < 6; ++c) planted(17, c) = mean[c] / nm;
  CHECK(select_attribution(FeatureMatrix::from_unit_rows(planted), val, 1.0 / 40).selected ==
        std::vector<std::size_t>{17});
}

TEST_CASE("k-means assignments are nearest-centroid fixed points") {
  const auto pts = testutil::random_unit(120, 5, 5);
  const auto km = kmeans(pts, 6, 1);
  CHECK(km.centroids.rows == 6);
  std::size_t total = 0;
  for (std::size_t s : km.sizes) {
    CHECK(s > 0);
    total += s;
  }
  CHECK(total == 120);
  if (km.iterations < 100) {
    for (std::size_t i = 0; i < 120; ++i) {
      std::size_t best = 0;
      double bd = INFINITY;
      for (std::size_t c = 0; c < 6; ++c) {
        double d = 0.0;
        for (std::size_t j = 0; j < 5; ++j) d += std::pow(pts.values(i, j) - km.centroids(c, j), 2);
        if (d < bd) bd = d, best = c;
      }
      CHECK(km.assignment[i] == best);
    }
  }
  const auto again = kmeans(pts, 6, 1);
  CHECK(again.assignment == km.assignment);
  CHECK(again.centroids == km.centroids);
}

TEST_CASE("diversity selection fills from the smallest cluster") {
  Rng rng(7);
  const auto small = blob({1, 0, 0, 0}, 3, 0.02, rng);
  const auto big = blob({0, 0, 1, 0}, 30, 0.05, rng);
  // Big blob first so index order does not favour the small one.
  const auto f = FeatureMatrix::from_unit_rows(stack(big, small));
  const auto r = select_diversity(f, 3.0 / 33.0, 2.0 / 33.0, 5);
  check_contract(r, 33, 3.0 / 33.0);
  CHECK(r.selected == std::vector<std::size_t>{30, 31, 32});
  CHECK(select_diversity(f, 0.3, 0.1, 5) == select_diversity(f, 0.3, 0.1, 5));

  // Identical points: a single effective cluster ordered by index.
  const auto same = FeatureMatrix::from_unit_rows(DenseMatrix(10, 2, {0.6, 0.8, 0.6, 0.8, 0.6, 0.8, 0.6, 0.8, 0.6, 0.8,
                                                                      0.6, 0.8, 0.6, 0.8, 0.6, 0.8, 0.6, 0.8, 0.6, 0.8}));
  CHECK(select_diversity(same, 0.3, 0.1, 1).selected == std::vector<std::size_t>{0, 1, 2});
  CHECK_THROWS_AS(select_diversity(f, 0.2, 0.0, 1), InvalidArgument);
}

TEST_CASE("attr-div pruning") {
  // Equal scores: the largest indices are dropped.
  const auto same = FeatureMatrix::from_unit_rows(DenseMatrix(8, 2, std::vector<double>(16, std::sqrt(0.5))));
  const auto val = FeatureMatrix::from_unit_rows(DenseMatrix(1, 2, {1.0, 0.0}));
  const auto r = select_attr_div(same, val, 0.75, 0.5, 1);
  check_contract(r, 8, 0.75);
  CHECK(r.selected == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  CHECK_THROWS_AS(select_attr_div(same, val, 1.0, 0.5, 1), InfeasibleBudget);

  // n = 4 prunes exactly one: the lowest-scoring row never appears.
  const auto four = FeatureMatrix::from_unit_rows(DenseMatrix(4, 2, {1, 0, 0.8, 0.6, -1, 0, 0.6, 0.8}));
  CHECK(select_attr_div(four, val, 0.75, 1.0, 1).selected == std::vector<std::size_t>{0, 1, 3});
  CHECK_THROWS_AS(select_attr_div(four, val, 1.0, 1.0, 1), InfeasibleBudget);

  // Top quartile is one tight blob; selection still spans the other clusters.
  Rng rng(9);
  const auto target = blob({1, 0, 0, 0}, 10, 0.01, rng);
  auto pool = stack(blob({0.9, 0.436, 0, 0}, 10, 0.3, rng), blob({0.9, 0, 0.436, 0}, 10, 0.3, rng));
  pool = stack(pool, blob({0.9, 0, 0, 0.436}, 10, 0.3, rng));
  const auto f = FeatureMatrix::from_unit_rows(stack(pool, target));
  const auto v = FeatureMatrix::from_unit_rows(blob({1, 0, 0, 0}, 5, 0.01, rng));
  const auto ad = select_attr_div(f, v, 0.2, 0.1, 3);
  check_contract(ad, 40, 0.2);
  std::set<std::size_t> groups;
  for (std::size_t i : ad.selected) groups.insert(i / 10);
  CHECK(groups.size() >= 3);
}

TEST_CASE("tsds") {
  const auto val = testutil::random_unit(12, 5, 11);
  TsdsParams p;
  p.seed = 4;
  CHECK(select_tsds(val, val, 1.0, p).selected.size() == 12);

  // Row 3 is the nearest neighbour of every validation point.
  Rng rng(2);
  const auto v = FeatureMatrix::from_unit_rows(blob({1, 0, 0}, 6, 0.01, rng));
  DenseMatrix tr(10, 3);
  for (std::size_t i = 0; i < 10; ++i) tr(i, 1) = 1.0;
  tr(3, 0) = 1.0, tr(3, 1) = 0.0;
  const auto train = FeatureMatrix::from_unit_rows(tr);
  for (std::uint64_t s = 0; s < 20; ++s) {
    p.seed = s;
    CHECK(select_tsds(train, v, 0.1, p).selected == std::vector<std::size_t>{3});
  }
  const auto big = testutil::random_unit(60, 5, 12);
  const auto a = select_tsds(big, val, 0.25, p);
  check_contract(a, 60, 0.25);
  CHECK(a == select_tsds(big, val, 0.25, p));
  CHECK_FALSE(a.fallback);
  double s = 0.0;
  for (double x : a.final_weights.values()) s += x;
  CHECK(s == doctest::Approx(1.0));
  p.sigma = 0.0;
  CHECK_THROWS_AS(select_tsds(big, val, 0.25, p), InvalidArgument);
}

TEST_CASE("every method honours the selection contract") {
  const auto train = testutil::random_unit(47, 6, 13);
  const auto val = testutil::random_unit(9, 6, 14);
  for (double rho : {0.01, 0.2, 0.5}) {
    MethodConfig cfg;
    cfg.rho = rho;
    cfg.seed = 3;
    for (auto name : kMethodNames) {
      CAPTURE(name);
      const auto r = run_method(name, train, val, cfg);
      CHECK(r.method == name);
      check_contract(r, 47, rho);
      CHECK(r == run_method(name, train, val, cfg));
    }
  }
  CHECK_THROWS_AS(run_method("bogus", train, val, {}), UnknownMethod);
  CHECK(is_known_method("tsds"));
  CHECK_FALSE(is_known_method("TSDS"));
}

}
