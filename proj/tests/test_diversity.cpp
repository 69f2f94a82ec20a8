#include <cmath>

#include "doctest.h"
#include "otselect/diversity.hpp"
#include "otselect/errors.hpp"
#include "test_util.hpp"

using namespace otselect;

TEST_SUITE("diversity") {

TEST_CASE("closed forms for identity and all-ones kernels") {
  for (std::size_t n : {1u, 4u, 9u}) {
    DenseMatrix eye(n, n);
    for (std::size_t i = 0; i < n; ++i) eye(i, i) = 1.0;
    const auto id = GramKernel::from_matrix(eye);
    const auto w = SimplexWeights::uniform(n);
    CHECK(diversity_energy(id, w) == doctest::Approx(0.5 / n).epsilon(1e-14));
    CHECK(diversity_gradient(id, w) == w.values());

    Rng rng(n);
    const auto wr = SimplexWeights::from(testutil::random_simplex(n, rng));
    const auto ones = GramKernel::from_matrix(DenseMatrix(n, n, 1.0));
    CHECK(diversity_energy(ones, wr) == doctest::Approx(0.5).epsilon(1e-14));
    for (double gi : diversity_gradient(ones, wr)) CHECK(gi == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("energy matches the explicit double sum") {
  const auto f = testutil::random_unit(6, 4, 8);
  Rng rng(2);
  const auto w = SimplexWeights::from(testutil::random_simplex(6, rng));
  double brute = 0.0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) brute += 0.5 * w[i] * dot(f.row(i), f.row(j)) * w[j];
  const auto s = GramKernel::materialized(f);
  CHECK(std::abs(diversity_energy(s, w) - brute) <= 1e-12);
  CHECK(diversity_energy(s, w) >= 0.0);
}

TEST_CASE("implicit and materialized modes agree") {
  for (std::size_t n : {1u, 17u, 128u, 512u}) {
    const auto f = testutil::random_unit(n, 24, n);
    Rng rng(n + 1);
    const auto w = SimplexWeights::from(testutil::random_simplex(n, rng));
    const auto a = GramKernel::materialized(f);
    const auto b = GramKernel::implicit(f);
    CHECK(a.mode() == GramKernel::Mode::kMaterialized);
    CHECK(b.mode() == GramKernel::Mode::kImplicit);
    const auto ga = diversity_gradient(a, w);
    const auto gb = diversity_gradient(b, w);
    double inner = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(ga[i] - gb[i]) <= 1e-10);
      inner += ga[i] * w[i];
    }
    CHECK(std::abs(diversity_energy(a, w) - diversity_energy(b, w)) <= 1e-10);
    CHECK(std::abs(inner - 2.0 * diversity_energy(a, w)) <= 1e-10);
  }
  CHECK(GramKernel::automatic(testutil::random_unit(10, 3, 1)).mode() ==
        GramKernel::Mode::kMaterialized);
  CHECK(GramKernel::automatic(testutil::random_unit(GramKernel::kMaterializeLimit + 1, 3, 1)).mode() ==
        GramKernel::Mode::kImplicit);
}

TEST_CASE("negative similarities are kept and sizes are checked") {
  const auto f = FeatureMatrix::from_unit_rows(DenseMatrix(2, 1, {1.0, -1.0}));
  const auto s = GramKernel::materialized(f);
  const auto g = diversity_gradient(s, SimplexWeights::from({0.75, 0.25}));
  CHECK(g[0] == doctest::Approx(0.5));
  CHECK(g[1] == doctest::Approx(-0.5));
  CHECK_THROWS_AS(diversity_energy(s, SimplexWeights::uniform(3)), DimensionMismatch);
}

}
