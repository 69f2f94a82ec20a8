#include "otselect/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "otselect/rng.hpp"

namespace otselect::fixtures {
namespace {

std::vector<double> unit_gaussian(Rng& rng, std::size_t d) {
  std::vector<double> v(d);
  double s = 0.0;
  for (double& x : v) {
    x = rng.normal();
    s += x * x;
  }
  s = std::sqrt(s);
  for (double& x : v) x /= s;
  return v;
}

// normalize(center + spread * z), z ~ N(0, I/d)
void jitter(const std::vector<double>& center, double spread, Rng& rng, std::span<double> out) {
  const double scale = spread / std::sqrt(static_cast<double>(center.size()));
  double s = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = center[k] + scale * rng.normal();
    s += out[k] * out[k];
  }
  s = std::sqrt(s);
  for (double& x : out) x /= s;
}

}  // namespace

PlantedFixture planted_duplicates(std::uint64_t seed, std::size_t d) {
  constexpr std::size_t kCount = 10;
  Rng rng(hash_combine(seed, 0x706c616e74ULL));
  const std::vector<double> center = unit_gaussian(rng, d);

  DenseMatrix val(kCount, d);
  for (std::size_t j = 0; j < kCount; ++j) jitter(center, 0.1, rng, val.row(j));

  // Slot s of the training set holds either duplicate s' or antipode s'.
  std::vector<std::size_t> slots(2 * kCount);
  std::iota(slots.begin(), slots.end(), 0);
  for (std::size_t i = slots.size(); i > 1; --i) std::swap(slots[i - 1], slots[rng.below(i)]);

  DenseMatrix train(2 * kCount, d);
  PlantedFixture fx;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const std::size_t src = slots[s] % kCount;
    const bool duplicate = slots[s] < kCount;
    const auto from = val.row(src);
    auto to = train.row(s);
    for (std::size_t k = 0; k < d; ++k) to[k] = duplicate ? from[k] : -from[k];
    if (duplicate) fx.duplicates.push_back(s);
  }
  fx.train = FeatureMatrix::from_unit_rows(std::move(train));
  fx.val = FeatureMatrix::from_unit_rows(std::move(val));
  return fx;
}

TradeoffFixture tradeoff_corpus(std::uint64_t seed) {
  constexpr std::size_t kDim = 32;
  constexpr std::size_t kTargets = 4;
  constexpr std::size_t kVal = 80;
  constexpr std::size_t kBlob = 160;       // redundant copies near the dominant target mode
  constexpr std::size_t kBroad = 160;      // draws from the full target
  constexpr std::size_t kOffClusters = 16; // small clusters away from the target
  constexpr std::size_t kOffSize = 5;
  const std::vector<double> target_weights = {0.4, 0.2, 0.2, 0.2};

  Rng rng(hash_combine(seed, 0x74726164656f6666ULL));
  std::vector<std::vector<double>> modes;
  for (std::size_t c = 0; c < kTargets; ++c) modes.push_back(unit_gaussian(rng, kDim));
  const auto pick = [&] {
    double u = rng.uniform();
    for (std::size_t c = 0; c < kTargets; ++c) {
      u -= target_weights[c];
      if (u < 0.0) return c;
    }
    return kTargets - 1;
  };

  DenseMatrix val(kVal, kDim);
  for (std::size_t j = 0; j < kVal; ++j) jitter(modes[pick()], 0.5, rng, val.row(j));

  DenseMatrix train(kBlob + kBroad + kOffClusters * kOffSize, kDim);
  std::size_t row = 0;
  for (std::size_t i = 0; i < kBlob; ++i) jitter(modes[0], 0.15, rng, train.row(row++));
  for (std::size_t i = 0; i < kBroad; ++i) jitter(modes[pick()], 0.5, rng, train.row(row++));
  for (std::size_t c = 0; c < kOffClusters; ++c) {
    const std::vector<double> center = unit_gaussian(rng, kDim);
    for (std::size_t i = 0; i < kOffSize; ++i) jitter(center, 0.3, rng, train.row(row++));
  }
  return {FeatureMatrix::from_unit_rows(std::move(train)), FeatureMatrix::from_unit_rows(std::move(val))};
}

LoopConfig drift_loop_config(std::uint64_t seed) {
  LoopConfig cfg;
  cfg.d = 32;
  cfg.m_val = 80;
  cfg.n_cand = 200;
  cfg.n_seed = 20;
  cfg.iterations = 2;
  cfg.mixture_count = 4;
  cfg.mixture_concentration = 3.0;
  cfg.drift = 1.1;
  cfg.redundancy = 0.3;
  cfg.rho = 0.2;
  cfg.methods = {"evoselect", "random", "attribution"};
  cfg.seed = seed;
  return cfg;
}

}  // namespace otselect::fixtures
