#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "otselect/features.hpp"
#include "otselect/loopsim.hpp"

namespace otselect::fixtures {

// Seeds of the shipped synthetic fixtures.
inline constexpr std::array<std::uint64_t, 5> kShippedSeeds = {11, 23, 37, 41, 53};

// Ten validation rows near a common direction; training holds ten exact
// copies of them and ten antipodal rows (squared distance ~4 to every
// validation row), in a seeded interleaved order.
struct PlantedFixture {
  FeatureMatrix train;
  FeatureMatrix val;
  std::vector<std::size_t> duplicates;  // ascending training indices of the copies
};
PlantedFixture planted_duplicates(std::uint64_t seed, std::size_t d = 16);

// Candidate pool for the alignment/diversity trade-off: a redundant blob at
// the dominant target component, a broad draw from the target, and small
// off-target clusters.
struct TradeoffFixture {
  FeatureMatrix train;
  FeatureMatrix val;
};
TradeoffFixture tradeoff_corpus(std::uint64_t seed);
inline constexpr double kTradeoffRho = 0.2;

// Loop configuration with drift and redundancy used by the drift checks.
LoopConfig drift_loop_config(std::uint64_t seed);

}  // namespace otselect::fixtures
