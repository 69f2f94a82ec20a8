#pragma once

#include <cstdint>
#include <vector>

#include "otselect/features.hpp"
#include "otselect/selection.hpp"

namespace otselect {

// Per-example alignment with the validation set: <g_i, mean of val rows>.
struct AttributionScores {
  std::vector<double> scores;
};

AttributionScores attribution_scores(const FeatureMatrix& train, const FeatureMatrix& val);

struct KMeansResult {
  DenseMatrix centroids;               // K x d
  std::vector<std::size_t> assignment;  // cluster per point
  std::vector<std::size_t> sizes;
  std::size_t iterations = 0;
};

// k-means++ seeding followed by Lloyd iterations until the assignment stops
// changing or max_iter is reached. Ties go to the smaller cluster index;
// clusters that empty out are reseeded at the point farthest from its
// centroid.
KMeansResult kmeans(const FeatureMatrix& points, std::size_t clusters, std::uint64_t seed,
                    std::size_t max_iter = 100);

struct TsdsParams {
  std::size_t max_k = 5000;
  std::size_t kde_k = 1000;
  double sigma = 0.75;
  double alpha = 0.5;
  double c_scale = 5.0;
  std::uint64_t seed = 0;
};

SelectionResult select_random(std::size_t n, double rho, std::uint64_t seed);
SelectionResult select_attribution(const FeatureMatrix& train, const FeatureMatrix& val, double rho);
SelectionResult select_diversity(const FeatureMatrix& train, double rho, double cluster_ratio,
                                 std::uint64_t seed);
// Drops the floor(n/4) lowest-attribution examples, then runs the diversity
// selector on the survivors with the budget of the full pool. Throws
// InfeasibleBudget if the survivors cannot cover it.
SelectionResult select_attr_div(const FeatureMatrix& train, const FeatureMatrix& val, double rho,
                                double cluster_ratio, std::uint64_t seed);
SelectionResult select_tsds(const FeatureMatrix& train, const FeatureMatrix& val, double rho,
                            const TsdsParams& p);

// Order in which the diversity selector fills its budget: clusters by
// ascending size, members by ascending distance to their centroid.
std::vector<std::size_t> diversity_fill_order(const FeatureMatrix& points, double cluster_ratio,
                                              std::uint64_t seed);

}  // namespace otselect
