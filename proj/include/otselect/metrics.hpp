#pragma once

#include <string>
#include <vector>

#include "otselect/baselines.hpp"
#include "otselect/features.hpp"
#include "otselect/ot.hpp"

namespace otselect {

// exp of the Shannon entropy of the spectrum of K/n, K the Gram matrix of
// the (unit-norm) rows. Between 1 (all rows equal) and n (orthonormal rows).
double vendi_score(const FeatureMatrix& sub);

double mean_attribution(const std::vector<std::size_t>& indices, const AttributionScores& scores);

// Default regularization used for reporting subset-to-target distances.
SinkhornParams default_report_sinkhorn();

// Entropic transport cost between uniform weights on sub and on val.
double subset_ot(const FeatureMatrix& sub, const FeatureMatrix& val,
                 const SinkhornParams& p = default_report_sinkhorn());

struct SubsetReport {
  std::string method;
  std::size_t k = 0;
  double vendi = 0.0;
  double mean_attr = 0.0;
  double ot_to_val = 0.0;
  SinkhornParams sinkhorn;
};

// Scores a subset against the validation set. Attribution is measured
// against the validation mean.
SubsetReport score_subset(std::string method, const FeatureMatrix& sub, const FeatureMatrix& val,
                          const SinkhornParams& p = default_report_sinkhorn());

}  // namespace otselect
