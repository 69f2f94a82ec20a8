#pragma once

#include <cstddef>
#include <vector>

#include "otselect/features.hpp"
#include "otselect/ot.hpp"

namespace otselect {

// Gram kernel S = G G^T of unit-norm training features. Either holds the
// n x n matrix or multiplies through the features as G (G^T w).
class GramKernel {
 public:
  enum class Mode { kMaterialized, kImplicit };

  // Implicit is chosen automatically above this size.
  static constexpr std::size_t kMaterializeLimit = 4096;

  static GramKernel materialized(const FeatureMatrix& features);
  static GramKernel implicit(const FeatureMatrix& features);
  static GramKernel automatic(const FeatureMatrix& features);
  // Wraps an explicit symmetric matrix (used for closed-form checks).
  static GramKernel from_matrix(DenseMatrix s);

  std::size_t size() const { return n_; }
  Mode mode() const { return mode_; }

  // S w
  std::vector<double> apply(const std::vector<double>& w) const;

 private:
  GramKernel() = default;

  Mode mode_ = Mode::kMaterialized;
  std::size_t n_ = 0;
  DenseMatrix matrix_;
  const FeatureMatrix* features_ = nullptr;
};

// 1/2 w^T S w
double diversity_energy(const GramKernel& s, const SimplexWeights& w);

// S w: how much weight sits near each example.
std::vector<double> diversity_gradient(const GramKernel& s, const SimplexWeights& w);

}  // namespace otselect
