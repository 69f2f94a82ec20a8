#include "otselect/diversity.hpp"

#include "otselect/errors.hpp"
#include "otselect/parallel.hpp"

namespace otselect {

GramKernel GramKernel::materialized(const FeatureMatrix& features) {
  GramKernel k;
  k.mode_ = Mode::kMaterialized;
  k.n_ = features.n();
  k.matrix_ = DenseMatrix(k.n_, k.n_);
  parallel_for(k.n_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t j = 0; j < k.n_; ++j) k.matrix_(i, j) = dot(features.row(i), features.row(j));
  }, 16);
  return k;
}

GramKernel GramKernel::implicit(const FeatureMatrix& features) {
  GramKernel k;
  k.mode_ = Mode::kImplicit;
  k.n_ = features.n();
  k.features_ = &features;
  return k;
}

GramKernel GramKernel::automatic(const FeatureMatrix& features) {
  return features.n() > kMaterializeLimit ? implicit(features) : materialized(features);
}

GramKernel GramKernel::from_matrix(DenseMatrix s) {
  if (s.rows != s.cols) throw DimensionMismatch("Gram matrix must be square");
  GramKernel k;
  k.mode_ = Mode::kMaterialized;
  k.n_ = s.rows;
  k.matrix_ = std::move(s);
  return k;
}

std::vector<double> GramKernel::apply(const std::vector<double>& w) const {
  if (w.size() != n_)
    throw DimensionMismatch("kernel has size " + std::to_string(n_) + " but weights have " +
                            std::to_string(w.size()));
  std::vector<double> out(n_);
  if (mode_ == Mode::kMaterialized) {
    parallel_for(n_, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) out[i] = dot(matrix_.row(i), w);
    }, 16);
    return out;
  }
  // G^T w, accumulated in row order so the sum is independent of threads.
  const FeatureMatrix& g = *features_;
  std::vector<double> mixed(g.d(), 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const auto r = g.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) mixed[k] += w[i] * r[k];
  }
  parallel_for(n_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = dot(g.row(i), mixed);
  }, 64);
  return out;
}

double diversity_energy(const GramKernel& s, const SimplexWeights& w) {
  return 0.5 * dot(s.apply(w.values()), w.values());
}

std::vector<double> diversity_gradient(const GramKernel& s, const SimplexWeights& w) {
  return s.apply(w.values());
}

}  // namespace otselect
