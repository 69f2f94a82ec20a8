#include "otselect/metrics.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "otselect/errors.hpp"

namespace otselect {

double vendi_score(const FeatureMatrix& sub) {
  const std::size_t n = sub.n(), d = sub.d();
  if (n == 0) throw InvalidArgument("vendi score of an empty set");
  // The nonzero spectrum of G G^T equals that of G^T G; use the smaller.
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> g(
      sub.values.data.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Eigen::MatrixXd k = n <= d ? Eigen::MatrixXd(g * g.transpose()) : Eigen::MatrixXd(g.transpose() * g);
  k /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");

  Eigen::VectorXd lambda = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < -1e-9) throw NumericalError("kernel spectrum has a negative eigenvalue");
    lambda[i] = std::max(0.0, lambda[i]);
  }
  const double total = lambda.sum();
  if (!(total > 0.0)) throw NumericalError("kernel spectrum sums to zero");
  double h = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double p = lambda[i] / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::exp(h);
}

double mean_attribution(const std::vector<std::size_t>& indices, const AttributionScores& scores) {
  if (indices.empty()) throw InvalidArgument("mean attribution of an empty subset");
  double s = 0.0;
  for (std::size_t i : indices) {
    if (i >= scores.scores.size()) throw InvalidArgument("subset index out of range");
    s += scores.scores[i];
  }
  return s / static_cast<double>(indices.size());
}

SinkhornParams default_report_sinkhorn() {
  SinkhornParams p;
  p.epsilon = 0.05;
  return p;
}

double subset_ot(const FeatureMatrix& sub, const FeatureMatrix& val, const SinkhornParams& p) {
  const CostMatrix c = cost_matrix(sub, val);
  return sinkhorn(SimplexWeights::uniform(sub.n()), SimplexWeights::uniform(val.n()), c, p)
      .transport_cost;
}

SubsetReport score_subset(std::string method, const FeatureMatrix& sub, const FeatureMatrix& val,
                          const SinkhornParams& p) {
  SubsetReport r;
  r.method = std::move(method);
  r.k = sub.n();
  r.vendi = vendi_score(sub);
  const AttributionScores s = attribution_scores(sub, val);
  std::vector<std::size_t> all(sub.n());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  r.mean_attr = mean_attribution(all, s);
  r.ot_to_val = subset_ot(sub, val, p);
  r.sinkhorn = p;
  return r;
}

}  // namespace otselect
