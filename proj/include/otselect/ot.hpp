#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "otselect/features.hpp"
#include "otselect/matrix.hpp"

namespace otselect {

// Squared Euclidean costs between training rows (n) and validation rows (m).
struct CostMatrix {
  DenseMatrix values;

  std::size_t n() const { return values.rows; }
  std::size_t m() const { return values.cols; }
  double operator()(std::size_t i, std::size_t j) const { return values(i, j); }

  // Validates finiteness and nonnegativity.
  static CostMatrix from(DenseMatrix values);
};

// Nonnegative weights summing to one.
class SimplexWeights {
 public:
  SimplexWeights() = default;

  static SimplexWeights uniform(std::size_t n);
  // Throws InvalidArgument if an entry is negative/non-finite or the sum
  // differs from 1 by more than tol.
  static SimplexWeights from(std::vector<double> values, double tol = 1e-9);
  // Divides by the L1 norm; entries must be nonnegative with a positive sum.
  static SimplexWeights normalized(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

  bool operator==(const SimplexWeights&) const = default;

 private:
  explicit SimplexWeights(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

struct SinkhornParams {
  double epsilon = 0.5;
  double tol = 1e-6;  // L1 violation of both marginals
  std::size_t max_iter = 10000;
  // Forces log-domain iterations. They are used regardless whenever
  // epsilon < 0.05 * median(C).
  bool log_domain = false;
};

struct TransportSolution {
  DenseMatrix plan;
  std::vector<double> potential_train;  // mean zero
  std::vector<double> potential_val;
  double value = 0.0;           // <P,C> + eps * sum P (log P - 1)
  double transport_cost = 0.0;  // <P,C>
  std::size_t iterations = 0;
  double marginal_violation = 0.0;  // row L1 + column L1 residual of plan
  bool log_domain = false;
  double tol = 0.0;

  bool converged() const { return marginal_violation <= tol; }
};

// Dual potentials used to warm start a solve. Any gauge is accepted.
struct DualPotentials {
  std::vector<double> train;
  std::vector<double> val;
};

// C_ij = 2 - 2<g_i, g_j>, clamped to [0, 4]; equals the squared distance for
// unit-norm rows.
CostMatrix cost_matrix(const FeatureMatrix& train, const FeatureMatrix& val);

// Reusable solver for one cost matrix and regularization; caches the Gibbs
// kernel so repeated solves with changing marginals are cheap.
class SinkhornSolver {
 public:
  SinkhornSolver(const CostMatrix& cost, SinkhornParams params);

  TransportSolution solve(const SimplexWeights& w, const SimplexWeights& b,
                          const DualPotentials* warm = nullptr) const;

  bool uses_log_domain() const { return log_domain_; }
  const SinkhornParams& params() const { return params_; }

 private:
  const CostMatrix& cost_;
  SinkhornParams params_;
  bool log_domain_ = false;
  DenseMatrix cost_t_;    // C transposed
  DenseMatrix kernel_;    // exp(-C/eps), standard domain only
  DenseMatrix kernel_t_;  // its transpose
};

TransportSolution sinkhorn(const SimplexWeights& w, const SimplexWeights& b, const CostMatrix& c,
                           const SinkhornParams& p, const DualPotentials* warm = nullptr);

struct ExactTransport {
  DenseMatrix plan;
  double value = 0.0;
};

inline constexpr std::size_t kExactOtMaxSize = 8;

// Unregularized optimum of min <P,C> over couplings of (w, b), solved as a
// linear program with the simplex method. Limited to n, m <= 8.
ExactTransport exact_ot_small(const SimplexWeights& w, const SimplexWeights& b,
                              const CostMatrix& c);

// Gradient of the entropic objective with respect to the training marginal:
// the mean-centered training dual potential.
std::vector<double> ot_gradient(const SimplexWeights& w, const SimplexWeights& b,
                                const CostMatrix& c, const SinkhornParams& p);

// Shifts potentials so mean(train) == 0, moving the offset into val.
void center_potentials(std::vector<double>& train, std::vector<double>& val);

}  // namespace otselect
