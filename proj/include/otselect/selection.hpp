#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "otselect/ot.hpp"

namespace otselect {

// Parameters of the OT + diversity selector. Defaults: lr 0.1, 10 steps,
// epsilon 0.5.
struct EvoParams {
  double rho = 0.2;
  std::size_t steps = 10;
  double lr = 0.1;
  double epsilon = 0.5;    // overrides sinkhorn.epsilon
  SinkhornParams sinkhorn;
  double std_guard = 1e-12;
  bool warm_start = true;  // reuse the previous step's potentials
  double dual_shift = 0.0; // added to the OT gradient before standardization

  void validate() const;
};

struct StepRecord {
  std::size_t step = 0;
  double ot_value = 0.0;     // regularized OT objective at w(step)
  double div_energy = 0.0;   // 1/2 w^T S w at w(step)
  double entropy = 0.0;      // -sum w log w at w(step)
  std::size_t sinkhorn_iterations = 0;
  double marginal_violation = 0.0;
  bool converged = true;
};

// Output shared by every selector.
struct SelectionResult {
  std::string method;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  std::vector<std::size_t> selected;  // strictly increasing
  SimplexWeights final_weights;
  std::vector<StepRecord> trace;
  // Parameters echoed into serialized output, in emission order.
  std::vector<std::pair<std::string, double>> params;
  std::optional<EvoParams> params_used;
  bool fallback = false;  // a degenerate case forced a fallback path

  bool operator==(const SelectionResult& o) const {
    return method == o.method && seed == o.seed && k == o.k && selected == o.selected &&
           final_weights == o.final_weights && fallback == o.fallback && params == o.params &&
           trace.size() == o.trace.size();
  }
};

// k = max(1, floor(n * rho)).
std::size_t selection_budget(std::size_t n, double rho);

// (v - mean) / max(popstd, guard).
std::vector<double> standardize(const std::vector<double>& v, double guard = 1e-12);

// w * exp(-lr * g), renormalized to the simplex.
SimplexWeights exp_update(const SimplexWeights& w, const std::vector<double>& g, double lr);

// Indices of the k largest entries (smaller index wins ties), ascending.
std::vector<std::size_t> top_k(const std::vector<double>& values, std::size_t k);
inline std::vector<std::size_t> top_k(const SimplexWeights& w, std::size_t k) {
  return top_k(w.values(), k);
}

double weight_entropy(const SimplexWeights& w);

}  // namespace otselect
