#include "otselect/selector.hpp"

#include <cmath>

#include "otselect/errors.hpp"

namespace otselect {
namespace {

constexpr double kSnapScale = 0x1.0p26;

void check_inputs(const FeatureMatrix& train, const FeatureMatrix& val) {
  if (train.n() == 0 || val.n() == 0) throw InvalidArgument("train and val must be non-empty");
  if (train.d() != val.d())
    throw DimensionMismatch("train has d=" + std::to_string(train.d()) + " but val has d=" +
                            std::to_string(val.d()));
}

}  // namespace

SelectionResult evoselect(const FeatureMatrix& train, const FeatureMatrix& val,
                          const EvoParams& params, const StepObserver& observer) {
  params.validate();
  check_inputs(train, val);

  const std::size_t n = train.n();
  SelectionResult result;
  result.method = "evoselect";
  result.k = selection_budget(n, params.rho);
  result.params_used = params;
  result.params = {{"rho", params.rho},
                   {"steps", static_cast<double>(params.steps)},
                   {"lr", params.lr},
                   {"epsilon", params.epsilon},
                   {"tol", params.sinkhorn.tol},
                   {"max_iter", static_cast<double>(params.sinkhorn.max_iter)}};

  SinkhornParams sp = params.sinkhorn;
  sp.epsilon = params.epsilon;
  const CostMatrix cost = cost_matrix(train, val);
  const GramKernel gram = GramKernel::automatic(train);
  const SinkhornSolver solver(cost, sp);
  const SimplexWeights b = SimplexWeights::uniform(val.n());

  SimplexWeights w = SimplexWeights::uniform(n);
  if (observer) observer(0, w);
  DualPotentials warm;
  bool have_warm = false;

  for (std::size_t t = 0; t < params.steps; ++t) {
    const TransportSolution sol = solver.solve(w, b, have_warm ? &warm : nullptr);
    const std::vector<double> crowd = diversity_gradient(gram, w);

    StepRecord rec;
    rec.step = t;
    rec.ot_value = sol.value;
    rec.div_energy = 0.5 * dot(crowd, w.values());
    rec.entropy = weight_entropy(w);
    rec.sinkhorn_iterations = sol.iterations;
    rec.marginal_violation = sol.marginal_violation;
    rec.converged = sol.converged();
    result.trace.push_back(rec);

    std::vector<double> u = sol.potential_train;
    if (params.dual_shift != 0.0)
      for (double& x : u) x += params.dual_shift;
    const std::vector<double> zu = standardize(u, params.std_guard);
    const std::vector<double> zd = standardize(crowd, params.std_guard);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = std::nearbyint((zu[i] + zd[i]) * kSnapScale) / kSnapScale;

    w = exp_update(w, g, params.lr);
    if (observer) observer(t + 1, w);
    if (params.warm_start) {
      warm.train = sol.potential_train;
      warm.val = sol.potential_val;
      have_warm = true;
    }
  }

  result.selected = top_k(w, result.k);
  result.final_weights = std::move(w);
  return result;
}

}  // namespace otselect
