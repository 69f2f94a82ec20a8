#include "otselect/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "otselect/errors.hpp"

namespace otselect {

void EvoParams::validate() const {
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidArgument("rho must lie in (0, 1]");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InvalidArgument("learning rate must be >= 0");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (!(std_guard > 0.0)) throw InvalidArgument("std_guard must be positive");
  if (!std::isfinite(dual_shift)) throw InvalidArgument("dual_shift must be finite");
}

std::size_t selection_budget(std::size_t n, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidArgument("rho must lie in (0, 1]");
  // The slack absorbs representation error in products such as 100 * 0.29.
  const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * rho + 1e-9));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n, 1));
}

std::vector<double> standardize(const std::vector<double>& v, double guard) {
  if (v.empty()) return {};
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(v.size());
  if (sd < guard) return std::vector<double>(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean) / sd;
  return out;
}

SimplexWeights exp_update(const SimplexWeights& w, const std::vector<double>& g, double lr) {
  if (g.size() != w.size()) throw DimensionMismatch("gradient and weights differ in length");
  if (!(lr >= 0.0)) throw InvalidArgument("learning rate must be >= 0");
  std::vector<double> next(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) next[i] = w[i] * std::exp(-lr * g[i]);
  return SimplexWeights::normalized(std::move(next));
}

std::vector<std::size_t> top_k(const std::vector<double>& values, std::size_t k) {
  if (k < 1 || k > values.size())
    throw InvalidArgument("top_k: k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(values.size()) + "]");
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return values[a] > values[b] || (values[a] == values[b] && a < b);
                    });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double weight_entropy(const SimplexWeights& w) {
  double h = 0.0;
  for (double x : w.values())
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

}  // namespace otselect
