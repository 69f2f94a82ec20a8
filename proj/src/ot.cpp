#include "otselect/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "otselect/errors.hpp"
#include "otselect/parallel.hpp"

namespace otselect {
namespace {

constexpr double kAnnealStageTol = 1e-3;

double median_of(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

void require_positive(const SimplexWeights& w, const char* side) {
  for (std::size_t i = 0; i < w.size(); ++i)
    if (!(w[i] > 0.0))
      throw InvalidArgument(std::string(side) + " marginal has a zero-weight atom at index " +
                            std::to_string(i) + "; strip zero-mass atoms before solving");
}

// log sum_k exp(x_k), computed stably.
double log_sum_exp(std::span<const double> x, double scale, std::span<const double> shift) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < x.size(); ++k) mx = std::max(mx, (shift[k] - x[k]) * scale);
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += std::exp((shift[k] - x[k]) * scale - mx);
  return mx + std::log(s);
}

}  // namespace

CostMatrix CostMatrix::from(DenseMatrix values) {
  for (double v : values.data)
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("cost entries must be finite and >= 0");
  return CostMatrix{std::move(values)};
}

SimplexWeights SimplexWeights::uniform(std::size_t n) {
  if (n == 0) throw InvalidArgument("simplex weights need at least one entry");
  return SimplexWeights(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

SimplexWeights SimplexWeights::from(std::vector<double> values, double tol) {
  if (values.empty()) throw InvalidArgument("simplex weights need at least one entry");
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("simplex weights must be finite and >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol)
    throw InvalidArgument("simplex weights sum to " + std::to_string(sum) + ", expected 1");
  return SimplexWeights(std::move(values));
}

SimplexWeights SimplexWeights::normalized(std::vector<double> values) {
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("weights must be finite and >= 0");
    sum += v;
  }
  if (!(sum > 0.0)) throw NumericalError("cannot normalize an all-zero weight vector");
  for (double& v : values) v /= sum;
  return SimplexWeights(std::move(values));
}

CostMatrix cost_matrix(const FeatureMatrix& train, const FeatureMatrix& val) {
  if (train.d() != val.d())
    throw DimensionMismatch("train has d=" + std::to_string(train.d()) + " but val has d=" +
                            std::to_string(val.d()));
  DenseMatrix c(train.n(), val.n());
  parallel_for(train.n(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto gi = train.row(i);
      for (std::size_t j = 0; j < val.n(); ++j)
        c(i, j) = std::clamp(2.0 - 2.0 * dot(gi, val.row(j)), 0.0, 4.0);
    }
  }, 16);
  return CostMatrix{std::move(c)};
}

void center_potentials(std::vector<double>& train, std::vector<double>& val) {
  if (train.empty()) return;
  const double mean = std::accumulate(train.begin(), train.end(), 0.0) / static_cast<double>(train.size());
  for (double& f : train) f -= mean;
  for (double& g : val) g += mean;
}

SinkhornSolver::SinkhornSolver(const CostMatrix& cost, SinkhornParams params)
    : cost_(cost), params_(params) {
  if (!(params_.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (!(params_.tol > 0.0)) throw InvalidArgument("tol must be positive");
  if (params_.max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
  if (cost.n() == 0 || cost.m() == 0) throw InvalidArgument("empty cost matrix");

  log_domain_ = params_.log_domain || params_.epsilon < 0.05 * median_of(cost.values.data);
  cost_t_ = transpose(cost.values);
  if (!log_domain_) {
    kernel_ = DenseMatrix(cost.n(), cost.m());
    for (std::size_t k = 0; k < kernel_.data.size(); ++k)
      kernel_.data[k] = std::exp(-cost.values.data[k] / params_.epsilon);
    kernel_t_ = transpose(kernel_);
  }
}

TransportSolution SinkhornSolver::solve(const SimplexWeights& w, const SimplexWeights& b,
                                        const DualPotentials* warm) const {
  const std::size_t n = cost_.n(), m = cost_.m();
  if (w.size() != n || b.size() != m)
    throw DimensionMismatch("marginal sizes do not match the cost matrix");
  require_positive(w, "training");
  require_positive(b, "validation");
  if (warm && (warm->train.size() != n || warm->val.size() != m))
    throw DimensionMismatch("warm-start potentials do not match the cost matrix");

  const double eps = params_.epsilon;
  std::vector<double> f(n, 0.0), g(m, 0.0);
  if (warm) {
    f = warm->train;
    g = warm->val;
  }
  std::vector<double> log_w(n), log_b(m);
  for (std::size_t i = 0; i < n; ++i) log_w[i] = std::log(w[i]);
  for (std::size_t j = 0; j < m; ++j) log_b[j] = std::log(b[j]);

  std::size_t it = 0;
  if (log_domain_) {
    std::vector<double> lse_row(n), lse_col(m);
    // Runs log-domain iterations at regularization eps_k until the row
    // violation drops to stage_tol or the shared iteration budget runs out.
    const auto run_stage = [&](double eps_k, double stage_tol, std::size_t cap) {
      const double inv_eps = 1.0 / eps_k;
      for (;; ++it) {
        parallel_for(n, [&](std::size_t begin, std::size_t end) {
          for (std::size_t i = begin; i < end; ++i)
            lse_row[i] = log_sum_exp(cost_.values.row(i), inv_eps, g);
        }, 16);
        double viol = 0.0;
        for (std::size_t i = 0; i < n; ++i) viol += std::abs(std::exp(f[i] * inv_eps + lse_row[i]) - w[i]);
        if (viol <= stage_tol || it >= cap) return;
        for (std::size_t i = 0; i < n; ++i) f[i] = eps_k * (log_w[i] - lse_row[i]);
        parallel_for(m, [&](std::size_t begin, std::size_t end) {
          for (std::size_t j = begin; j < end; ++j)
            lse_col[j] = log_sum_exp(cost_t_.row(j), inv_eps, f);
        }, 16);
        for (std::size_t j = 0; j < m; ++j) g[j] = eps_k * (log_b[j] - lse_col[j]);
      }
    };
    // Cold solves at small eps start from a large regularization and halve
    // it, carrying the potentials; the final stage is the requested problem
    // and keeps at least half of the iteration budget.
    if (!warm) {
      const double c_max = *std::max_element(cost_.values.data.begin(), cost_.values.data.end());
      const std::size_t anneal_cap = params_.max_iter / 2;
      for (double eps_k = 0.5 * c_max; eps_k > eps && it < anneal_cap; eps_k *= 0.5)
        run_stage(eps_k, std::max(params_.tol, kAnnealStageTol), anneal_cap);
    }
    run_stage(eps, params_.tol, params_.max_iter);
  } else {
    std::vector<double> a(n), v(m), kv(n), kta(m);
    for (std::size_t i = 0; i < n; ++i) a[i] = std::exp(f[i] / eps);
    for (std::size_t j = 0; j < m; ++j) v[j] = std::exp(g[j] / eps);
    const auto fail = [] {
      throw NumericalError(
          "Sinkhorn scaling under/overflowed in the standard domain; use log_domain for small epsilon");
    };
    for (;; ++it) {
      parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) kv[i] = dot(kernel_.row(i), v);
      }, 16);
      double viol = 0.0;
      for (std::size_t i = 0; i < n; ++i) viol += std::abs(a[i] * kv[i] - w[i]);
      if (viol <= params_.tol || it == params_.max_iter) break;
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = w[i] / kv[i];
        if (!(kv[i] > 0.0) || !std::isfinite(a[i])) fail();
      }
      parallel_for(m, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) kta[j] = dot(kernel_t_.row(j), a);
      }, 16);
      for (std::size_t j = 0; j < m; ++j) {
        v[j] = b[j] / kta[j];
        if (!(kta[j] > 0.0) || !std::isfinite(v[j])) fail();
      }
    }
    for (std::size_t i = 0; i < n; ++i) f[i] = eps * std::log(a[i]);
    for (std::size_t j = 0; j < m; ++j) g[j] = eps * std::log(v[j]);
    for (double x : f)
      if (!std::isfinite(x)) fail();
    for (double x : g)
      if (!std::isfinite(x)) fail();
  }

  TransportSolution sol;
  sol.iterations = it;
  sol.log_domain = log_domain_;
  sol.tol = params_.tol;
  sol.plan = DenseMatrix(n, m);
  std::vector<double> row_cost(n), row_entropy(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double cost = 0.0, ent = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double c = cost_(i, j);
        const double log_p = (f[i] + g[j] - c) / eps;
        const double p = std::exp(log_p);
        sol.plan(i, j) = p;
        cost += p * c;
        ent += p * (log_p - 1.0);
      }
      row_cost[i] = cost;
      row_entropy[i] = ent;
    }
  }, 16);
  double cost = 0.0, ent = 0.0, viol = 0.0;
  std::vector<double> col_sum(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    cost += row_cost[i];
    ent += row_entropy[i];
    double r = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      r += sol.plan(i, j);
      col_sum[j] += sol.plan(i, j);
    }
    viol += std::abs(r - w[i]);
  }
  for (std::size_t j = 0; j < m; ++j) viol += std::abs(col_sum[j] - b[j]);
  sol.transport_cost = cost;
  sol.value = cost + eps * ent;
  sol.marginal_violation = viol;
  center_potentials(f, g);
  sol.potential_train = std::move(f);
  sol.potential_val = std::move(g);
  return sol;
}

TransportSolution sinkhorn(const SimplexWeights& w, const SimplexWeights& b, const CostMatrix& c,
                           const SinkhornParams& p, const DualPotentials* warm) {
  return SinkhornSolver(c, p).solve(w, b, warm);
}

std::vector<double> ot_gradient(const SimplexWeights& w, const SimplexWeights& b,
                                const CostMatrix& c, const SinkhornParams& p) {
  return sinkhorn(w, b, c, p).potential_train;
}

namespace {

// min c.x subject to A x = rhs, x >= 0, with rhs >= 0. Two-phase tableau
// simplex with Bland's rule; sizes here are tiny.
std::vector<double> solve_standard_lp(const DenseMatrix& a, const std::vector<double>& rhs,
                                      const std::vector<double>& c) {
  const std::size_t rows = a.rows, vars = a.cols, total = vars + rows;
  constexpr double kPivotTol = 1e-12;
  // Tableau: rows x (total + 1); last column is the right-hand side.
  DenseMatrix t(rows, total + 1);
  std::vector<std::size_t> basis(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < vars; ++k) t(r, k) = a(r, k);
    t(r, vars + r) = 1.0;
    t(r, total) = rhs[r];
    basis[r] = vars + r;
  }

  const auto run = [&](const std::vector<double>& cost, std::size_t allowed) {
    for (std::size_t guard = 0; guard < 10000; ++guard) {
      // Reduced costs; Bland: first improving column.
      std::size_t enter = allowed;
      for (std::size_t k = 0; k < allowed; ++k) {
        double rc = cost[k];
        for (std::size_t r = 0; r < rows; ++r) rc -= cost[basis[r]] * t(r, k);
        if (rc < -1e-12) {
          enter = k;
          break;
        }
      }
      if (enter == allowed) return;
      std::size_t leave = rows;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows; ++r) {
        if (t(r, enter) > kPivotTol) {
          const double ratio = t(r, total) / t(r, enter);
          if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && basis[r] < basis[leave])) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave == rows) throw NumericalError("transport LP unbounded");
      const double piv = t(leave, enter);
      for (std::size_t k = 0; k <= total; ++k) t(leave, k) /= piv;
      for (std::size_t r = 0; r < rows; ++r) {
        if (r == leave) continue;
        const double factor = t(r, enter);
        if (factor == 0.0) continue;
        for (std::size_t k = 0; k <= total; ++k) t(r, k) -= factor * t(leave, k);
      }
      basis[leave] = enter;
    }
    throw NumericalError("transport LP did not terminate");
  };

  // Phase 1: minimize the sum of artificials.
  std::vector<double> phase1(total, 0.0);
  for (std::size_t r = 0; r < rows; ++r) phase1[vars + r] = 1.0;
  run(phase1, total);
  // Drive remaining artificials out of the basis where possible.
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] < vars) continue;
    for (std::size_t k = 0; k < vars; ++k) {
      if (std::abs(t(r, k)) > 1e-9) {
        const double piv = t(r, k);
        for (std::size_t q = 0; q <= total; ++q) t(r, q) /= piv;
        for (std::size_t s = 0; s < rows; ++s) {
          if (s == r) continue;
          const double factor = t(s, k);
          if (factor == 0.0) continue;
          for (std::size_t q = 0; q <= total; ++q) t(s, q) -= factor * t(r, q);
        }
        basis[r] = k;
        break;
      }
    }
  }
  // Phase 2 over the original variables only.
  std::vector<double> phase2(total, 0.0);
  std::copy(c.begin(), c.end(), phase2.begin());
  run(phase2, vars);

  std::vector<double> x(vars, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    if (basis[r] < vars) x[basis[r]] = std::max(0.0, t(r, total));
  return x;
}

}  // namespace

ExactTransport exact_ot_small(const SimplexWeights& w, const SimplexWeights& b,
                              const CostMatrix& c) {
  const std::size_t n = c.n(), m = c.m();
  if (n > kExactOtMaxSize || m > kExactOtMaxSize)
    throw InvalidArgument("exact_ot_small supports n, m <= " + std::to_string(kExactOtMaxSize));
  if (w.size() != n || b.size() != m) throw DimensionMismatch("marginal sizes do not match the cost matrix");

  // Row constraints for every i, column constraints for all but the last j
  // (the last is implied by the totals).
  const std::size_t rows = n + m - 1;
  DenseMatrix a(rows, n * m);
  std::vector<double> rhs(rows);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) a(i, i * m + j) = 1.0;
    rhs[i] = w[i];
  }
  for (std::size_t j = 0; j + 1 < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) a(n + j, i * m + j) = 1.0;
    rhs[n + j] = b[j];
  }
  const std::vector<double> x = solve_standard_lp(a, rhs, c.values.data);

  ExactTransport out;
  out.plan = DenseMatrix(n, m, x);
  for (std::size_t k = 0; k < x.size(); ++k) out.value += x[k] * c.values.data[k];
  return out;
}

}  // namespace otselect
