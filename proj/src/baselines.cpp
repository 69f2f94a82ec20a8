#include "otselect/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "otselect/errors.hpp"
#include "otselect/ot.hpp"
#include "otselect/parallel.hpp"
#include "otselect/rng.hpp"

namespace otselect {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

// Uniform weight on the chosen indices.
SimplexWeights indicator_weights(std::size_t n, const std::vector<std::size_t>& chosen) {
  std::vector<double> w(n, 0.0);
  for (std::size_t i : chosen) w[i] = 1.0;
  return SimplexWeights::normalized(std::move(w));
}

SelectionResult make_result(std::string method, std::size_t n, std::size_t k,
                            std::vector<std::size_t> chosen, std::uint64_t seed) {
  std::sort(chosen.begin(), chosen.end());
  SelectionResult r;
  r.method = std::move(method);
  r.seed = seed;
  r.k = k;
  r.final_weights = indicator_weights(n, chosen);
  r.selected = std::move(chosen);
  return r;
}

std::size_t nearest_centroid(std::span<const double> p, const DenseMatrix& centroids, double* dist) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows; ++c) {
    const double d = squared_distance(p, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

}  // namespace

AttributionScores attribution_scores(const FeatureMatrix& train, const FeatureMatrix& val) {
  if (train.d() != val.d()) throw DimensionMismatch("train and val feature dimensions differ");
  if (val.n() == 0) throw InvalidArgument("validation set is empty");
  std::vector<double> mean(val.d(), 0.0);
  for (std::size_t j = 0; j < val.n(); ++j) {
    const auto r = val.row(j);
    for (std::size_t k = 0; k < r.size(); ++k) mean[k] += r[k];
  }
  for (double& x : mean) x /= static_cast<double>(val.n());
  AttributionScores out;
  out.scores.resize(train.n());
  for (std::size_t i = 0; i < train.n(); ++i) out.scores[i] = dot(train.row(i), mean);
  return out;
}

KMeansResult kmeans(const FeatureMatrix& points, std::size_t clusters, std::uint64_t seed,
                    std::size_t max_iter) {
  const std::size_t n = points.n(), d = points.d();
  if (n == 0) throw InvalidArgument("kmeans needs at least one point");
  clusters = std::clamp<std::size_t>(clusters, 1, n);
  Rng rng(hash_combine(seed, 0x6b6d65616e73ULL));

  KMeansResult res;
  res.centroids = DenseMatrix(clusters, d);
  // k-means++ seeding.
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.below(n);
  for (std::size_t c = 0; c < clusters; ++c) {
    if (c > 0) {
      const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
      if (total > 0.0) {
        double target = rng.uniform() * total;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          target -= d2[i];
          if (target < 0.0 && d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      } else {
        pick = rng.below(n);
      }
    }
    const auto src = points.row(pick);
    std::copy(src.begin(), src.end(), res.centroids.row(c).begin());
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], squared_distance(points.row(i), res.centroids.row(c)));
  }

  std::vector<std::size_t> assign(n, clusters);
  std::vector<double> dist(n, 0.0);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = nearest_centroid(points.row(i), res.centroids, &dist[i]);
      if (c != assign[i]) {
        assign[i] = c;
        changed = true;
      }
    }
    res.iterations = iter + 1;
    if (!changed) break;

    DenseMatrix sums(clusters, d);
    std::vector<std::size_t> counts(clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto s = sums.row(assign[i]);
      const auto p = points.row(i);
      for (std::size_t k = 0; k < d; ++k) s[k] += p[k];
      ++counts[assign[i]];
    }
    std::vector<bool> used(n, false);
    for (std::size_t c = 0; c < clusters; ++c) {
      auto dst = res.centroids.row(c);
      if (counts[c] > 0) {
        const auto s = sums.row(c);
        for (std::size_t k = 0; k < d; ++k) dst[k] = s[k] / static_cast<double>(counts[c]);
        continue;
      }
      // Empty: move to the point farthest from its centroid.
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i)
        if (!used[i] && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      if (far == n) continue;
      used[far] = true;
      const auto p = points.row(far);
      std::copy(p.begin(), p.end(), dst.begin());
    }
  }

  res.assignment = std::move(assign);
  res.sizes.assign(clusters, 0);
  for (std::size_t c : res.assignment) ++res.sizes[c];
  return res;
}

std::vector<std::size_t> diversity_fill_order(const FeatureMatrix& points, double cluster_ratio,
                                              std::uint64_t seed) {
  if (!(cluster_ratio > 0.0 && cluster_ratio <= 1.0))
    throw InvalidArgument("cluster_ratio must lie in (0, 1]");
  const std::size_t n = points.n();
  const auto k_clusters = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(static_cast<double>(n) * cluster_ratio + 1e-9)));
  const KMeansResult km = kmeans(points, k_clusters, seed);

  std::vector<double> to_centroid(n);
  for (std::size_t i = 0; i < n; ++i)
    to_centroid[i] = squared_distance(points.row(i), km.centroids.row(km.assignment[i]));

  std::vector<std::size_t> cluster_order(km.sizes.size());
  std::iota(cluster_order.begin(), cluster_order.end(), 0);
  std::stable_sort(cluster_order.begin(), cluster_order.end(),
                   [&](std::size_t a, std::size_t b) { return km.sizes[a] < km.sizes[b]; });

  std::vector<std::vector<std::size_t>> members(km.sizes.size());
  for (std::size_t i = 0; i < n; ++i) members[km.assignment[i]].push_back(i);

  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t c : cluster_order) {
    auto& mem = members[c];
    std::stable_sort(mem.begin(), mem.end(), [&](std::size_t a, std::size_t b) {
      return to_centroid[a] < to_centroid[b];
    });
    order.insert(order.end(), mem.begin(), mem.end());
  }
  return order;
}

SelectionResult select_random(std::size_t n, double rho, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("cannot select from an empty pool");
  const std::size_t k = selection_budget(n, rho);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(hash_combine(seed, 0x72616e646f6dULL));
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  idx.resize(k);
  SelectionResult r = make_result("random", n, k, std::move(idx), seed);
  r.params = {{"rho", rho}};
  return r;
}

SelectionResult select_attribution(const FeatureMatrix& train, const FeatureMatrix& val, double rho) {
  const AttributionScores s = attribution_scores(train, val);
  const std::size_t k = selection_budget(train.n(), rho);
  SelectionResult r = make_result("attribution", train.n(), k, top_k(s.scores, k), 0);
  r.params = {{"rho", rho}};
  return r;
}

SelectionResult select_diversity(const FeatureMatrix& train, double rho, double cluster_ratio,
                                 std::uint64_t seed) {
  if (train.n() == 0) throw InvalidArgument("cannot select from an empty pool");
  const std::size_t k = selection_budget(train.n(), rho);
  std::vector<std::size_t> order = diversity_fill_order(train, cluster_ratio, seed);
  order.resize(k);
  SelectionResult r = make_result("diversity", train.n(), k, std::move(order), seed);
  r.params = {{"rho", rho}, {"cluster_ratio", cluster_ratio}};
  return r;
}

SelectionResult select_attr_div(const FeatureMatrix& train, const FeatureMatrix& val, double rho,
                                double cluster_ratio, std::uint64_t seed) {
  const std::size_t n = train.n();
  if (n == 0) throw InvalidArgument("cannot select from an empty pool");
  const std::size_t k = selection_budget(n, rho);
  const AttributionScores s = attribution_scores(train, val);
  const std::size_t drop = n / 4;

  // Rank by score descending, smaller index first among ties; the tail is
  // dropped.
  std::vector<std::size_t> rank(n);
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(),
                   [&](std::size_t a, std::size_t b) { return s.scores[a] > s.scores[b]; });
  std::vector<std::size_t> survivors(rank.begin(), rank.end() - static_cast<std::ptrdiff_t>(drop));
  std::sort(survivors.begin(), survivors.end());
  if (k > survivors.size())
    throw InfeasibleBudget("budget " + std::to_string(k) + " exceeds the " +
                           std::to_string(survivors.size()) + " examples left after pruning");

  const FeatureMatrix pruned = train.take(survivors);
  std::vector<std::size_t> order = diversity_fill_order(pruned, cluster_ratio, seed);
  order.resize(k);
  for (std::size_t& i : order) i = survivors[i];
  SelectionResult r = make_result("attrdiv", n, k, std::move(order), seed);
  r.params = {{"rho", rho}, {"cluster_ratio", cluster_ratio}, {"pruned", static_cast<double>(drop)}};
  return r;
}

SelectionResult select_tsds(const FeatureMatrix& train, const FeatureMatrix& val, double rho,
                            const TsdsParams& p) {
  const std::size_t n = train.n(), m = val.n();
  if (n == 0 || m == 0) throw InvalidArgument("train and val must be non-empty");
  if (!(p.sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  if (p.kde_k < 1 || p.max_k < p.kde_k) throw InvalidArgument("need max_k >= kde_k >= 1");
  const std::size_t k = selection_budget(n, rho);
  const std::size_t kde_k = std::min(p.kde_k, n - 1);

  // (1) Each validation point sends 1/m mass to its nearest training point.
  // Its nearest neighbour is always among the max_k nearest, so the cap
  // does not change the result.
  const CostMatrix cost = cost_matrix(train, val);
  std::vector<double> raw(n, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (cost(i, j) < cost(best, j)) best = i;
    raw[best] += 1.0 / static_cast<double>(m);
  }

  // (2) Gaussian KDE over each point's kde_k nearest training neighbours.
  std::vector<double> density(n, 0.0);
  if (kde_k > 0) {
    const double inv_two_sigma2 = 1.0 / (2.0 * p.sigma * p.sigma);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      std::vector<double> d2;
      for (std::size_t i = begin; i < end; ++i) {
        d2.clear();
        for (std::size_t l = 0; l < n; ++l)
          if (l != i) d2.push_back(std::max(0.0, 2.0 - 2.0 * dot(train.row(i), train.row(l))));
        std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(kde_k - 1), d2.end());
        std::sort(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(kde_k));
        double q = 0.0;
        for (std::size_t l = 0; l < kde_k; ++l) q += std::exp(-d2[l] * inv_two_sigma2);
        density[i] = q;
      }
    }, 16);
  }
  const double mean_density = std::accumulate(density.begin(), density.end(), 0.0) / static_cast<double>(n);

  // (3) Down-weight dense regions.
  std::vector<double> adjusted(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q_hat = mean_density > 0.0 ? density[i] / mean_density : 0.0;
    adjusted[i] = raw[i] / (1.0 + p.c_scale * p.alpha * q_hat);
  }
  bool fallback = false;
  if (std::accumulate(adjusted.begin(), adjusted.end(), 0.0) <= 0.0) {
    std::fill(adjusted.begin(), adjusted.end(), 1.0);
    fallback = true;
  }

  // (4) Weighted sampling without replacement (exponential-key method).
  // Zero-weight examples only fill the budget once the support runs out,
  // uniformly at random.
  Rng rng(hash_combine(p.seed, 0x74736473ULL));
  struct Key {
    int tier;
    double key;
    std::size_t index;
  };
  std::vector<Key> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform_open0();
    keys[i] = adjusted[i] > 0.0 ? Key{1, std::log(u) / adjusted[i], i} : Key{0, u, i};
  }
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k), keys.end(),
                    [](const Key& a, const Key& b) {
                      if (a.tier != b.tier) return a.tier > b.tier;
                      if (a.key != b.key) return a.key > b.key;
                      return a.index < b.index;
                    });
  std::vector<std::size_t> chosen(k);
  for (std::size_t t = 0; t < k; ++t) chosen[t] = keys[t].index;

  SelectionResult r = make_result("tsds", n, k, std::move(chosen), p.seed);
  r.final_weights = SimplexWeights::normalized(adjusted);
  r.fallback = fallback;
  r.params = {{"rho", rho},
              {"max_k", static_cast<double>(std::min(p.max_k, n))},
              {"kde_k", static_cast<double>(kde_k)},
              {"sigma", p.sigma},
              {"alpha", p.alpha},
              {"c_scale", p.c_scale}};
  return r;
}

}  // namespace otselect
