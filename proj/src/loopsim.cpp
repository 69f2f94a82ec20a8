#include "otselect/loopsim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "otselect/errors.hpp"
#include "otselect/rng.hpp"

namespace otselect {
namespace {

enum Stream : std::uint64_t { kMixture = 1, kAxis = 2, kVal = 3, kSeedPool = 4, kCandidates = 5 };

constexpr double kRedundancyNoise = 0.05;

std::uint64_t stream(std::uint64_t seed, std::uint64_t id, std::uint64_t t = 0) {
  return hash_combine(hash_combine(seed, id), t);
}

void normalize(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  for (double& x : v) x /= s;
}

std::vector<double> random_direction(Rng& rng, std::size_t d) {
  std::vector<double> v(d);
  do {
    for (double& x : v) x = rng.normal();
  } while (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }));
  normalize(v);
  return v;
}

// Rotates mean by angle within the plane spanned by mean and axis.
std::vector<double> rotate_toward(const std::vector<double>& mean, const std::vector<double>& axis,
                                  double angle) {
  std::vector<double> perp = axis;
  const double proj = dot(axis, mean);
  for (std::size_t k = 0; k < perp.size(); ++k) perp[k] -= proj * mean[k];
  double norm = 0.0;
  for (double x : perp) norm += x * x;
  if (norm < 1e-24) return mean;
  norm = std::sqrt(norm);
  std::vector<double> out(mean.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = std::cos(angle) * mean[k] + std::sin(angle) * perp[k] / norm;
  normalize(out);
  return out;
}

void sample_component(const MixtureComponent& c, Rng& rng, std::span<double> out) {
  const double scale = 1.0 / std::sqrt(c.concentration * static_cast<double>(out.size()));
  double norm = 0.0;
  do {
    norm = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] = c.direction[k] + scale * rng.normal();
      norm += out[k] * out[k];
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : out) x /= norm;
}

std::size_t pick_component(const std::vector<MixtureComponent>& mix, Rng& rng) {
  double total = 0.0;
  for (const auto& c : mix) total += c.weight;
  double u = rng.uniform() * total;
  for (std::size_t c = 0; c < mix.size(); ++c) {
    u -= mix[c].weight;
    if (u < 0.0) return c;
  }
  return mix.size() - 1;
}

[[noreturn]] void config_fail(std::size_t line, const std::string& key, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": field '" + key + "': " + msg);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, std::size_t line, const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || !std::isfinite(x)) config_fail(line, key, "expected a number, got '" + v + "'");
  return x;
}

std::uint64_t parse_uint(const std::string& v, std::size_t line, const std::string& key) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    config_fail(line, key, "expected a non-negative integer, got '" + v + "'");
  return x;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

}  // namespace

void LoopConfig::validate() const {
  const auto bad = [](const std::string& msg) { throw ConfigError(msg); };
  if (d < 1) bad("d must be at least 1");
  if (m_val < 1) bad("m_val must be at least 1");
  if (n_cand < 1) bad("n_cand must be at least 1");
  if (iterations < 1) bad("iterations must be at least 1");
  if (!(redundancy >= 0.0 && redundancy < 1.0)) bad("redundancy must lie in [0, 1)");
  if (!(drift >= 0.0)) bad("drift must be >= 0");
  if (!(rho > 0.0 && rho <= 1.0)) bad("rho must lie in (0, 1]");
  if (methods.empty()) bad("at least one method is required");
  for (const auto& m : methods)
    if (!is_known_method(m)) bad("unknown method '" + m + "'");
  if (mixture.empty() && (mixture_count < 1 || !(mixture_concentration > 0.0)))
    bad("mixture needs count >= 1 and concentration > 0");
  for (const auto& c : mixture) {
    if (c.direction.size() != d) bad("mixture component dimension does not match d");
    if (!(c.concentration > 0.0) || !(c.weight > 0.0)) bad("mixture concentration and weight must be positive");
  }
}

LoopConfig parse_loop_config(const std::string& text) {
  LoopConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  std::vector<std::pair<std::size_t, std::string>> components;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_fail(lineno, line, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const auto num = [&] { return parse_double(val, lineno, key); };
    const auto uint = [&] { return parse_uint(val, lineno, key); };

    if (key == "d") cfg.d = uint();
    else if (key == "m_val") cfg.m_val = uint();
    else if (key == "n_cand") cfg.n_cand = uint();
    else if (key == "n_seed") cfg.n_seed = uint();
    else if (key == "iterations") cfg.iterations = uint();
    else if (key == "drift") cfg.drift = num();
    else if (key == "redundancy") cfg.redundancy = num();
    else if (key == "rho") cfg.rho = num();
    else if (key == "seed") cfg.seed = uint();
    else if (key == "methods" || key == "method") {
      cfg.methods = split(val, ',');
      for (const auto& m : cfg.methods)
        if (!is_known_method(m)) config_fail(lineno, key, "unknown method '" + m + "'");
    } else if (key == "mixture.count") cfg.mixture_count = uint();
    else if (key == "mixture.concentration") cfg.mixture_concentration = num();
    else if (key == "mixture.component") components.emplace_back(lineno, val);
    else if (key == "steps") cfg.method.evo.steps = uint();
    else if (key == "lr") cfg.method.evo.lr = num();
    else if (key == "epsilon") cfg.method.evo.epsilon = num();
    else if (key == "sinkhorn_tol") cfg.method.evo.sinkhorn.tol = num();
    else if (key == "cluster_ratio") cfg.method.cluster_ratio = num();
    else if (key == "tsds.max_k") cfg.method.tsds.max_k = uint();
    else if (key == "tsds.kde_k") cfg.method.tsds.kde_k = uint();
    else if (key == "tsds.sigma") cfg.method.tsds.sigma = num();
    else if (key == "tsds.alpha") cfg.method.tsds.alpha = num();
    else if (key == "tsds.c_scale") cfg.method.tsds.c_scale = num();
    else if (key == "report_epsilon") cfg.report_sinkhorn.epsilon = num();
    else config_fail(lineno, key, "unknown key");
  }
  // "concentration weight : v1, v2, ..." per component.
  for (const auto& [line, spec] : components) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) config_fail(line, "mixture.component", "expected 'concentration weight : direction'");
    const auto head = split(trim(spec.substr(0, colon)), ' ');
    std::vector<std::string> parts;
    for (const auto& h : head)
      if (!h.empty()) parts.push_back(h);
    if (parts.empty() || parts.size() > 2) config_fail(line, "mixture.component", "expected 'concentration [weight]'");
    MixtureComponent c;
    c.concentration = parse_double(parts[0], line, "mixture.component");
    if (parts.size() == 2) c.weight = parse_double(parts[1], line, "mixture.component");
    for (const auto& x : split(spec.substr(colon + 1), ','))
      c.direction.push_back(parse_double(x, line, "mixture.component"));
    if (c.direction.size() != cfg.d)
      config_fail(line, "mixture.component", "direction has " + std::to_string(c.direction.size()) +
                                                 " entries but d = " + std::to_string(cfg.d));
    double norm = 0.0;
    for (double x : c.direction) norm += x * x;
    if (norm == 0.0) config_fail(line, "mixture.component", "direction is zero");
    normalize(c.direction);
    cfg.mixture.push_back(std::move(c));
  }
  cfg.validate();
  return cfg;
}

LoopConfig load_loop_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_loop_config({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()});
}

std::vector<MixtureComponent> resolve_mixture(const LoopConfig& cfg) {
  if (!cfg.mixture.empty()) return cfg.mixture;
  Rng rng(stream(cfg.seed, kMixture));
  std::vector<MixtureComponent> mix(cfg.mixture_count);
  for (auto& c : mix) {
    c.direction = random_direction(rng, cfg.d);
    c.concentration = cfg.mixture_concentration;
  }
  return mix;
}

std::vector<double> drift_axis(const LoopConfig& cfg) {
  Rng rng(stream(cfg.seed, kAxis));
  return random_direction(rng, cfg.d);
}

FeatureMatrix sample_target(const std::vector<MixtureComponent>& mixture, std::size_t count,
                            std::uint64_t stream_seed, double rotation,
                            const std::vector<double>* axis) {
  std::vector<MixtureComponent> mix = mixture;
  if (rotation != 0.0 && axis)
    for (auto& c : mix) c.direction = rotate_toward(c.direction, *axis, rotation);
  const std::size_t d = mix.front().direction.size();
  Rng rng(stream_seed);
  DenseMatrix out(count, d);
  for (std::size_t i = 0; i < count; ++i) sample_component(mix[pick_component(mix, rng)], rng, out.row(i));
  return FeatureMatrix::from_unit_rows(std::move(out));
}

FeatureMatrix validation_set(const LoopConfig& cfg) {
  return sample_target(resolve_mixture(cfg), cfg.m_val, stream(cfg.seed, kVal));
}

FeatureMatrix seed_pool(const LoopConfig& cfg) {
  if (cfg.n_seed == 0) return FeatureMatrix{DenseMatrix(0, cfg.d), cfg.seed, {}};
  return sample_target(resolve_mixture(cfg), cfg.n_seed, stream(cfg.seed, kSeedPool));
}

FeatureMatrix generate_candidates(const LoopConfig& cfg, std::size_t t, const FeatureMatrix* prev) {
  if (t < 1) throw InvalidArgument("candidate iterations start at 1");
  const auto mix = resolve_mixture(cfg);
  const auto axis = drift_axis(cfg);
  std::vector<MixtureComponent> rotated = mix;
  for (auto& c : rotated)
    c.direction = rotate_toward(c.direction, axis, cfg.drift * static_cast<double>(t));

  const bool can_reuse = prev && prev->n() > 0 && cfg.redundancy > 0.0;
  Rng rng(stream(cfg.seed, kCandidates, t));
  DenseMatrix out(cfg.n_cand, cfg.d);
  const double noise = kRedundancyNoise / std::sqrt(static_cast<double>(cfg.d));
  for (std::size_t i = 0; i < cfg.n_cand; ++i) {
    auto row = out.row(i);
    if (can_reuse && rng.uniform() < cfg.redundancy) {
      const auto src = prev->row(rng.below(prev->n()));
      double norm = 0.0;
      for (std::size_t k = 0; k < cfg.d; ++k) {
        row[k] = src[k] + noise * rng.normal();
        norm += row[k] * row[k];
      }
      norm = std::sqrt(norm);
      for (double& x : row) x /= norm;
    } else {
      sample_component(rotated[pick_component(rotated, rng)], rng, row);
    }
  }
  return FeatureMatrix::from_unit_rows(std::move(out));
}

const LoopRecord& LoopReport::at(std::size_t iter, const std::string& method) const {
  for (const auto& r : records)
    if (r.iter == iter && r.method == method) return r;
  throw InvalidArgument("no record for iteration " + std::to_string(iter) + " and method " + method);
}

std::vector<SubsetReport> compare_methods(const FeatureMatrix& train, const FeatureMatrix& val,
                                          const std::vector<std::string>& methods,
                                          const MethodConfig& cfg, const SinkhornParams& report) {
  std::vector<SubsetReport> out;
  for (const auto& m : methods) {
    const SelectionResult sel = run_method(m, train, val, cfg);
    out.push_back(score_subset(m, train.take(sel.selected), val, report));
  }
  return out;
}

LoopReport run_loop(const LoopConfig& cfg) {
  cfg.validate();
  const FeatureMatrix val = validation_set(cfg);
  const FeatureMatrix seeds = seed_pool(cfg);

  MethodConfig mc = cfg.method;
  mc.rho = cfg.rho;
  mc.seed = cfg.seed;

  // Accumulated pool per method, stored as row lists.
  std::vector<std::vector<double>> pools(cfg.methods.size(), seeds.values.data);
  std::vector<std::size_t> pool_rows(cfg.methods.size(), seeds.n());

  LoopReport report;
  report.seed = cfg.seed;
  FeatureMatrix prev;
  for (std::size_t t = 1; t <= cfg.iterations; ++t) {
    FeatureMatrix cand = generate_candidates(cfg, t, t > 1 ? &prev : nullptr);
    MethodConfig step_cfg = mc;
    step_cfg.seed = hash_combine(cfg.seed, t);
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      const SelectionResult sel = run_method(cfg.methods[mi], cand, val, step_cfg);
      for (std::size_t i : sel.selected) {
        const auto r = cand.row(i);
        pools[mi].insert(pools[mi].end(), r.begin(), r.end());
      }
      pool_rows[mi] += sel.selected.size();

      FeatureMatrix pool;
      pool.values = DenseMatrix(pool_rows[mi], cfg.d, pools[mi]);
      const SubsetReport s = score_subset(cfg.methods[mi], pool, val, cfg.report_sinkhorn);
      report.records.push_back({t, cfg.methods[mi], s.ot_to_val, s.vendi, s.mean_attr,
                                sel.selected.size(), pool_rows[mi]});
    }
    prev = std::move(cand);
  }
  report.comparison = compare_methods(prev, val, cfg.methods, mc, cfg.report_sinkhorn);
  return report;
}

}  // namespace otselect
