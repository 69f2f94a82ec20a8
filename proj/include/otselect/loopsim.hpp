#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "otselect/errors.hpp"
#include "otselect/features.hpp"
#include "otselect/methods.hpp"
#include "otselect/metrics.hpp"

namespace otselect {

// One component of the target distribution: samples are
// normalize(direction + z / sqrt(concentration)) with z ~ N(0, I/d).
struct MixtureComponent {
  std::vector<double> direction;  // unit norm
  double concentration = 20.0;
  double weight = 1.0;
};

struct LoopConfig {
  std::size_t d = 32;
  std::size_t m_val = 100;
  std::size_t n_cand = 200;
  std::size_t n_seed = 20;
  std::size_t iterations = 3;
  // Explicit components; when empty, mixture_count random directions with
  // mixture_concentration are drawn from the seed.
  std::vector<MixtureComponent> mixture;
  std::size_t mixture_count = 4;
  double mixture_concentration = 20.0;
  double drift = 0.0;       // radians of mean rotation per iteration
  double redundancy = 0.0;  // share of candidates resampled near the previous batch
  double rho = 0.2;
  std::vector<std::string> methods = {"evoselect"};
  MethodConfig method;      // rho and seed are overwritten per run
  SinkhornParams report_sinkhorn = default_report_sinkhorn();
  std::uint64_t seed = 0;

  void validate() const;
};

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// key = value lines; '#' starts a comment. See README for the keys.
LoopConfig parse_loop_config(const std::string& text);
LoopConfig load_loop_config(const std::filesystem::path& path);

// Target mixture with every component resolved (explicit or drawn).
std::vector<MixtureComponent> resolve_mixture(const LoopConfig& cfg);

// Fixed seeded unit vector the component means rotate toward under drift.
std::vector<double> drift_axis(const LoopConfig& cfg);

FeatureMatrix sample_target(const std::vector<MixtureComponent>& mixture, std::size_t count,
                            std::uint64_t stream_seed, double rotation = 0.0,
                            const std::vector<double>* axis = nullptr);

// Validation and seed sets, both drawn from the undrifted target.
FeatureMatrix validation_set(const LoopConfig& cfg);
FeatureMatrix seed_pool(const LoopConfig& cfg);

// Iteration-t candidates (t >= 1). A share `redundancy` are perturbations of
// rows of prev (scale 0.05, renormalized); the rest come from the target
// with means rotated by drift * t. Deterministic in (cfg.seed, t).
FeatureMatrix generate_candidates(const LoopConfig& cfg, std::size_t t, const FeatureMatrix* prev);

struct LoopRecord {
  std::size_t iter = 0;
  std::string method;
  double ot_to_val = 0.0;
  double vendi = 0.0;
  double mean_attr = 0.0;
  std::size_t selected_count = 0;
  std::size_t pool_size = 0;
};

struct LoopReport {
  std::vector<LoopRecord> records;      // iteration-major, methods in config order
  std::vector<SubsetReport> comparison; // per method, subsets of the last batch
  std::uint64_t seed = 0;

  const LoopRecord& at(std::size_t iter, const std::string& method) const;
};

// Repeats generate -> select -> accumulate for cfg.iterations rounds; the
// training stage is replaced by scoring the accumulated pool.
LoopReport run_loop(const LoopConfig& cfg);

// Scores each method's subset of one candidate batch.
std::vector<SubsetReport> compare_methods(const FeatureMatrix& train, const FeatureMatrix& val,
                                          const std::vector<std::string>& methods,
                                          const MethodConfig& cfg, const SinkhornParams& report);

}  // namespace otselect
