#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "otselect/baselines.hpp"
#include "otselect/selection.hpp"

namespace otselect {

inline constexpr std::array<std::string_view, 6> kMethodNames = {
    "evoselect", "random", "attribution", "diversity", "attrdiv", "tsds"};

bool is_known_method(std::string_view name);

// Everything any selector may need; each method reads its own fields.
struct MethodConfig {
  double rho = 0.2;
  std::uint64_t seed = 0;
  EvoParams evo;
  double cluster_ratio = 0.1;
  TsdsParams tsds;
};

// Dispatches by name. Throws UnknownMethod for names outside kMethodNames.
SelectionResult run_method(std::string_view method, const FeatureMatrix& train,
                           const FeatureMatrix& val, const MethodConfig& cfg);

}  // namespace otselect
