#include "otselect/methods.hpp"

#include <algorithm>

#include "otselect/errors.hpp"
#include "otselect/selector.hpp"

namespace otselect {

bool is_known_method(std::string_view name) {
  return std::find(kMethodNames.begin(), kMethodNames.end(), name) != kMethodNames.end();
}

SelectionResult run_method(std::string_view method, const FeatureMatrix& train,
                           const FeatureMatrix& val, const MethodConfig& cfg) {
  if (method == "evoselect") {
    EvoParams p = cfg.evo;
    p.rho = cfg.rho;
    SelectionResult r = evoselect(train, val, p);
    r.seed = cfg.seed;
    return r;
  }
  if (method == "random") return select_random(train.n(), cfg.rho, cfg.seed);
  if (method == "attribution") return select_attribution(train, val, cfg.rho);
  if (method == "diversity") return select_diversity(train, cfg.rho, cfg.cluster_ratio, cfg.seed);
  if (method == "attrdiv") return select_attr_div(train, val, cfg.rho, cfg.cluster_ratio, cfg.seed);
  if (method == "tsds") {
    TsdsParams p = cfg.tsds;
    p.seed = cfg.seed;
    return select_tsds(train, val, cfg.rho, p);
  }
  throw UnknownMethod("unknown method '" + std::string(method) + "'");
}

}  // namespace otselect
