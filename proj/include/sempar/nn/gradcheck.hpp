#pragma once

#include <functional>

#include "sempar/nn/param_store.hpp"
#include "sempar/util/rng.hpp"

namespace sempar::nn {

struct GradCheckResult {
  double max_rel_err = 0;
  int coords_checked = 0;
  std::string worst_param;
  double worst_analytic = 0;
  double worst_numeric = 0;
};

// Compares the tape gradient of a scalar loss against central differences on
// a random subsample of parameter coordinates.  The relative error per
// coordinate is |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
// build must construct the loss on the given tape from the store's current
// values (and must be deterministic: dropout off, fixed inputs).
GradCheckResult gradient_check(const std::function<Var(Tape&)>& build,
                               ParamStore& store, util::Rng& rng,
                               int min_coords = 200, double epsilon = 1e-5);

}  // namespace sempar::nn
