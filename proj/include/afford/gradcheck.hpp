#pragma once

#include <functional>
#include <map>
#include <string>

#include "afford/param_store.hpp"

namespace afford {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::map<std::string, double> per_param;
};

// Central finite differences against the analytic gradients.
//
// `loss` must be a deterministic pure forward pass over the store's current
// values; `backward` must leave the analytic gradient of that loss in the
// store (starting from zeroed gradients). Relative error per element is
// |a - n| / max(|a|, |n|, 1e-4); the floor absorbs finite-difference noise
// on near-zero gradients while still catching wrong small gradients.
GradCheckReport gradient_check(ParamStore& store, const std::function<double()>& loss,
                               const std::function<void()>& backward, double eps = 1e-5);

}  // namespace afford
