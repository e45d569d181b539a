#pragma once

#include <functional>

#include "core/tensor.hpp"

namespace jumper {

struct GradCheckResult {
  Real max_rel_err = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
};

// Compares the analytic gradient of a scalar loss against central finite
// differences.
//   loss:      forward-only evaluation at the current parameter values
//   backward:  fills the value buffers of its argument with dloss/dparam
//   coords_per_param: number of coordinates sampled per parameter
//                     (0 = check every coordinate)
// Relative error per coordinate:
//   |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
GradCheckResult grad_check(ParamStore& params,
                           const std::function<Real()>& loss,
                           const std::function<void(ParamStore&)>& backward,
                           Real eps = 1e-5, std::size_t coords_per_param = 0,
                           Rng* rng = nullptr);

}  // namespace jumper
