#include "core/gradcheck.hpp"

#include <cmath>

namespace jumper {

GradCheckResult grad_check(ParamStore& params,
                           const std::function<Real()>& loss,
                           const std::function<void(ParamStore&)>& backward,
                           Real eps, std::size_t coords_per_param, Rng* rng) {
  ParamStore analytic = params.zeros_like();
  backward(analytic);

  GradCheckResult result;
  for (auto& [name, param] : params) {
    const Tensor& grad = analytic.at(name);
    std::vector<std::size_t> coords;
    if (coords_per_param == 0 || coords_per_param >= param.size()) {
      coords.resize(param.size());
      for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    } else {
      if (!rng) fail_invalid("grad_check: sampling requires an rng");
      for (std::size_t s = 0; s < coords_per_param; ++s)
        coords.push_back(static_cast<std::size_t>(uniform_index(*rng, param.size())));
    }
    for (std::size_t i : coords) {
      const Real saved = param.v[i];
      param.v[i] = saved + eps;
      const Real plus = loss();
      param.v[i] = saved - eps;
      const Real minus = loss();
      param.v[i] = saved;
      const Real numeric = (plus - minus) / (2 * eps);
      const Real a = grad.v[i];
      const Real rel = std::abs(a - numeric) /
                       std::max<Real>(1e-8, std::abs(a) + std::abs(numeric));
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst_param = name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace jumper
