#include "core/adadelta.hpp"

#include <cmath>

namespace jumper {

void AdaDelta::step(ParamStore& params, const ParamStore& grads) {
  for (auto& [name, param] : params) {
    const Tensor& grad = grads.at(name);
    if (grad.size() != param.size())
      fail_invalid("adadelta: gradient shape mismatch for " + name);
    Slot& slot = state_[name];
    if (slot.avg_sq_grad.empty()) {
      slot.avg_sq_grad.assign(param.size(), Real{0});
      slot.avg_sq_delta.assign(param.size(), Real{0});
    }
    Real* p = param.v.data();
    const Real* g = grad.v.data();
    Real* eg2 = slot.avg_sq_grad.data();
    Real* ed2 = slot.avg_sq_delta.data();
    const Real rho = opt_.rho, eps = opt_.eps, lr = opt_.lr_scale;
    for (std::size_t i = 0; i < param.size(); ++i) {
      if (!std::isfinite(g[i]))
        fail_runtime("adadelta: non-finite gradient in parameter " + name);
      eg2[i] = rho * eg2[i] + (Real{1} - rho) * g[i] * g[i];
      const Real delta =
          -lr * std::sqrt(ed2[i] + eps) / std::sqrt(eg2[i] + eps) * g[i];
      ed2[i] = rho * ed2[i] + (Real{1} - rho) * delta * delta;
      p[i] += delta;
    }
  }
}

}  // namespace jumper
