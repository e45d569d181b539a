#pragma once

#include "core/tensor.hpp"

namespace jumper {

// AdaDelta with the multiplier interpretation of "learning rate": the
// computed update is scaled by lr_scale before being applied.
class AdaDelta {
public:
  struct Options {
    Real rho = 0.95;
    Real eps = 1e-6;
    Real lr_scale = 0.1;
  };

  AdaDelta() = default;
  explicit AdaDelta(Options opt) : opt_(opt) {}

  const Options& options() const { return opt_; }

  // grads carries gradients in its value buffers, aligned with params.
  //   E[g^2]  <- rho E[g^2] + (1-rho) g^2
  //   delta    = -lr * sqrt(E[dx^2]+eps)/sqrt(E[g^2]+eps) * g
  //   E[dx^2] <- rho E[dx^2] + (1-rho) delta^2
  //   param   += delta
  void step(ParamStore& params, const ParamStore& grads);

private:
  struct Slot {
    std::vector<Real> avg_sq_grad;
    std::vector<Real> avg_sq_delta;
  };
  Options opt_;
  std::map<std::string, Slot> state_;
};

}  // namespace jumper
