#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "core/tensor.hpp"

namespace jumper::nn {

// ---- affine: y = W x + b -------------------------------------------------

Tensor affine(const Tensor& W, const Tensor& x, const Tensor& b);

// Accumulates into any non-null destination buffer. Buffers follow the
// layout of the corresponding tensor.
void affine_backward_raw(const Tensor& W, std::span<const Real> x,
                         std::span<const Real> dy, Real* dW, Real* dx,
                         Real* db);

// Convenience form accumulating into the .g buffers.
void affine_backward(Tensor& W, Tensor& x, Tensor& b, const Tensor& y);

// ---- softmax ---------------------------------------------------------------

// Shift-stabilized; output sums to 1 for any finite input.
void softmax(std::span<const Real> logits, std::span<Real> probs);
Tensor softmax(const Tensor& logits);

// d/dlogits of coef * log probs[action]:  dlogits[k] += coef*((k==action)-p[k])
void log_prob_backward(std::span<const Real> probs, std::size_t action,
                       Real coef, Real* dlogits);

// ---- max pooling over positions -------------------------------------------

struct PoolResult {
  Tensor values;                     // [K]
  std::vector<std::size_t> argmax;  // position per row, ties -> lowest index
};

// features: [K x P]; reduces over the position axis.
PoolResult max_pool_argmax(const Tensor& features);

// Routes each row's gradient to the stored argmax position only.
void max_pool_backward(std::span<const Real> dvalues,
                       std::span<const std::size_t> argmax, std::size_t positions,
                       Real* dfeatures);

// ---- GRU cell --------------------------------------------------------------

// Parameter views into a ParamStore; all matrices are row-major.
struct GruParams {
  const Tensor* w_update;  // [H x X]
  const Tensor* u_update;  // [H x H]
  const Tensor* b_update;  // [H]
  const Tensor* w_reset;
  const Tensor* u_reset;
  const Tensor* b_reset;
  const Tensor* w_cand;
  const Tensor* u_cand;
  const Tensor* b_cand;

  std::size_t hidden() const { return w_update->rows(); }
  std::size_t input() const { return w_update->cols(); }
};

struct GruGrads {
  Real* w_update = nullptr;
  Real* u_update = nullptr;
  Real* b_update = nullptr;
  Real* w_reset = nullptr;
  Real* u_reset = nullptr;
  Real* b_reset = nullptr;
  Real* w_cand = nullptr;
  Real* u_cand = nullptr;
  Real* b_cand = nullptr;
};

// Gate activations saved by the forward pass; enough to run backward
// (sigma' and tanh' are recovered from the outputs).
struct GruCache {
  std::vector<Real> x;
  std::vector<Real> h_prev;
  std::vector<Real> update;  // z
  std::vector<Real> reset;   // r
  std::vector<Real> cand;    // h~
};

// h = (1-z) o h_prev + z o h~,  h~ = tanh(W_c x + U_c (r o h_prev) + b_c)
void gru_step(const GruParams& p, std::span<const Real> h_prev,
              std::span<const Real> x, std::span<Real> h, GruCache* cache);

// Accumulates parameter gradients plus dx / dh_prev (either may be null).
void gru_step_backward(const GruParams& p, const GruCache& cache,
                       std::span<const Real> dh, const GruGrads& grads,
                       Real* dx, Real* dh_prev);

// Tensor-level convenience wrappers used by tests and grad checks.
Tensor gru_step(const GruParams& p, const Tensor& h_prev, const Tensor& x,
                GruCache* cache);

// ---- dropout ---------------------------------------------------------------

// Inverted dropout: kept entries scale by 1/(1-p); identity when p == 0.
// Returns the keep mask so backward can replay it.
std::vector<std::uint8_t> dropout_mask(std::size_t n, Real p, Rng& rng);
void dropout_apply(std::span<Real> x, std::span<const std::uint8_t> mask, Real p);
void dropout_backward(std::span<Real> dx, std::span<const std::uint8_t> mask,
                      Real p);

// ---- small helpers ---------------------------------------------------------

inline Real sigmoid(Real x) { return Real{1} / (Real{1} + std::exp(-x)); }

std::size_t argmax_lowest(std::span<const Real> v);

}  // namespace jumper::nn
