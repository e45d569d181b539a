#include "core/nn.hpp"

#include <cmath>

namespace jumper::nn {

Tensor affine(const Tensor& W, const Tensor& x, const Tensor& b) {
  const std::size_t m = W.rows(), n = W.cols();
  if (W.shape.size() != 2 || x.size() != n || b.size() != m)
    fail_invalid("affine: shapes do not conform: W " + W.shape_str() + ", x " +
                 x.shape_str() + ", b " + b.shape_str());
  Tensor y({m});
  const Real* w = W.v.data();
  const Real* xv = x.v.data();
  for (std::size_t i = 0; i < m; ++i) {
    Real acc = b.v[i];
    const Real* row = w + i * n;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * xv[j];
    y.v[i] = acc;
  }
  return y;
}

void affine_backward_raw(const Tensor& W, std::span<const Real> x,
                         std::span<const Real> dy, Real* dW, Real* dx,
                         Real* db) {
  const std::size_t m = W.rows(), n = W.cols();
  const Real* w = W.v.data();
  for (std::size_t i = 0; i < m; ++i) {
    const Real d = dy[i];
    if (d == Real{0}) continue;
    const Real* row = w + i * n;
    if (dW) {
      Real* drow = dW + i * n;
      for (std::size_t j = 0; j < n; ++j) drow[j] += d * x[j];
    }
    if (dx)
      for (std::size_t j = 0; j < n; ++j) dx[j] += d * row[j];
    if (db) db[i] += d;
  }
}

void affine_backward(Tensor& W, Tensor& x, Tensor& b, const Tensor& y) {
  affine_backward_raw(W, x.v, y.g, W.g.data(), x.g.data(), b.g.data());
}

void softmax(std::span<const Real> logits, std::span<Real> probs) {
  if (logits.empty()) fail_invalid("softmax: empty input");
  Real mx = logits[0];
  for (Real v : logits) mx = std::max(mx, v);
  Real sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - mx);
    sum += probs[i];
  }
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] /= sum;
}

Tensor softmax(const Tensor& logits) {
  Tensor p(logits.shape);
  softmax(logits.v, p.v);
  return p;
}

void log_prob_backward(std::span<const Real> probs, std::size_t action,
                       Real coef, Real* dlogits) {
  for (std::size_t k = 0; k < probs.size(); ++k) dlogits[k] -= coef * probs[k];
  dlogits[action] += coef;
}

PoolResult max_pool_argmax(const Tensor& features) {
  if (features.shape.size() != 2)
    fail_invalid("max_pool_argmax: expected a 2-d tensor, got " +
                 features.shape_str());
  const std::size_t rows = features.rows(), positions = features.cols();
  if (positions == 0) fail_invalid("max_pool_argmax: empty position axis");
  PoolResult out{Tensor({rows}), std::vector<std::size_t>(rows, 0)};
  for (std::size_t k = 0; k < rows; ++k) {
    const Real* row = features.v.data() + k * positions;
    std::size_t best = 0;
    for (std::size_t i = 1; i < positions; ++i)
      if (row[i] > row[best]) best = i;
    out.values.v[k] = row[best];
    out.argmax[k] = best;
  }
  return out;
}

void max_pool_backward(std::span<const Real> dvalues,
                       std::span<const std::size_t> argmax, std::size_t positions,
                       Real* dfeatures) {
  for (std::size_t k = 0; k < dvalues.size(); ++k)
    dfeatures[k * positions + argmax[k]] += dvalues[k];
}

namespace {

void gate_preact(const Tensor& W, const Tensor& U, const Tensor& b,
                 std::span<const Real> x, std::span<const Real> h,
                 std::span<Real> out) {
  const std::size_t H = W.rows(), X = W.cols();
  const Real* w = W.v.data();
  const Real* u = U.v.data();
  for (std::size_t i = 0; i < H; ++i) {
    Real acc = b.v[i];
    const Real* wrow = w + i * X;
    for (std::size_t j = 0; j < X; ++j) acc += wrow[j] * x[j];
    const Real* urow = u + i * H;
    for (std::size_t j = 0; j < H; ++j) acc += urow[j] * h[j];
    out[i] = acc;
  }
}

void check_gru_shapes(const GruParams& p, std::size_t h_prev, std::size_t x) {
  const std::size_t H = p.hidden(), X = p.input();
  if (h_prev != H || x != X || p.u_update->rows() != H ||
      p.u_update->cols() != H || p.w_reset->rows() != H ||
      p.w_reset->cols() != X || p.w_cand->rows() != H || p.w_cand->cols() != X)
    fail_invalid("gru_step: shapes do not conform (hidden " +
                 std::to_string(H) + ", input " + std::to_string(X) + ")");
}

}  // namespace

void gru_step(const GruParams& p, std::span<const Real> h_prev,
              std::span<const Real> x, std::span<Real> h, GruCache* cache) {
  check_gru_shapes(p, h_prev.size(), x.size());
  const std::size_t H = p.hidden();
  std::vector<Real> z(H), r(H), cand(H), rh(H);

  gate_preact(*p.w_update, *p.u_update, *p.b_update, x, h_prev, z);
  gate_preact(*p.w_reset, *p.u_reset, *p.b_reset, x, h_prev, r);
  for (std::size_t i = 0; i < H; ++i) {
    z[i] = sigmoid(z[i]);
    r[i] = sigmoid(r[i]);
    rh[i] = r[i] * h_prev[i];
  }
  gate_preact(*p.w_cand, *p.u_cand, *p.b_cand, x, rh, cand);
  for (std::size_t i = 0; i < H; ++i) {
    cand[i] = std::tanh(cand[i]);
    h[i] = (Real{1} - z[i]) * h_prev[i] + z[i] * cand[i];
  }
  if (cache) {
    cache->x.assign(x.begin(), x.end());
    cache->h_prev.assign(h_prev.begin(), h_prev.end());
    cache->update = std::move(z);
    cache->reset = std::move(r);
    cache->cand = std::move(cand);
  }
}

Tensor gru_step(const GruParams& p, const Tensor& h_prev, const Tensor& x,
                GruCache* cache) {
  Tensor h({p.hidden()});
  gru_step(p, h_prev.v, x.v, h.v, cache);
  return h;
}

void gru_step_backward(const GruParams& p, const GruCache& cache,
                       std::span<const Real> dh, const GruGrads& grads,
                       Real* dx, Real* dh_prev) {
  const std::size_t H = p.hidden(), X = p.input();
  const auto& z = cache.update;
  const auto& r = cache.reset;
  const auto& cand = cache.cand;
  const auto& hp = cache.h_prev;
  const auto& x = cache.x;

  // h = (1-z) o h_prev + z o cand
  std::vector<Real> dz(H), dcand(H), dhp(H);
  for (std::size_t i = 0; i < H; ++i) {
    dz[i] = dh[i] * (cand[i] - hp[i]);
    dcand[i] = dh[i] * z[i];
    dhp[i] = dh[i] * (Real{1} - z[i]);
  }

  // cand = tanh(W_c x + U_c (r o h_prev) + b_c)
  std::vector<Real> dcand_pre(H), drh(H, Real{0});
  for (std::size_t i = 0; i < H; ++i)
    dcand_pre[i] = dcand[i] * (Real{1} - cand[i] * cand[i]);
  {
    const Real* w = p.w_cand->v.data();
    const Real* u = p.u_cand->v.data();
    for (std::size_t i = 0; i < H; ++i) {
      const Real d = dcand_pre[i];
      if (d == Real{0}) continue;
      if (grads.w_cand) {
        Real* row = grads.w_cand + i * X;
        for (std::size_t j = 0; j < X; ++j) row[j] += d * x[j];
      }
      if (grads.u_cand) {
        Real* row = grads.u_cand + i * H;
        for (std::size_t j = 0; j < H; ++j) row[j] += d * r[j] * hp[j];
      }
      if (grads.b_cand) grads.b_cand[i] += d;
      if (dx) {
        const Real* wrow = w + i * X;
        for (std::size_t j = 0; j < X; ++j) dx[j] += d * wrow[j];
      }
      const Real* urow = u + i * H;
      for (std::size_t j = 0; j < H; ++j) drh[j] += d * urow[j];
    }
  }

  // r o h_prev
  std::vector<Real> dr(H);
  for (std::size_t i = 0; i < H; ++i) {
    dr[i] = drh[i] * hp[i];
    dhp[i] += drh[i] * r[i];
  }

  // sigmoid gates
  std::vector<Real> dz_pre(H), dr_pre(H);
  for (std::size_t i = 0; i < H; ++i) {
    dz_pre[i] = dz[i] * z[i] * (Real{1} - z[i]);
    dr_pre[i] = dr[i] * r[i] * (Real{1} - r[i]);
  }

  auto gate_backward = [&](std::span<const Real> dpre, const Tensor& W,
                           const Tensor& U, Real* dW, Real* dU, Real* db) {
    const Real* w = W.v.data();
    const Real* u = U.v.data();
    for (std::size_t i = 0; i < H; ++i) {
      const Real d = dpre[i];
      if (d == Real{0}) continue;
      if (dW) {
        Real* row = dW + i * X;
        for (std::size_t j = 0; j < X; ++j) row[j] += d * x[j];
      }
      if (dU) {
        Real* row = dU + i * H;
        for (std::size_t j = 0; j < H; ++j) row[j] += d * hp[j];
      }
      if (db) db[i] += d;
      if (dx) {
        const Real* wrow = w + i * X;
        for (std::size_t j = 0; j < X; ++j) dx[j] += d * wrow[j];
      }
      const Real* urow = u + i * H;
      for (std::size_t j = 0; j < H; ++j) dhp[j] += d * urow[j];
    }
  };
  gate_backward(dz_pre, *p.w_update, *p.u_update, grads.w_update,
                grads.u_update, grads.b_update);
  gate_backward(dr_pre, *p.w_reset, *p.u_reset, grads.w_reset, grads.u_reset,
                grads.b_reset);

  if (dh_prev)
    for (std::size_t i = 0; i < H; ++i) dh_prev[i] += dhp[i];
}

std::vector<std::uint8_t> dropout_mask(std::size_t n, Real p, Rng& rng) {
  std::vector<std::uint8_t> mask(n, 1);
  if (p <= Real{0}) return mask;
  if (p >= Real{1}) fail_invalid("dropout: rate must be < 1");
  for (std::size_t i = 0; i < n; ++i)
    mask[i] = uniform_real(rng, 0, 1) >= p ? 1 : 0;
  return mask;
}

void dropout_apply(std::span<Real> x, std::span<const std::uint8_t> mask,
                   Real p) {
  if (p <= Real{0}) return;
  const Real scale = Real{1} / (Real{1} - p);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = mask[i] ? x[i] * scale : Real{0};
}

void dropout_backward(std::span<Real> dx, std::span<const std::uint8_t> mask,
                      Real p) {
  dropout_apply(dx, mask, p);  // same linear map
}

std::size_t argmax_lowest(std::span<const Real> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace jumper::nn
