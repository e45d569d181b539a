#include <doctest.h>

#include <cmath>

#include "core/adadelta.hpp"
#include "core/gradcheck.hpp"
#include "core/nn.hpp"

using namespace jumper;

TEST_CASE("affine identity and zero-weight maps") {
  Tensor identity({2, 2}, {1, 0, 0, 1});
  Tensor x = Tensor::vec({3, -1});
  Tensor zero_b = Tensor::vec({0, 0});
  Tensor y = nn::affine(identity, x, zero_b);
  CHECK(y.v[0] == doctest::Approx(3));
  CHECK(y.v[1] == doctest::Approx(-1));

  Tensor zeros({2, 2});
  Tensor b = Tensor::vec({0.5, -0.5});
  Tensor y2 = nn::affine(zeros, Tensor::vec({12.5, -7.0}), b);
  CHECK(y2.v[0] == doctest::Approx(0.5));
  CHECK(y2.v[1] == doctest::Approx(-0.5));
}

TEST_CASE("affine hand-computed matrix multiply") {
  Tensor W({2, 2}, {1, 2, 0, 1});
  Tensor y = nn::affine(W, Tensor::vec({1, 1}), Tensor::vec({1, 0}));
  CHECK(y.v[0] == doctest::Approx(4));
  CHECK(y.v[1] == doctest::Approx(1));
}

TEST_CASE("affine rejects non-conforming shapes") {
  Tensor W({2, 3});
  CHECK_THROWS_WITH_AS(nn::affine(W, Tensor::vec({1, 1}), Tensor::vec({0, 0})),
                       doctest::Contains("[2x3]"), Error);
}

TEST_CASE("softmax worked values") {
  Tensor p = nn::softmax(Tensor::vec({0, 0}));
  CHECK(p.v[0] == doctest::Approx(0.5));
  CHECK(p.v[1] == doctest::Approx(0.5));

  Tensor q = nn::softmax(Tensor::vec({std::log(2.0), 0}));
  CHECK(q.v[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(q.v[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("softmax survives large logits via shifting") {
  Tensor p = nn::softmax(Tensor::vec({1000, 1000, 999}));
  // oracle: subtract the max by hand, exp, normalize
  const double e = std::exp(-1.0);
  const double sum = 2.0 + e;
  for (Real v : p.v) CHECK(std::isfinite(v));
  CHECK(p.v[0] == doctest::Approx(1.0 / sum).epsilon(1e-12));
  CHECK(p.v[1] == doctest::Approx(1.0 / sum).epsilon(1e-12));
  CHECK(p.v[2] == doctest::Approx(e / sum).epsilon(1e-12));
  CHECK(p.v[0] == doctest::Approx(0.4223).epsilon(1e-3));
  CHECK(p.v[2] == doctest::Approx(0.1554).epsilon(1e-3));
}

TEST_CASE("softmax sums to one and is shift invariant") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 8);
    Tensor v({n});
    for (Real& x : v.v) x = uniform_real(rng, -5, 5);
    Tensor p = nn::softmax(v);
    Real sum = 0;
    for (Real x : p.v) {
      CHECK(x >= 0);
      CHECK(x <= 1);
      sum += x;
    }
    CHECK(sum == doctest::Approx(1).epsilon(1e-9));

    const Real shift = uniform_real(rng, -100, 100);
    Tensor shifted = v;
    for (Real& x : shifted.v) x += shift;
    Tensor q = nn::softmax(shifted);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(p.v[i] - q.v[i]) < 1e-9);
  }
}

TEST_CASE("max pool with argmax") {
  Tensor f({2, 3}, {1, 3, 2, 0, -1, -2});
  auto out = nn::max_pool_argmax(f);
  CHECK(out.values.v[0] == 3);
  CHECK(out.values.v[1] == 0);
  CHECK(out.argmax[0] == 1);
  CHECK(out.argmax[1] == 0);

  auto single = nn::max_pool_argmax(Tensor({1, 1}, {7}));
  CHECK(single.values.v[0] == 7);
  CHECK(single.argmax[0] == 0);

  auto tie = nn::max_pool_argmax(Tensor({1, 2}, {5, 5}));
  CHECK(tie.values.v[0] == 5);
  CHECK(tie.argmax[0] == 0);  // ties break toward the lowest index
}

TEST_CASE("empty position axis is rejected at construction") {
  CHECK_THROWS_AS(Tensor({2, 0}), Error);
}

TEST_CASE("max pool backward routes gradient only to the winner") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 1 + uniform_index(rng, 4);
    const std::size_t cols = 1 + uniform_index(rng, 6);
    Tensor f({rows, cols});
    for (Real& x : f.v) x = uniform_real(rng, -1, 1);
    auto pooled = nn::max_pool_argmax(f);

    std::vector<Real> dvals(rows);
    for (Real& d : dvals) d = uniform_real(rng, -2, 2);
    std::vector<Real> dfeat(rows * cols, 0);
    nn::max_pool_backward(dvals, pooled.argmax, cols, dfeat.data());
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        if (c == pooled.argmax[r])
          CHECK(dfeat[r * cols + c] == dvals[r]);
        else
          CHECK(dfeat[r * cols + c] == 0);  // exactly zero
      }
  }
}

namespace {

ParamStore make_gru_params(std::size_t hidden, std::size_t input) {
  ParamStore ps(0);
  for (const char* gate : {"update", "reset", "cand"}) {
    ps.add_zeros(std::string("gru.") + gate + ".w", {hidden, input});
    ps.add_zeros(std::string("gru.") + gate + ".u", {hidden, hidden});
    ps.add_zeros(std::string("gru.") + gate + ".b", {hidden});
  }
  return ps;
}

nn::GruParams view_gru(const ParamStore& ps) {
  return {&ps.at("gru.update.w"), &ps.at("gru.update.u"), &ps.at("gru.update.b"),
          &ps.at("gru.reset.w"),  &ps.at("gru.reset.u"),  &ps.at("gru.reset.b"),
          &ps.at("gru.cand.w"),   &ps.at("gru.cand.u"),   &ps.at("gru.cand.b")};
}

}  // namespace

TEST_CASE("gru step with zero parameters halves the previous state") {
  // z = sigma(0) = 0.5, cand = tanh(0) = 0 => h = 0.5 * h_prev
  ParamStore ps = make_gru_params(2, 3);
  Tensor h = nn::gru_step(view_gru(ps), Tensor::vec({1, -2}),
                          Tensor::vec({0.3, -0.7, 2.0}), nullptr);
  CHECK(h.v[0] == doctest::Approx(0.5));
  CHECK(h.v[1] == doctest::Approx(-1.0));

  Tensor fixed = nn::gru_step(view_gru(ps), Tensor::vec({0, 0}),
                              Tensor::vec({5, 5, 5}), nullptr);
  CHECK(fixed.v[0] == 0);
  CHECK(fixed.v[1] == 0);
}

TEST_CASE("gru step hand evaluation of the gate equations") {
  // 1-dim: z = sigma(2), cand = tanh(1 * x), h_prev = 0
  ParamStore ps = make_gru_params(1, 1);
  ps.at("gru.update.b").v[0] = 2;
  ps.at("gru.cand.w").v[0] = 1;
  Tensor h =
      nn::gru_step(view_gru(ps), Tensor::vec({0}), Tensor::vec({1}), nullptr);
  const double expected = nn::sigmoid(2.0) * std::tanh(1.0);
  CHECK(h.v[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(h.v[0] == doctest::Approx(0.6709).epsilon(1e-3));
}

TEST_CASE("gru step rejects mismatched shapes") {
  ParamStore ps = make_gru_params(2, 3);
  CHECK_THROWS_AS(
      nn::gru_step(view_gru(ps), Tensor::vec({1}), Tensor::vec({1, 2, 3}), nullptr),
      Error);
}

TEST_CASE("gradient check: squared affine output") {
  ParamStore ps(99);
  ps.add_uniform("W", {3, 4});
  ps.add_uniform("x", {4});
  ps.add_uniform("b", {3});
  // spread values so the loss surface is not flat
  Rng rng(5);
  for (auto& [name, t] : ps)
    for (Real& v : t.v) v = uniform_real(rng, -1, 1);

  auto loss = [&]() {
    Tensor y = nn::affine(ps.at("W"), ps.at("x"), ps.at("b"));
    Real sum = 0;
    for (Real v : y.v) sum += v * v;
    return sum;
  };
  auto backward = [&](ParamStore& grads) {
    Tensor y = nn::affine(ps.at("W"), ps.at("x"), ps.at("b"));
    std::vector<Real> dy(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) dy[i] = 2 * y.v[i];
    nn::affine_backward_raw(ps.at("W"), ps.at("x").v, dy,
                            grads.at("W").v.data(), grads.at("x").v.data(),
                            grads.at("b").v.data());
  };
  auto result = grad_check(ps, loss, backward, 1e-5);
  CHECK(result.max_rel_err < 1e-6);
}

TEST_CASE("gradient check: gru step") {
  ParamStore ps = make_gru_params(3, 4);
  ps.add_zeros("h_prev", {3});
  ps.add_zeros("x", {4});
  Rng rng(17);
  for (auto& [name, t] : ps)
    for (Real& v : t.v) v = uniform_real(rng, -1, 1);

  auto loss = [&]() {
    nn::GruCache cache;
    Tensor h = nn::gru_step(view_gru(ps), ps.at("h_prev"), ps.at("x"), &cache);
    Real sum = 0;
    for (std::size_t i = 0; i < h.size(); ++i)
      sum += h.v[i] * h.v[i] * (Real(i) + 1);
    return sum;
  };
  auto backward = [&](ParamStore& grads) {
    nn::GruCache cache;
    Tensor h = nn::gru_step(view_gru(ps), ps.at("h_prev"), ps.at("x"), &cache);
    std::vector<Real> dh(h.size());
    for (std::size_t i = 0; i < h.size(); ++i)
      dh[i] = 2 * h.v[i] * (Real(i) + 1);
    nn::GruGrads gg{grads.at("gru.update.w").v.data(),
                    grads.at("gru.update.u").v.data(),
                    grads.at("gru.update.b").v.data(),
                    grads.at("gru.reset.w").v.data(),
                    grads.at("gru.reset.u").v.data(),
                    grads.at("gru.reset.b").v.data(),
                    grads.at("gru.cand.w").v.data(),
                    grads.at("gru.cand.u").v.data(),
                    grads.at("gru.cand.b").v.data()};
    nn::gru_step_backward(view_gru(ps), cache, dh, gg,
                          grads.at("x").v.data(), grads.at("h_prev").v.data());
  };
  auto result = grad_check(ps, loss, backward, 1e-5);
  CHECK(result.max_rel_err < 1e-5);
}

TEST_CASE("dropout: eval is identity, train scales kept entries") {
  Rng rng(4);
  auto mask = nn::dropout_mask(1000, 0.5, rng);
  std::size_t kept = 0;
  for (auto m : mask) kept += m;
  CHECK(kept > 400);  // ~500 expected
  CHECK(kept < 600);

  std::vector<Real> x(8, 1.0);
  std::vector<std::uint8_t> fixed = {1, 0, 1, 1, 0, 1, 0, 1};
  nn::dropout_apply(x, fixed, 0.5);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(x[i] == (fixed[i] ? doctest::Approx(2.0) : doctest::Approx(0.0)));

  std::vector<Real> y(4, 3.0);
  nn::dropout_apply(y, std::vector<std::uint8_t>(4, 1), 0.0);  // p = 0: identity
  for (Real v : y) CHECK(v == 3.0);
}

TEST_CASE("adadelta worked updates") {
  // oracle: hand evaluation of the recurrences with rho=0.95, eps=1e-6
  const double rho = 0.95, eps = 1e-6, lr = 0.1;
  const double eg1 = (1 - rho) * 1.0;
  const double d1 = -lr * std::sqrt(0.0 + eps) / std::sqrt(eg1 + eps);
  const double ed1 = (1 - rho) * d1 * d1;
  const double eg2 = rho * eg1 + (1 - rho);
  const double d2 = -lr * std::sqrt(ed1 + eps) / std::sqrt(eg2 + eps);

  CHECK(d1 == doctest::Approx(-4.47e-4).epsilon(1e-3));

  ParamStore params(0);
  params.add_zeros("w", {1});
  ParamStore grads = params.zeros_like();
  grads.at("w").v[0] = 1;

  AdaDelta opt;
  opt.step(params, grads);
  CHECK(params.at("w").v[0] == doctest::Approx(d1).epsilon(1e-12));
  opt.step(params, grads);
  CHECK(params.at("w").v[0] == doctest::Approx(d1 + d2).epsilon(1e-12));
  // with these constants the second step is smaller: E[g^2] grows faster
  // than E[dx^2]
  CHECK(std::abs(d2) < std::abs(d1));
}

TEST_CASE("adadelta leaves parameters alone on zero gradient") {
  ParamStore params(1);
  params.add_uniform("w", {4});
  std::vector<Real> before = params.at("w").v;
  ParamStore grads = params.zeros_like();
  AdaDelta opt;
  for (int i = 0; i < 3; ++i) opt.step(params, grads);
  CHECK(params.at("w").v == before);
}

TEST_CASE("adadelta names the parameter carrying a non-finite gradient") {
  ParamStore params(1);
  params.add_zeros("layers.bad", {2});
  ParamStore grads = params.zeros_like();
  grads.at("layers.bad").v[1] = std::nan("");
  AdaDelta opt;
  CHECK_THROWS_WITH_AS(opt.step(params, grads),
                       doctest::Contains("layers.bad"), Error);
}

TEST_CASE("param store init is bit-reproducible for a fixed seed") {
  auto build = [](std::uint64_t seed) {
    ParamStore ps(seed);
    ps.add_uniform("a", {8});
    ps.add_uniform("b", {3, 3});
    return ps;
  };
  ParamStore first = build(123), second = build(123), other = build(124);
  CHECK(first.at("a").v == second.at("a").v);
  CHECK(first.at("b").v == second.at("b").v);
  CHECK(first.at("a").v != other.at("a").v);
  for (Real v : first.at("a").v) {
    CHECK(v >= -0.01);
    CHECK(v <= 0.01);
  }
}

TEST_CASE("param store rejects duplicate names") {
  ParamStore ps(0);
  ps.add_zeros("w", {1});
  CHECK_THROWS_AS(ps.add_zeros("w", {1}), Error);
}

TEST_CASE("log_prob_backward matches the softmax-log identity") {
  // d log p[a] / d logit_k = 1{k==a} - p[k]
  std::vector<Real> probs = {0.5, 0.5};
  std::vector<Real> dlogits(2, 0);
  nn::log_prob_backward(probs, 0, -1.0, dlogits.data());  // coef -A, A = 1
  CHECK(dlogits[0] == doctest::Approx(-0.5));
  CHECK(dlogits[1] == doctest::Approx(0.5));
}
