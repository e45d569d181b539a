#include <doctest.h>

#include <cmath>

#include "core/rationale.hpp"

using namespace jumper;

namespace {

SlotSchema one_slot() {
  return parse_schema_json(
      R"({"slots":[{"name":"label","classes":["a","b"]}]})", "test");
}

ModelConfig config_with_windows(std::vector<std::size_t> windows,
                                std::size_t maps) {
  ModelConfig cfg;
  cfg.encoder.window_sizes = std::move(windows);
  cfg.encoder.maps_per_window = maps;
  cfg.encoder.embed_dim = 4;
  cfg.encoder.dropout_p = 0;
  cfg.hidden_size = 3;
  return cfg;
}

EmbeddingTable table_of(std::size_t vocab, std::size_t dim, std::uint64_t seed) {
  EmbeddingTable t;
  t.dim = dim;
  t.values.assign(vocab * dim, 0);
  t.pretrained.assign(vocab, 0);
  Rng rng(seed);
  for (std::size_t i = dim; i < t.values.size(); ++i)
    t.values[i] = uniform_real(rng, -0.6, 0.6);
  return t;
}

Paragraph para_of(std::vector<std::vector<int>> ids) {
  Paragraph p;
  for (auto& s : ids) {
    p.raw_sentences.push_back("synthetic");
    p.sentences.push_back(std::move(s));
  }
  return p;
}

}  // namespace

TEST_CASE("score and selection follow the gradient-times-squared-diff rule") {
  const std::vector<Real> grad = {1, 0, 2};
  const std::vector<Real> c_now = {2, 1, 0};
  const std::vector<Real> c_prev = {0, 0, -1};
  // diff^2 = [4, 1, 1] -> scores [4, 0, 2]
  auto scores = rationale_scores(grad, c_now, &c_prev);
  CHECK(scores == std::vector<Real>{4, 0, 2});
  CHECK(top_dims_by_score(scores, 2) == std::vector<std::size_t>{0, 2});

  // all-zero scores: the tie rule yields the first D indices
  std::vector<Real> flat(5, 0);
  CHECK(top_dims_by_score(flat, 3) == std::vector<std::size_t>{0, 1, 2});

  // D = K selects every dimension
  CHECK(top_dims_by_score(scores, 3) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("backtrack_words: width-1 kernels credit their winning word") {
  Model model(one_slot(), config_with_windows({1}, 4), table_of(8, 4, 1), 1);
  SentenceEncoding enc;
  enc.pool_argmax = {1, 0, 1, 3};
  enc.features.assign(4, 0);
  enc.padded_tokens = {2, 3, 4, 5};

  // dims {0, 2} both point at word 1
  WordImportance same = backtrack_words(model, {0, 2}, enc, 0);
  REQUIRE(same.weights.size() == 1);
  CHECK(same.weights[0].first == 1);
  CHECK(same.weights[0].second == doctest::Approx(1.0));

  // dims {0, 1} point at words 1 and 0: half credit each
  WordImportance split = backtrack_words(model, {0, 1}, enc, 0);
  REQUIRE(split.weights.size() == 2);
  CHECK(split.weights[0].first == 0);
  CHECK(split.weights[0].second == doctest::Approx(0.5));
  CHECK(split.weights[1].first == 1);
  CHECK(split.weights[1].second == doctest::Approx(0.5));
}

TEST_CASE("backtrack_words: a width-2 window spreads credit over its words") {
  // one width-1 map then one width-2 map: dim 1 is the h=2 kernel
  Model model(one_slot(), config_with_windows({1, 2}, 1), table_of(8, 4, 2), 2);
  SentenceEncoding enc;
  enc.pool_argmax = {0, 2};  // h=2 kernel wins at start position 2
  enc.features.assign(2, 0);
  enc.padded_tokens = {2, 3, 4, 5};

  WordImportance wi = backtrack_words(model, {1}, enc, 0);
  REQUIRE(wi.weights.size() == 2);
  CHECK(wi.weights[0].first == 2);
  CHECK(wi.weights[0].second == doctest::Approx(0.5));
  CHECK(wi.weights[1].first == 3);
  CHECK(wi.weights[1].second == doctest::Approx(0.5));
}

TEST_CASE("importance fractions sum to one") {
  Model model(one_slot(), config_with_windows({1, 2, 3}, 3), table_of(10, 4, 3),
              3);
  Rng rng(5);
  for (auto& [name, t] : model.params())
    for (Real& v : t.v) v = uniform_real(rng, -0.4, 0.4);
  Paragraph p = para_of({{2, 3, 4, 5}, {6, 7, 8, 9}});
  auto trace = model.forward(p, DecodeMode::greedy, 0, false, nullptr);
  RationaleConfig cfg;
  cfg.top_d = 5;
  auto dims = rationale_dims(model, trace, 0, 2, cfg);
  CHECK(dims.size() == 5);
  WordImportance wi = backtrack_words(model, dims, trace.steps[1].enc, 1);
  Real sum = 0;
  for (const auto& [pos, w] : wi.weights) {
    CHECK(w >= 0);
    sum += w;
  }
  CHECK(sum == doctest::Approx(1).epsilon(1e-9));
}

TEST_CASE("backtrack consistency: pooled values match a recomputed winner") {
  Model model(one_slot(), config_with_windows({1, 2}, 3), table_of(10, 4, 7),
              7);
  Rng rng(8);
  for (auto& [name, t] : model.params())
    for (Real& v : t.v) v = uniform_real(rng, -0.5, 0.5);
  auto enc = model.encode_sentence({2, 3, 4, 5, 6}, false, nullptr);

  const auto& windows = model.config().encoder.window_sizes;
  const std::size_t maps = model.config().encoder.maps_per_window;
  const std::size_t d = model.config().encoder.embed_dim;
  const Tensor& embed = model.params().at("embed");
  for (std::size_t k = 0; k < model.feature_dim(); ++k) {
    const std::size_t h = windows[k / maps];
    const std::size_t m = k % maps;
    const Tensor& W = model.params().at("conv." + std::to_string(h) + ".w");
    const Tensor& b = model.params().at("conv." + std::to_string(h) + ".b");
    Real pre = b.v[m];
    for (std::size_t j = 0; j < h; ++j) {
      const int tok = enc.padded_tokens[enc.pool_argmax[k] + j];
      for (std::size_t e = 0; e < d; ++e)
        pre += W.v[m * h * d + j * d + e] *
               embed.v[static_cast<std::size_t>(tok) * d + e];
    }
    CHECK(enc.features[k] == doctest::Approx(std::max<Real>(pre, 0)).epsilon(1e-12));
  }
}

TEST_CASE("first-step jumps fall back to the zero previous encoding") {
  Model model(one_slot(), config_with_windows({1, 2}, 3), table_of(10, 4, 9),
              9);
  Rng rng(10);
  for (auto& [name, t] : model.params())
    for (Real& v : t.v) v = uniform_real(rng, -0.4, 0.4);
  Paragraph p = para_of({{2, 3, 4}, {5, 6, 7}});
  auto trace = model.forward(p, DecodeMode::greedy, 0, false, nullptr);
  RationaleConfig cfg;
  cfg.top_d = 2;

  CHECK_THROWS_WITH_AS(top_d_dims(model, trace, 0, 1, cfg),
                       doctest::Contains("first"), Error);
  auto dims = rationale_dims(model, trace, 0, 1, cfg);
  CHECK(dims.size() == 2);

  CHECK_THROWS_AS(top_d_dims(model, trace, 0, 3, cfg), Error);
  RationaleConfig bad;
  bad.top_d = 99;
  CHECK_THROWS_AS(rationale_dims(model, trace, 0, 2, bad), Error);
}
