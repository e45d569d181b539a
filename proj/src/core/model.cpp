#include "core/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/sampling.hpp"

namespace jumper {

int symbolic_update(int state_prev, int action, std::size_t action_count) {
  if (action < 0 || static_cast<std::size_t>(action) >= action_count)
    fail_invalid("symbolic_update: action " + std::to_string(action) +
                 " out of range [0, " + std::to_string(action_count) + ")");
  return state_prev != 0 ? state_prev : action;
}

std::vector<std::string> Model::parameter_names(const SlotSchema& schema,
                                                const EncoderConfig& enc) {
  std::vector<std::string> names{"embed"};
  for (std::size_t h : enc.window_sizes) {
    names.push_back("conv." + std::to_string(h) + ".w");
    names.push_back("conv." + std::to_string(h) + ".b");
  }
  for (const char* gate : {"update", "reset", "cand"}) {
    names.push_back(std::string("gru.") + gate + ".w");
    names.push_back(std::string("gru.") + gate + ".u");
    names.push_back(std::string("gru.") + gate + ".b");
  }
  for (const Slot& s : schema.slots) {
    names.push_back("policy." + s.name + ".w");
    names.push_back("policy." + s.name + ".b");
  }
  return names;
}

Model::Model(SlotSchema schema, ModelConfig cfg,
             const EmbeddingTable& embeddings, std::uint64_t seed)
    : schema_(std::move(schema)), cfg_(std::move(cfg)), params_(seed) {
  const std::size_t d = cfg_.encoder.embed_dim;
  if (embeddings.dim != d)
    fail_invalid("embedding dimension " + std::to_string(embeddings.dim) +
                 " does not match configured embed_dim " + std::to_string(d));
  const std::size_t vocab = embeddings.values.size() / d;

  Tensor& embed = params_.add_zeros("embed", {vocab, d});
  embed.v = embeddings.values;

  const std::size_t maps = cfg_.encoder.maps_per_window;
  for (std::size_t h : cfg_.encoder.window_sizes) {
    if (h == 0) fail_invalid("window size must be >= 1");
    params_.add_uniform("conv." + std::to_string(h) + ".w", {maps, h * d});
    params_.add_uniform("conv." + std::to_string(h) + ".b", {maps});
  }

  const std::size_t H = cfg_.hidden_size;
  const std::size_t X = controller_input_dim();
  for (const char* gate : {"update", "reset", "cand"}) {
    params_.add_uniform(std::string("gru.") + gate + ".w", {H, X});
    params_.add_uniform(std::string("gru.") + gate + ".u", {H, H});
    params_.add_uniform(std::string("gru.") + gate + ".b", {H});
  }

  const std::size_t K = feature_dim();
  for (const Slot& s : schema_.slots) {
    params_.add_uniform("policy." + s.name + ".w", {s.action_count(), K + H});
    params_.add_uniform("policy." + s.name + ".b", {s.action_count()});
  }
  validate_shapes();
}

Model::Model(SlotSchema schema, ModelConfig cfg, ParamStore params)
    : schema_(std::move(schema)), cfg_(std::move(cfg)), params_(std::move(params)) {
  validate_shapes();
}

void Model::validate_shapes() const {
  for (const std::string& name : parameter_names(schema_, cfg_.encoder))
    if (!params_.has(name)) fail_format("model parameters missing " + name);
  if (params_.count() != parameter_names(schema_, cfg_.encoder).size())
    fail_format("model parameter store has unexpected extra entries");
  const Tensor& embed = params_.at("embed");
  if (embed.cols() != cfg_.encoder.embed_dim)
    fail_format("embedding table width does not match embed_dim");
  if (params_.at("gru.update.w").cols() != controller_input_dim())
    fail_format("controller input width mismatch (decision_sharing flag?)");
}

std::size_t Model::controller_input_dim() const {
  std::size_t dim = feature_dim();
  if (cfg_.decision_sharing) dim += schema_.total_state_width();
  return dim;
}

nn::GruParams Model::gru_params() const {
  return nn::GruParams{
      &params_.at("gru.update.w"), &params_.at("gru.update.u"),
      &params_.at("gru.update.b"), &params_.at("gru.reset.w"),
      &params_.at("gru.reset.u"),  &params_.at("gru.reset.b"),
      &params_.at("gru.cand.w"),   &params_.at("gru.cand.u"),
      &params_.at("gru.cand.b")};
}

SentenceEncoding Model::encode_sentence(const std::vector<int>& tokens,
                                        bool train_mode, Rng* rng) const {
  if (tokens.empty()) fail_invalid("encode_sentence: empty token list");
  const EncoderConfig& ec = cfg_.encoder;
  const std::size_t d = ec.embed_dim;
  const std::size_t maps = ec.maps_per_window;
  const Tensor& embed = params_.at("embed");

  // Right-pad with PAD so every window has at least one position.
  std::size_t max_window = 1;
  for (std::size_t h : ec.window_sizes) max_window = std::max(max_window, h);
  SentenceEncoding enc;
  enc.padded_tokens = tokens;
  while (enc.padded_tokens.size() < max_window)
    enc.padded_tokens.push_back(kPadId);
  const std::size_t length = enc.padded_tokens.size();

  for (int id : enc.padded_tokens)
    if (id < 0 || static_cast<std::size_t>(id) >= embed.rows())
      fail_invalid("token id " + std::to_string(id) + " outside embedding table");

  const std::size_t K = feature_dim();
  enc.features.assign(K, Real{0});
  enc.pool_argmax.assign(K, 0);
  enc.winner_active.assign(K, 0);

  std::size_t base = 0;
  for (std::size_t h : ec.window_sizes) {
    const Tensor& W = params_.at("conv." + std::to_string(h) + ".w");
    const Tensor& b = params_.at("conv." + std::to_string(h) + ".b");
    const std::size_t positions = length - h + 1;
    for (std::size_t m = 0; m < maps; ++m) {
      const Real* w = W.v.data() + m * (h * d);
      Real best = 0;
      std::size_t best_pos = 0;
      bool best_active = false;
      for (std::size_t pos = 0; pos < positions; ++pos) {
        Real pre = b.v[m];
        for (std::size_t j = 0; j < h; ++j) {
          const Real* x =
              embed.v.data() +
              static_cast<std::size_t>(enc.padded_tokens[pos + j]) * d;
          const Real* wj = w + j * d;
          for (std::size_t e = 0; e < d; ++e) pre += wj[e] * x[e];
        }
        const Real activated = pre > 0 ? pre : Real{0};
        if (pos == 0 || activated > best) {
          best = activated;
          best_pos = pos;
          best_active = pre > 0;
        }
      }
      enc.features[base + m] = best;
      enc.pool_argmax[base + m] = best_pos;
      enc.winner_active[base + m] = best_active ? 1 : 0;
    }
    base += maps;
  }

  if (train_mode && ec.dropout_p > 0) {
    if (!rng) fail_invalid("encode_sentence: dropout requires an rng");
    enc.dropout_keep = nn::dropout_mask(K, ec.dropout_p, *rng);
    nn::dropout_apply(enc.features, enc.dropout_keep, ec.dropout_p);
  }
  return enc;
}

void Model::append_state_onehots(const std::vector<int>& states,
                                 std::vector<Real>& input) const {
  for (std::size_t i = 0; i < schema_.slot_count(); ++i) {
    const std::size_t width = schema_.slots[i].action_count();
    const std::size_t at = input.size();
    input.resize(at + width, Real{0});
    input[at + static_cast<std::size_t>(states[i])] = Real{1};
  }
}

void Model::head_logits(std::size_t slot, std::span<const Real> combined,
                        std::vector<Real>& logits) const {
  const Tensor& W = params_.at("policy." + schema_.slots[slot].name + ".w");
  const Tensor& b = params_.at("policy." + schema_.slots[slot].name + ".b");
  const std::size_t rows = W.rows(), cols = W.cols();
  logits.assign(rows, Real{0});
  for (std::size_t r = 0; r < rows; ++r) {
    Real acc = b.v[r];
    const Real* w = W.v.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += w[c] * combined[c];
    logits[r] = acc;
  }
}

void Model::controller_step(std::span<const Real> h_prev,
                            const SentenceEncoding& enc,
                            const std::vector<int>& prev_states,
                            StepTrace& out) const {
  if (prev_states.size() != schema_.slot_count())
    fail_invalid("controller_step: state count does not match schema");
  std::vector<Real> input(enc.features.begin(), enc.features.end());
  if (cfg_.decision_sharing) append_state_onehots(prev_states, input);

  out.hidden.assign(cfg_.hidden_size, Real{0});
  nn::gru_step(gru_params(), h_prev, input, out.hidden, &out.gru);

  // policy heads read [c (+) h]
  std::vector<Real> combined(enc.features.begin(), enc.features.end());
  combined.insert(combined.end(), out.hidden.begin(), out.hidden.end());
  out.probs.resize(schema_.slot_count());
  std::vector<Real> logits;
  for (std::size_t i = 0; i < schema_.slot_count(); ++i) {
    head_logits(i, combined, logits);
    out.probs[i].assign(logits.size(), Real{0});
    nn::softmax(logits, out.probs[i]);
  }
}

EpisodeTrace Model::run(const Paragraph& paragraph,
                        const std::vector<std::vector<int>>* forced_actions,
                        DecodeMode mode, Real epsilon, bool train_mode,
                        Rng* rng) const {
  if (paragraph.sentence_count() == 0)
    fail_invalid("forward: paragraph has no sentences");
  if (mode == DecodeMode::sample && !rng)
    fail_invalid("forward: sample mode requires an rng");

  const std::size_t slots = schema_.slot_count();
  EpisodeTrace trace;
  trace.train_mode = train_mode;
  trace.steps.reserve(paragraph.sentence_count());

  std::vector<Real> h(cfg_.hidden_size, Real{0});
  std::vector<int> states(slots, 0);

  for (std::size_t t = 0; t < paragraph.sentence_count(); ++t) {
    StepTrace step;
    step.enc = encode_sentence(paragraph.sentences[t], train_mode, rng);
    controller_step(h, step.enc, states, step);

    step.actions.assign(slots, 0);
    step.states.assign(slots, 0);
    for (std::size_t i = 0; i < slots; ++i) {
      const std::size_t n_actions = schema_.slots[i].action_count();
      int action;
      if (forced_actions) {
        action = (*forced_actions)[t][i];
      } else if (mode == DecodeMode::greedy) {
        action = static_cast<int>(nn::argmax_lowest(step.probs[i]));
      } else {
        action = static_cast<int>(sample_action(step.probs[i], epsilon, *rng));
      }
      step.states[i] = symbolic_update(states[i], action, n_actions);
      step.actions[i] = action;
    }
    states = step.states;
    h = step.hidden;
    trace.steps.push_back(std::move(step));
  }

  trace.jump_step.assign(slots, paragraph.sentence_count());
  for (std::size_t i = 0; i < slots; ++i)
    for (std::size_t t = 0; t < trace.steps.size(); ++t)
      if (trace.steps[t].states[i] != 0) {
        trace.jump_step[i] = t + 1;
        break;
      }
  return trace;
}

EpisodeTrace Model::forward(const Paragraph& paragraph, DecodeMode mode,
                            Real epsilon, bool train_mode, Rng* rng) const {
  return run(paragraph, nullptr, mode, epsilon, train_mode, rng);
}

EpisodeTrace Model::forward_forced(const Paragraph& paragraph,
                                   const std::vector<std::vector<int>>& actions,
                                   bool train_mode, Rng* rng) const {
  if (actions.size() != paragraph.sentence_count())
    fail_invalid("forward_forced: one action row per sentence required");
  return run(paragraph, &actions, DecodeMode::greedy, 0, train_mode, rng);
}

int Model::final_prediction(const EpisodeTrace& trace, std::size_t slot,
                            bool fallback_non_default) const {
  const StepTrace& last = trace.steps.back();
  const int state = last.states[slot];
  if (state != 0 || !fallback_non_default) return state;
  const std::vector<Real>& probs = last.probs[slot];
  std::size_t best = 1;
  for (std::size_t i = 2; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;
  return static_cast<int>(best);
}

void Model::encoder_backward(const SentenceEncoding& enc, std::vector<Real> dc,
                             ParamStore& grads) const {
  const EncoderConfig& ec = cfg_.encoder;
  if (!enc.dropout_keep.empty())
    nn::dropout_backward(dc, enc.dropout_keep, ec.dropout_p);

  const std::size_t d = ec.embed_dim;
  const std::size_t maps = ec.maps_per_window;
  const Tensor& embed = params_.at("embed");
  Tensor& dembed = grads.at("embed");

  std::size_t base = 0;
  for (std::size_t h : ec.window_sizes) {
    const Tensor& W = params_.at("conv." + std::to_string(h) + ".w");
    Tensor& dW = grads.at("conv." + std::to_string(h) + ".w");
    Tensor& db = grads.at("conv." + std::to_string(h) + ".b");
    for (std::size_t m = 0; m < maps; ++m) {
      const std::size_t k = base + m;
      const Real dpre = dc[k];
      if (dpre == Real{0} || !enc.winner_active[k]) continue;
      const std::size_t pos = enc.pool_argmax[k];
      const Real* w = W.v.data() + m * (h * d);
      Real* dw = dW.v.data() + m * (h * d);
      db.v[m] += dpre;
      for (std::size_t j = 0; j < h; ++j) {
        const int tok = enc.padded_tokens[pos + j];
        const Real* x = embed.v.data() + static_cast<std::size_t>(tok) * d;
        const Real* wj = w + j * d;
        Real* dwj = dw + j * d;
        for (std::size_t e = 0; e < d; ++e) dwj[e] += dpre * x[e];
        if (tok != kPadId) {  // PAD row is frozen
          Real* dx = dembed.v.data() + static_cast<std::size_t>(tok) * d;
          for (std::size_t e = 0; e < d; ++e) dx[e] += dpre * wj[e];
        }
      }
    }
    base += maps;
  }
}

void Model::backward_weighted_logprob(
    const EpisodeTrace& trace, const std::vector<std::vector<int>>& actions,
    const std::vector<std::vector<Real>>& weights, ParamStore& grads) const {
  const std::size_t T = trace.sentence_count();
  const std::size_t slots = schema_.slot_count();
  const std::size_t K = feature_dim();
  const std::size_t H = cfg_.hidden_size;
  const std::size_t X = controller_input_dim();

  nn::GruParams gp = gru_params();
  nn::GruGrads gg{grads.at("gru.update.w").v.data(),
                  grads.at("gru.update.u").v.data(),
                  grads.at("gru.update.b").v.data(),
                  grads.at("gru.reset.w").v.data(),
                  grads.at("gru.reset.u").v.data(),
                  grads.at("gru.reset.b").v.data(),
                  grads.at("gru.cand.w").v.data(),
                  grads.at("gru.cand.u").v.data(),
                  grads.at("gru.cand.b").v.data()};

  std::vector<Real> dh(H, Real{0});
  std::vector<Real> dh_prev(H), dx(X), dcomb(K + H), dlogits, combined(K + H);

  for (std::size_t t = T; t-- > 0;) {
    const StepTrace& step = trace.steps[t];
    std::fill(dcomb.begin(), dcomb.end(), Real{0});

    bool any_head = false;
    for (std::size_t i = 0; i < slots; ++i) {
      const Real w = weights[t][i];
      if (w == Real{0}) continue;
      any_head = true;
      const std::vector<Real>& probs = step.probs[i];
      dlogits.assign(probs.size(), Real{0});
      nn::log_prob_backward(probs, static_cast<std::size_t>(actions[t][i]), w,
                            dlogits.data());
      std::copy(step.enc.features.begin(), step.enc.features.end(),
                combined.begin());
      std::copy(step.hidden.begin(), step.hidden.end(), combined.begin() + K);
      const Tensor& W = params_.at("policy." + schema_.slots[i].name + ".w");
      Tensor& dW = grads.at("policy." + schema_.slots[i].name + ".w");
      Tensor& db = grads.at("policy." + schema_.slots[i].name + ".b");
      nn::affine_backward_raw(W, combined, dlogits, dW.v.data(), dcomb.data(),
                              db.v.data());
    }

    // dh gets the head contribution on top of what later steps propagated
    if (any_head)
      for (std::size_t i = 0; i < H; ++i) dh[i] += dcomb[K + i];

    bool dh_zero = true;
    for (Real v : dh)
      if (v != Real{0}) {
        dh_zero = false;
        break;
      }

    std::vector<Real> dc(dcomb.begin(), dcomb.begin() + K);
    if (!dh_zero) {
      std::fill(dh_prev.begin(), dh_prev.end(), Real{0});
      std::fill(dx.begin(), dx.end(), Real{0});
      nn::gru_step_backward(gp, step.gru, dh, gg, dx.data(), dh_prev.data());
      // shared-state one-hot inputs are constants; only the feature slice
      // propagates further
      for (std::size_t i = 0; i < K; ++i) dc[i] += dx[i];
      dh = dh_prev;
    }

    bool dc_zero = true;
    for (Real v : dc)
      if (v != Real{0}) {
        dc_zero = false;
        break;
      }
    if (!dc_zero) encoder_backward(step.enc, std::move(dc), grads);
  }
}

void Model::backward_weighted_logprob(
    const EpisodeTrace& trace, const std::vector<std::vector<Real>>& weights,
    ParamStore& grads) const {
  std::vector<std::vector<int>> actions(trace.sentence_count());
  for (std::size_t t = 0; t < trace.sentence_count(); ++t)
    actions[t] = trace.steps[t].actions;
  backward_weighted_logprob(trace, actions, weights, grads);
}

Real Model::xent_loss(const EpisodeTrace& trace,
                      const std::vector<int>& gold) const {
  const StepTrace& last = trace.steps.back();
  Real loss = 0;
  for (std::size_t i = 0; i < schema_.slot_count(); ++i) {
    const Real p = last.probs[i][static_cast<std::size_t>(gold[i])];
    loss -= std::log(std::max(p, std::numeric_limits<Real>::min()));
  }
  return loss;
}

void Model::backward_xent(const EpisodeTrace& trace,
                          const std::vector<int>& gold,
                          ParamStore& grads) const {
  const std::size_t T = trace.sentence_count();
  const std::size_t slots = schema_.slot_count();
  std::vector<std::vector<int>> actions(T, std::vector<int>(slots, 0));
  std::vector<std::vector<Real>> weights(T, std::vector<Real>(slots, Real{0}));
  for (std::size_t i = 0; i < slots; ++i) {
    actions[T - 1][i] = gold[i];
    weights[T - 1][i] = Real{-1};
  }
  backward_weighted_logprob(trace, actions, weights, grads);
}

std::vector<Real> Model::grad_logprob_prev_encoding(const EpisodeTrace& trace,
                                                    std::size_t slot,
                                                    std::size_t t) const {
  if (t < 2 || t > trace.sentence_count())
    fail_invalid(
        "grad_logprob_prev_encoding: step must satisfy 2 <= t <= T; the t = 1 "
        "case uses the first-encoding variant");
  const std::size_t K = feature_dim();
  const std::size_t H = cfg_.hidden_size;
  const std::size_t X = controller_input_dim();
  const StepTrace& step = trace.steps[t - 1];
  const StepTrace& prev = trace.steps[t - 2];

  const std::size_t action = static_cast<std::size_t>(step.actions[slot]);
  std::vector<Real> dlogits(step.probs[slot].size(), Real{0});
  nn::log_prob_backward(step.probs[slot], action, Real{1}, dlogits.data());

  std::vector<Real> combined(step.enc.features);
  combined.insert(combined.end(), step.hidden.begin(), step.hidden.end());
  std::vector<Real> dcomb(K + H, Real{0});
  const Tensor& W = params_.at("policy." + schema_.slots[slot].name + ".w");
  nn::affine_backward_raw(W, combined, dlogits, nullptr, dcomb.data(), nullptr);

  std::vector<Real> dh(dcomb.begin() + K, dcomb.end());
  std::vector<Real> dh_prev(H, Real{0});
  nn::gru_step_backward(gru_params(), step.gru, dh, nn::GruGrads{}, nullptr,
                        dh_prev.data());
  std::vector<Real> dx(X, Real{0});
  nn::gru_step_backward(gru_params(), prev.gru, dh_prev, nn::GruGrads{},
                        dx.data(), nullptr);
  return std::vector<Real>(dx.begin(), dx.begin() + K);
}

std::vector<Real> Model::grad_logprob_first_encoding(const EpisodeTrace& trace,
                                                     std::size_t slot) const {
  const std::size_t K = feature_dim();
  const std::size_t H = cfg_.hidden_size;
  const std::size_t X = controller_input_dim();
  const StepTrace& step = trace.steps.front();

  const std::size_t action = static_cast<std::size_t>(step.actions[slot]);
  std::vector<Real> dlogits(step.probs[slot].size(), Real{0});
  nn::log_prob_backward(step.probs[slot], action, Real{1}, dlogits.data());

  std::vector<Real> combined(step.enc.features);
  combined.insert(combined.end(), step.hidden.begin(), step.hidden.end());
  std::vector<Real> dcomb(K + H, Real{0});
  const Tensor& W = params_.at("policy." + schema_.slots[slot].name + ".w");
  nn::affine_backward_raw(W, combined, dlogits, nullptr, dcomb.data(), nullptr);

  std::vector<Real> dh(dcomb.begin() + K, dcomb.end());
  std::vector<Real> dx(X, Real{0});
  nn::gru_step_backward(gru_params(), step.gru, dh, nn::GruGrads{}, dx.data(),
                        nullptr);
  std::vector<Real> dc(dcomb.begin(), dcomb.begin() + K);
  for (std::size_t i = 0; i < K; ++i) dc[i] += dx[i];
  return dc;
}

}  // namespace jumper
