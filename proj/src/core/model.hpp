#pragma once

#include <optional>

#include "core/nn.hpp"
#include "core/tensor.hpp"
#include "core/text.hpp"

namespace jumper {

struct EncoderConfig {
  std::vector<std::size_t> window_sizes = {1, 2, 3, 4, 5};
  std::size_t maps_per_window = 200;
  Real dropout_p = 0.5;
  std::size_t embed_dim = 300;

  std::size_t feature_dim() const {  // K
    return window_sizes.size() * maps_per_window;
  }
};

struct ModelConfig {
  EncoderConfig encoder;
  std::size_t hidden_size = 20;
  bool decision_sharing = false;
  bool fallback_non_default = true;
};

// Output of the CNN encoder for one sentence, with everything backward and
// rationale backtracking need.
struct SentenceEncoding {
  std::vector<Real> features;              // c, length K (post-dropout if training)
  std::vector<std::size_t> pool_argmax;    // winning window start, per kernel
  std::vector<std::uint8_t> winner_active; // ReLU fired at the winner
  std::vector<std::uint8_t> dropout_keep;  // empty in eval mode
  std::vector<int> padded_tokens;          // token ids incl. right PAD padding
};

enum class DecodeMode { greedy, sample };

struct StepTrace {
  SentenceEncoding enc;
  nn::GruCache gru;                      // gru.x is the controller input
  std::vector<Real> hidden;              // h_t
  std::vector<std::vector<Real>> probs;  // per slot, length N_i+1
  std::vector<int> actions;              // per slot
  std::vector<int> states;               // symbolic state after this step
};

struct EpisodeTrace {
  std::vector<StepTrace> steps;
  std::vector<std::size_t> jump_step;  // per slot, 1-based; T when no jump
  bool train_mode = false;

  std::size_t sentence_count() const { return steps.size(); }
  bool jumped(std::size_t slot) const {
    return steps.back().states[slot] != 0;
  }
};

// Eq-5 state machine: a non-default state is final; from the default state
// the action is adopted as-is.
int symbolic_update(int state_prev, int action, std::size_t action_count);

class Model {
public:
  Model(SlotSchema schema, ModelConfig cfg, const EmbeddingTable& embeddings,
        std::uint64_t seed);
  // Checkpoint path: adopt existing parameters (shapes are validated).
  Model(SlotSchema schema, ModelConfig cfg, ParamStore params);

  const SlotSchema& schema() const { return schema_; }
  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  std::size_t feature_dim() const { return cfg_.encoder.feature_dim(); }
  std::size_t controller_input_dim() const;
  std::size_t hidden_size() const { return cfg_.hidden_size; }
  std::size_t vocab_rows() const { return params_.at("embed").rows(); }

  // One CNN pass over a sentence. rng is consulted only when train_mode and
  // dropout is enabled.
  SentenceEncoding encode_sentence(const std::vector<int>& tokens,
                                   bool train_mode, Rng* rng) const;

  // One controller step: GRU update plus all policy heads.
  // prev_states are per-slot class indices from the previous step.
  void controller_step(std::span<const Real> h_prev, const SentenceEncoding& enc,
                       const std::vector<int>& prev_states, StepTrace& out) const;

  // Full rollout over a paragraph. In sample mode actions are drawn with
  // epsilon-exploration; greedy mode takes the argmax (ties -> lowest index).
  EpisodeTrace forward(const Paragraph& paragraph, DecodeMode mode,
                       Real epsilon, bool train_mode, Rng* rng) const;

  // Teacher-forced rollout: actions[t][slot] is taken verbatim.
  EpisodeTrace forward_forced(const Paragraph& paragraph,
                              const std::vector<std::vector<int>>& actions,
                              bool train_mode, Rng* rng) const;

  // Final class for a slot; the fallback picks the most likely non-default
  // entry of the last step's policy distribution when no jump happened.
  int final_prediction(const EpisodeTrace& trace, std::size_t slot,
                       bool fallback_non_default) const;

  // Accumulates d/dparams of sum_{t,slot} weight[t][slot] *
  // log pi_t^(slot)(action[t][slot]) into the value buffers of grads.
  // Entries with weight 0 contribute nothing.
  void backward_weighted_logprob(const EpisodeTrace& trace,
                                 const std::vector<std::vector<int>>& actions,
                                 const std::vector<std::vector<Real>>& weights,
                                 ParamStore& grads) const;

  // Trace-recorded actions variant.
  void backward_weighted_logprob(const EpisodeTrace& trace,
                                 const std::vector<std::vector<Real>>& weights,
                                 ParamStore& grads) const;

  // Sum over slots of -log pi_T(gold) at the final step.
  Real xent_loss(const EpisodeTrace& trace, const std::vector<int>& gold) const;
  void backward_xent(const EpisodeTrace& trace, const std::vector<int>& gold,
                     ParamStore& grads) const;

  // d log pi_t^(slot)(a_t) / d c^(t-1): the policy log-prob at step t
  // (1-based, t >= 2) differentiated against the previous sentence encoding.
  std::vector<Real> grad_logprob_prev_encoding(const EpisodeTrace& trace,
                                               std::size_t slot,
                                               std::size_t t) const;
  // First-step variant: gradient against the step-1 encoding itself.
  std::vector<Real> grad_logprob_first_encoding(const EpisodeTrace& trace,
                                                std::size_t slot) const;

  static std::vector<std::string> parameter_names(const SlotSchema& schema,
                                                  const EncoderConfig& enc);

private:
  nn::GruParams gru_params() const;
  void head_logits(std::size_t slot, std::span<const Real> combined,
                   std::vector<Real>& logits) const;
  void append_state_onehots(const std::vector<int>& states,
                            std::vector<Real>& input) const;
  EpisodeTrace run(const Paragraph& paragraph,
                   const std::vector<std::vector<int>>* forced_actions,
                   DecodeMode mode, Real epsilon, bool train_mode,
                   Rng* rng) const;
  void encoder_backward(const SentenceEncoding& enc, std::vector<Real> dc,
                        ParamStore& grads) const;
  void validate_shapes() const;

  SlotSchema schema_;
  ModelConfig cfg_;
  ParamStore params_;
};

}  // namespace jumper
