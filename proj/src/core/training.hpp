#pragma once

#include <functional>

#include "core/adadelta.hpp"
#include "core/model.hpp"
#include "core/sampling.hpp"

namespace jumper {

struct RewardConfig {
  Real intermediate_r = 0.05;
  Real gamma = 0.9;
  Real epsilon = 0.1;
  std::size_t baseline_samples = 5;  // M
  bool truncate_negative = true;
};

struct TrainConfig {
  enum class Mode { reinforce, cross_entropy };
  std::size_t batch_size = 50;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  Mode mode = Mode::reinforce;
};

// 1 if the final symbolic state matches the gold class, else 0.
Real final_reward(int predicted, int gold);

// The per-step shaping reward: r while the slot is still undecided.
Real intermediate_reward(int state, const RewardConfig& cfg);

// Discounted sum of shaping rewards from step t (1-based) through the jump
// step, plus the undiscounted final reward.
Real cumulative_reward(const EpisodeTrace& trace, std::size_t slot,
                       std::size_t t, int gold, const RewardConfig& cfg);

// REINFORCE gradient over one batch, accumulated into the value buffers of
// grads (pre-allocated as zeros_like of the parameters). Each example rolls
// out M sampled traces; the average episode reward over the M forms the
// baseline, and the gradient flows through the first rollout with per-step
// weight -(R_{t:T_jump} - baseline) / (N * T_j), clamped at zero when
// truncate_negative. Returns the mean designated-rollout episode reward
// (averaged over slots) for reporting.
Real reinforce_batch_gradient(const Model& model,
                              std::span<const Example* const> batch,
                              const RewardConfig& cfg, std::uint64_t seed,
                              std::uint64_t epoch, int workers,
                              ParamStore& grads);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_reward_mean = 0;
  double dev_ca = 0;
  double dev_f1 = 0;
  double elapsed_s = 0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based; 0 when no epoch ran
  double best_dev_ca = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Epochs of shuffled batches with one AdaDelta step per batch; keeps the
// parameters of the best dev-CA epoch (restored into the model on return).
TrainReport train(Model& model, const Dataset& train_data, const Dataset& dev,
                  const TrainConfig& tcfg, const RewardConfig& rcfg,
                  const AdaDelta::Options& opt, const EpochCallback& on_epoch);

// Cross-entropy comparator: same architecture, loss on the final step's
// distributions, no sampling and no symbolic gating.
TrainReport train_xent(Model& model, const Dataset& train_data,
                       const Dataset& dev, const TrainConfig& tcfg,
                       const AdaDelta::Options& opt,
                       const EpochCallback& on_epoch);

// Per-step argmax scan of a greedy trace: first step predicting something
// other than the default, and that class; (0, T) when every step stays at
// the default.
std::pair<int, std::size_t> xent_first_prediction(const EpisodeTrace& trace,
                                                  std::size_t slot);

struct Prediction {
  int class_index = 0;
  std::size_t jump_step = 0;  // 1-based; T when no jump
};

// Greedy predictions for a whole dataset. In cross-entropy mode the
// prediction comes from xent_first_prediction (with the configured
// fallback applied when the scan stays at the default).
std::vector<std::vector<Prediction>> predict_dataset(const Model& model,
                                                     const Dataset& data,
                                                     TrainConfig::Mode mode,
                                                     int workers);

}  // namespace jumper
