#include "core/training.hpp"

#include <chrono>
#include <cmath>

#include "core/metrics.hpp"

namespace jumper {

Real final_reward(int predicted, int gold) {
  return predicted == gold ? Real{1} : Real{0};
}

Real intermediate_reward(int state, const RewardConfig& cfg) {
  return state == 0 ? cfg.intermediate_r : Real{0};
}

Real cumulative_reward(const EpisodeTrace& trace, std::size_t slot,
                       std::size_t t, int gold, const RewardConfig& cfg) {
  const std::size_t t_jump = trace.jump_step[slot];
  if (t < 1 || t > t_jump)
    fail_invalid("cumulative_reward: step " + std::to_string(t) +
                 " outside [1, " + std::to_string(t_jump) + "]");
  Real sum = 0;
  Real discount = 1;
  for (std::size_t tt = t; tt <= t_jump; ++tt) {
    sum += discount * intermediate_reward(trace.steps[tt - 1].states[slot], cfg);
    discount *= cfg.gamma;
  }
  const int final_state = trace.steps.back().states[slot];
  return sum + final_reward(final_state, gold);
}

Real reinforce_batch_gradient(const Model& model,
                              std::span<const Example* const> batch,
                              const RewardConfig& cfg, std::uint64_t seed,
                              std::uint64_t epoch, int workers,
                              ParamStore& grads) {
  if (batch.empty()) fail_invalid("reinforce_batch_gradient: empty batch");
  const std::size_t n = batch.size();
  const std::size_t slots = model.schema().slot_count();
  const std::size_t m_samples = std::max<std::size_t>(cfg.baseline_samples, 1);

  const int w = std::min<int>(workers, static_cast<int>(n));
  std::vector<ParamStore> worker_grads;
  std::vector<double> worker_reward(static_cast<std::size_t>(std::max(w, 1)), 0.0);
  for (int i = 0; i < std::max(w, 1); ++i)
    worker_grads.push_back(grads.zeros_like());

  parallel_for(n, w, [&](std::size_t j, int worker) {
    const Example& ex = *batch[j];
    const std::size_t t_count = ex.paragraph.sentence_count();

    // M sampled rollouts; the first is the gradient trace.
    std::vector<EpisodeTrace> traces;
    traces.reserve(m_samples);
    for (std::size_t m = 0; m < m_samples; ++m) {
      Rng rng(derive_seed(seed, epoch, static_cast<std::uint64_t>(ex.id), m));
      traces.push_back(model.forward(ex.paragraph, DecodeMode::sample,
                                     cfg.epsilon, /*train_mode=*/true, &rng));
    }

    const EpisodeTrace& main = traces.front();
    std::vector<std::vector<Real>> weights(
        t_count, std::vector<Real>(slots, Real{0}));
    double reward_sum = 0;
    for (std::size_t i = 0; i < slots; ++i) {
      // With a single rollout there is nothing to average against; the
      // estimator degrades to vanilla REINFORCE.
      Real baseline = 0;
      if (m_samples > 1) {
        for (const EpisodeTrace& tr : traces)
          baseline += cumulative_reward(tr, i, 1, ex.gold[i], cfg);
        baseline /= static_cast<Real>(m_samples);
      }

      const std::size_t t_jump = main.jump_step[i];
      const Real scale =
          Real{1} / (static_cast<Real>(n) * static_cast<Real>(t_count));
      for (std::size_t t = 1; t <= t_jump; ++t) {
        Real advantage =
            cumulative_reward(main, i, t, ex.gold[i], cfg) - baseline;
        if (cfg.truncate_negative) advantage = std::max<Real>(advantage, 0);
        // loss convention: gradients descend -J
        weights[t - 1][i] = -advantage * scale;
      }
      reward_sum += cumulative_reward(main, i, 1, ex.gold[i], cfg);
    }
    model.backward_weighted_logprob(main, weights, worker_grads[static_cast<std::size_t>(worker)]);
    worker_reward[static_cast<std::size_t>(worker)] +=
        reward_sum / static_cast<double>(slots);
  });

  double reward_total = 0;
  for (std::size_t i = 0; i < worker_grads.size(); ++i) {
    grads.axpy_values(worker_grads[i], Real{1});
    reward_total += worker_reward[i];
  }
  return static_cast<Real>(reward_total / static_cast<double>(n));
}

std::pair<int, std::size_t> xent_first_prediction(const EpisodeTrace& trace,
                                                  std::size_t slot) {
  for (std::size_t t = 0; t < trace.sentence_count(); ++t) {
    const std::size_t a = nn::argmax_lowest(trace.steps[t].probs[slot]);
    if (a != 0) return {static_cast<int>(a), t + 1};
  }
  return {0, trace.sentence_count()};
}

namespace {

Prediction predict_one(const Model& model, const EpisodeTrace& trace,
                       std::size_t slot, TrainConfig::Mode mode) {
  const bool fallback = model.config().fallback_non_default;
  if (mode == TrainConfig::Mode::cross_entropy) {
    auto [cls, step] = xent_first_prediction(trace, slot);
    if (cls == 0 && fallback)
      cls = model.final_prediction(trace, slot, /*fallback_non_default=*/true);
    return {cls, step};
  }
  return {model.final_prediction(trace, slot, fallback),
          trace.jump_step[slot]};
}

}  // namespace

std::vector<std::vector<Prediction>> predict_dataset(const Model& model,
                                                     const Dataset& data,
                                                     TrainConfig::Mode mode,
                                                     int workers) {
  std::vector<std::vector<Prediction>> out(data.size());
  parallel_for(data.size(), workers, [&](std::size_t j, int) {
    const Example& ex = data.examples[j];
    EpisodeTrace trace = model.forward(ex.paragraph, DecodeMode::greedy, 0,
                                       /*train_mode=*/false, nullptr);
    std::vector<Prediction> preds(model.schema().slot_count());
    for (std::size_t i = 0; i < preds.size(); ++i)
      preds[i] = predict_one(model, trace, i, mode);
    out[j] = std::move(preds);
  });
  return out;
}

namespace {

struct DevScores {
  double ca = 0;
  double f1 = 0;
};

DevScores dev_scores(const Model& model, const Dataset& dev,
                     TrainConfig::Mode mode, int workers) {
  auto preds = predict_dataset(model, dev, mode, workers);
  std::vector<EvalRecord> records;
  records.reserve(dev.size() * model.schema().slot_count());
  for (std::size_t j = 0; j < dev.size(); ++j)
    for (std::size_t i = 0; i < model.schema().slot_count(); ++i) {
      EvalRecord r;
      r.slot = i;
      r.predicted = preds[j][i].class_index;
      r.gold = dev.examples[j].gold[i];
      r.predicted_jump = preds[j][i].jump_step;
      r.sentence_count = dev.examples[j].paragraph.sentence_count();
      records.push_back(r);
    }
  DevScores s;
  s.ca = classification_accuracy(records);
  s.f1 = macro_f1(records, model.schema());
  return s;
}

struct ValueSnapshot {
  std::vector<Real> values;
  void capture(const ParamStore& params) {
    values.clear();
    for (const auto& [name, t] : params)
      values.insert(values.end(), t.v.begin(), t.v.end());
  }
  void restore(ParamStore& params) const {
    std::size_t at = 0;
    for (auto& [name, t] : params) {
      std::copy(values.begin() + static_cast<std::ptrdiff_t>(at),
                values.begin() + static_cast<std::ptrdiff_t>(at + t.size()),
                t.v.begin());
      at += t.size();
    }
  }
};

template <typename BatchGrad>
TrainReport run_training(Model& model, const Dataset& train_data,
                         const Dataset& dev, const TrainConfig& tcfg,
                         const AdaDelta::Options& opt,
                         const EpochCallback& on_epoch, BatchGrad&& batch_grad) {
  if (train_data.examples.empty()) fail_invalid("train: empty dataset");
  if (dev.examples.empty()) fail_invalid("train: empty development set");
  if (tcfg.batch_size == 0) fail_invalid("train: batch_size must be >= 1");

  const int workers = worker_count();
  AdaDelta optimizer(opt);
  TrainReport report;
  ValueSnapshot best;
  std::size_t since_best = 0;

  std::vector<std::size_t> order(train_data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    Rng shuffle_rng(derive_seed(tcfg.seed, 0x5d, epoch));
    fisher_yates(order, shuffle_rng);

    double reward_accum = 0;
    std::size_t batches = 0;
    for (std::size_t at = 0; at < order.size(); at += tcfg.batch_size) {
      const std::size_t end = std::min(order.size(), at + tcfg.batch_size);
      std::vector<const Example*> batch;
      batch.reserve(end - at);
      for (std::size_t i = at; i < end; ++i)
        batch.push_back(&train_data.examples[order[i]]);

      ParamStore grads = model.params().zeros_like();
      reward_accum += batch_grad(batch, epoch, workers, grads);
      ++batches;
      optimizer.step(model.params(), grads);
    }

    DevScores scores = dev_scores(model, dev, tcfg.mode, workers);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_reward_mean = batches ? reward_accum / static_cast<double>(batches) : 0;
    rec.dev_ca = scores.ca;
    rec.dev_f1 = scores.f1;
    rec.elapsed_s = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - started)
                        .count();
    report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (report.best_epoch == 0 || scores.ca > report.best_dev_ca) {
      report.best_epoch = epoch;
      report.best_dev_ca = scores.ca;
      best.capture(model.params());
      since_best = 0;
    } else if (++since_best >= tcfg.patience) {
      break;
    }
  }

  if (report.best_epoch != 0) best.restore(model.params());
  return report;
}

}  // namespace

TrainReport train(Model& model, const Dataset& train_data, const Dataset& dev,
                  const TrainConfig& tcfg, const RewardConfig& rcfg,
                  const AdaDelta::Options& opt, const EpochCallback& on_epoch) {
  if (tcfg.mode != TrainConfig::Mode::reinforce)
    fail_invalid("train: config mode is not reinforce");
  return run_training(
      model, train_data, dev, tcfg, opt, on_epoch,
      [&](const std::vector<const Example*>& batch, std::size_t epoch,
          int workers, ParamStore& grads) {
        return reinforce_batch_gradient(model, batch, rcfg, tcfg.seed, epoch,
                                        workers, grads);
      });
}

TrainReport train_xent(Model& model, const Dataset& train_data,
                       const Dataset& dev, const TrainConfig& tcfg,
                       const AdaDelta::Options& opt,
                       const EpochCallback& on_epoch) {
  if (tcfg.mode != TrainConfig::Mode::cross_entropy)
    fail_invalid("train_xent: config mode is not cross_entropy");
  const std::size_t slots = model.schema().slot_count();
  return run_training(
      model, train_data, dev, tcfg, opt, on_epoch,
      [&](const std::vector<const Example*>& batch, std::size_t epoch,
          int workers, ParamStore& grads) {
        const std::size_t n = batch.size();
        const int w = std::min<int>(workers, static_cast<int>(n));
        std::vector<ParamStore> worker_grads;
        std::vector<double> worker_hits(static_cast<std::size_t>(std::max(w, 1)), 0.0);
        for (int i = 0; i < std::max(w, 1); ++i)
          worker_grads.push_back(grads.zeros_like());

        parallel_for(n, w, [&](std::size_t j, int worker) {
          const Example& ex = *batch[j];
          const std::size_t t_count = ex.paragraph.sentence_count();
          // no sampling, no symbolic gating: force the default action so
          // shared states stay constant
          std::vector<std::vector<int>> none_actions(
              t_count, std::vector<int>(slots, 0));
          Rng rng(derive_seed(tcfg.seed, epoch,
                              static_cast<std::uint64_t>(ex.id), 0x8e));
          EpisodeTrace trace = model.forward_forced(ex.paragraph, none_actions,
                                                    /*train_mode=*/true, &rng);
          std::vector<std::vector<int>> actions(t_count,
                                                std::vector<int>(slots, 0));
          std::vector<std::vector<Real>> weights(
              t_count, std::vector<Real>(slots, Real{0}));
          double hits = 0;
          for (std::size_t i = 0; i < slots; ++i) {
            actions[t_count - 1][i] = ex.gold[i];
            weights[t_count - 1][i] = Real{-1} / static_cast<Real>(n);
            const auto final_probs = trace.steps.back().probs[i];
            hits += nn::argmax_lowest(final_probs) ==
                    static_cast<std::size_t>(ex.gold[i]);
          }
          model.backward_weighted_logprob(
              trace, actions, weights,
              worker_grads[static_cast<std::size_t>(worker)]);
          worker_hits[static_cast<std::size_t>(worker)] +=
              hits / static_cast<double>(slots);
        });

        double hit_total = 0;
        for (std::size_t i = 0; i < worker_grads.size(); ++i) {
          grads.axpy_values(worker_grads[i], Real{1});
          hit_total += worker_hits[i];
        }
        return hit_total / static_cast<double>(n);
      });
}

}  // namespace jumper
