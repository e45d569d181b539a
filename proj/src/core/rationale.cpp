#include "core/rationale.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace jumper {

std::vector<std::size_t> top_dims_by_score(const std::vector<Real>& scores,
                                           std::size_t top_d) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];  // stable: ties keep the lower index first
  });
  order.resize(std::min(top_d, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<Real> rationale_scores(const std::vector<Real>& grad,
                                   const std::vector<Real>& c_now,
                                   const std::vector<Real>* c_prev) {
  std::vector<Real> scores(grad.size());
  for (std::size_t k = 0; k < grad.size(); ++k) {
    const Real diff = c_prev ? c_now[k] - (*c_prev)[k] : c_now[k];
    scores[k] = grad[k] * diff * diff;
  }
  return scores;
}

namespace {

void validate(const Model& model, const EpisodeTrace& trace, std::size_t slot,
              const RationaleConfig& cfg) {
  if (slot >= model.schema().slot_count())
    fail_invalid("rationale: slot index out of range");
  if (cfg.top_d < 1 || cfg.top_d > model.feature_dim())
    fail_invalid("rationale: top_d must be in [1, K]");
  if (trace.train_mode)
    fail_invalid("rationale: requires an evaluation-mode trace");
}

}  // namespace

std::vector<std::size_t> top_d_dims(const Model& model,
                                    const EpisodeTrace& trace, std::size_t slot,
                                    std::size_t t, const RationaleConfig& cfg) {
  validate(model, trace, slot, cfg);
  if (t < 2)
    fail_invalid(
        "top_d_dims: no previous sentence at t = 1; use "
        "top_d_dims_first_step, which takes the zero vector as the previous "
        "encoding");
  if (t > trace.sentence_count())
    fail_invalid("top_d_dims: step out of range");
  std::vector<Real> grad = model.grad_logprob_prev_encoding(trace, slot, t);
  return top_dims_by_score(
      rationale_scores(grad, trace.steps[t - 1].enc.features,
                       &trace.steps[t - 2].enc.features),
      cfg.top_d);
}

std::vector<std::size_t> top_d_dims_first_step(const Model& model,
                                               const EpisodeTrace& trace,
                                               std::size_t slot,
                                               const RationaleConfig& cfg) {
  validate(model, trace, slot, cfg);
  std::vector<Real> grad = model.grad_logprob_first_encoding(trace, slot);
  return top_dims_by_score(
      rationale_scores(grad, trace.steps[0].enc.features, nullptr), cfg.top_d);
}

std::vector<std::size_t> rationale_dims(const Model& model,
                                        const EpisodeTrace& trace,
                                        std::size_t slot, std::size_t t,
                                        const RationaleConfig& cfg) {
  return t >= 2 ? top_d_dims(model, trace, slot, t, cfg)
                : top_d_dims_first_step(model, trace, slot, cfg);
}

WordImportance backtrack_words(const Model& model,
                               const std::vector<std::size_t>& dims,
                               const SentenceEncoding& enc,
                               std::size_t sentence_index) {
  const auto& windows = model.config().encoder.window_sizes;
  const std::size_t maps = model.config().encoder.maps_per_window;
  std::map<std::size_t, Real> credit;
  for (std::size_t dim : dims) {
    if (dim >= model.feature_dim())
      fail_invalid("backtrack_words: dimension out of range");
    const std::size_t h = windows[dim / maps];
    const std::size_t start = enc.pool_argmax[dim];
    for (std::size_t j = 0; j < h; ++j)
      credit[start + j] += Real{1} / static_cast<Real>(h);
  }
  WordImportance out;
  out.sentence_index = sentence_index;
  for (const auto& [pos, c] : credit)
    out.weights.emplace_back(pos, c / static_cast<Real>(dims.size()));
  return out;
}

}  // namespace jumper
