#pragma once

#include "core/model.hpp"

namespace jumper {

struct RationaleConfig {
  std::size_t top_d = 10;
};

struct WordImportance {
  std::size_t sentence_index = 0;  // 0-based target sentence (the jump sentence)
  // position within the sentence -> importance fraction; fractions sum to 1
  std::vector<std::pair<std::size_t, Real>> weights;
};

// Elementwise gradient-times-squared-difference score; c_prev may be null
// (first-step rule: the previous encoding is the zero vector).
std::vector<Real> rationale_scores(const std::vector<Real>& grad,
                                   const std::vector<Real>& c_now,
                                   const std::vector<Real>* c_prev);

// Indices of the top_d largest scores, ties toward the lowest index,
// returned in ascending index order.
std::vector<std::size_t> top_dims_by_score(const std::vector<Real>& scores,
                                           std::size_t top_d);

// Feature dimensions that drove the jump at step t (1-based, t >= 2):
// top-D of dlog pi_t(a_t)/dc^(t-1) elementwise-times (c^(t) - c^(t-1))^2,
// ties broken toward the lowest index. The t = 1 case is handled by
// top_d_dims_first_step (previous encoding taken as the zero vector).
std::vector<std::size_t> top_d_dims(const Model& model,
                                    const EpisodeTrace& trace, std::size_t slot,
                                    std::size_t t, const RationaleConfig& cfg);

std::vector<std::size_t> top_d_dims_first_step(const Model& model,
                                               const EpisodeTrace& trace,
                                               std::size_t slot,
                                               const RationaleConfig& cfg);

// Dispatches on t; the convenient entry point for callers.
std::vector<std::size_t> rationale_dims(const Model& model,
                                        const EpisodeTrace& trace,
                                        std::size_t slot, std::size_t t,
                                        const RationaleConfig& cfg);

// Traces each selected dimension through its max-pool winner; a window of
// width h spreads its 1/D credit uniformly over the h covered words.
WordImportance backtrack_words(const Model& model,
                               const std::vector<std::size_t>& dims,
                               const SentenceEncoding& enc,
                               std::size_t sentence_index);

}  // namespace jumper
