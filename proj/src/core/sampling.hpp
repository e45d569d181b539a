#pragma once

#include <span>

#include "core/common.hpp"

namespace jumper {

// Draws an action index: with probability epsilon uniformly over the whole
// action space, otherwise from the given distribution.
std::size_t sample_action(std::span<const Real> dist, Real epsilon, Rng& rng);

}  // namespace jumper
