#include "core/sampling.hpp"

namespace jumper {

std::size_t sample_action(std::span<const Real> dist, Real epsilon, Rng& rng) {
  if (dist.empty()) fail_invalid("sample_action: empty distribution");
  if (epsilon > Real{0} && uniform_real(rng, 0, 1) < epsilon)
    return static_cast<std::size_t>(uniform_index(rng, dist.size()));
  const Real u = uniform_real(rng, 0, 1);
  Real cum = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    cum += dist[i];
    if (u < cum) return i;
  }
  return dist.size() - 1;
}

}  // namespace jumper
