#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace jumper {

#ifdef JUMPER_REAL_FLOAT32
using Real = float;
#else
using Real = double;
#endif

using Rng = std::mt19937_64;

enum class ErrorKind {
  invalid_argument,
  io,
  format,
  runtime,
};

// Single exception type for the whole core; the kind maps onto C API
// status codes and CLI exit codes.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_invalid(const std::string& msg) {
  throw Error(ErrorKind::invalid_argument, msg);
}
[[noreturn]] inline void fail_io(const std::string& msg) {
  throw Error(ErrorKind::io, msg);
}
[[noreturn]] inline void fail_format(const std::string& msg) {
  throw Error(ErrorKind::format, msg);
}
[[noreturn]] inline void fail_runtime(const std::string& msg) {
  throw Error(ErrorKind::runtime, msg);
}

// splitmix64; used to derive independent rng streams from (seed, tags) so
// results do not depend on scheduling order.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix_seed(seed);
  s = mix_seed(s ^ mix_seed(a));
  s = mix_seed(s ^ mix_seed(b));
  s = mix_seed(s ^ mix_seed(c));
  return s;
}

// Uniform integer in [0, n) independent of the standard library's
// distribution implementations.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) fail_invalid("uniform_index: empty range");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

inline Real uniform_real(Rng& rng, Real lo, Real hi) {
  // 53-bit mantissa draw, identical across platforms
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return static_cast<Real>(lo + (hi - lo) * u);
}

template <typename T>
void fisher_yates(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// Worker count: JUMPER_THREADS env var, defaulting to available cores.
int worker_count();

// Runs fn(index, worker) over [0, n). Indices are statically partitioned
// into contiguous chunks per worker, so per-worker accumulation order is
// independent of scheduling.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t, int)>& fn);

}  // namespace jumper
