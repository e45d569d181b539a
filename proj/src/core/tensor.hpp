#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace jumper {

// Dense row-major array with a parallel gradient buffer of the same shape.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<Real> v;  // values
  std::vector<Real> g;  // accumulated gradient, zero-initialized

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);
  Tensor(std::vector<std::size_t> s, std::vector<Real> values);

  std::size_t size() const { return v.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  Real& at(std::size_t r, std::size_t c) { return v[r * cols() + c]; }
  Real at(std::size_t r, std::size_t c) const { return v[r * cols() + c]; }

  void zero_grad();
  void fill(Real value);
  bool all_finite() const;
  std::string shape_str() const;

  static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }
  static Tensor vec(std::vector<Real> values);
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

// Named parameter collection. Iteration is in name order, so anything that
// walks the store (init, optimizer, serialization) is deterministic.
class ParamStore {
public:
  ParamStore() = default;
  explicit ParamStore(std::uint64_t seed) : seed_(seed), rng_(mix_seed(seed)) {}

  std::uint64_t seed() const { return seed_; }

  // Zero-initialized parameter.
  Tensor& add_zeros(const std::string& name, std::vector<std::size_t> shape);
  // Standard init: uniform[-0.01, 0.01] drawn from the store's own rng in
  // call order.
  Tensor& add_uniform(const std::string& name, std::vector<std::size_t> shape);

  bool has(const std::string& name) const { return params_.count(name) != 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;

  std::size_t count() const { return params_.size(); }
  std::size_t total_values() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_all_grads();

  // Same names and shapes, all values zero. Used as a gradient accumulator.
  ParamStore zeros_like() const;
  // value += scale * other.value for every parameter
  void axpy_values(const ParamStore& other, Real scale);

private:
  std::map<std::string, Tensor> params_;
  std::uint64_t seed_ = 0;
  Rng rng_;
};

}  // namespace jumper
