#include "core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jumper {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
  for (std::size_t d : shape)
    if (d == 0) fail_invalid("tensor dimension must be positive");
  v.assign(shape_product(shape), Real{0});
  g.assign(v.size(), Real{0});
}

Tensor::Tensor(std::vector<std::size_t> s, std::vector<Real> values)
    : shape(std::move(s)), v(std::move(values)) {
  if (v.size() != shape_product(shape))
    fail_invalid("tensor value count does not match shape " + shape_str());
  g.assign(v.size(), Real{0});
}

Tensor Tensor::vec(std::vector<Real> values) {
  std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

void Tensor::zero_grad() { std::fill(g.begin(), g.end(), Real{0}); }

void Tensor::fill(Real value) { std::fill(v.begin(), v.end(), value); }

bool Tensor::all_finite() const {
  for (Real x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor& ParamStore::add_zeros(const std::string& name,
                              std::vector<std::size_t> shape) {
  auto [it, inserted] = params_.emplace(name, Tensor(std::move(shape)));
  if (!inserted) fail_invalid("duplicate parameter name: " + name);
  return it->second;
}

Tensor& ParamStore::add_uniform(const std::string& name,
                                std::vector<std::size_t> shape) {
  Tensor& t = add_zeros(name, std::move(shape));
  for (Real& x : t.v) x = uniform_real(rng_, Real{-0.01}, Real{0.01});
  return t;
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) fail_invalid("unknown parameter: " + name);
  return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) fail_invalid("unknown parameter: " + name);
  return it->second;
}

std::size_t ParamStore::total_values() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params_) n += t.size();
  return n;
}

void ParamStore::zero_all_grads() {
  for (auto& [name, t] : params_) t.zero_grad();
}

ParamStore ParamStore::zeros_like() const {
  ParamStore out;
  for (const auto& [name, t] : params_) out.add_zeros(name, t.shape);
  return out;
}

void ParamStore::axpy_values(const ParamStore& other, Real scale) {
  auto it = params_.begin();
  auto jt = other.params_.begin();
  for (; it != params_.end() && jt != other.params_.end(); ++it, ++jt) {
    if (it->first != jt->first || it->second.size() != jt->second.size())
      fail_invalid("parameter stores do not align at " + it->first);
    Real* dst = it->second.v.data();
    const Real* src = jt->second.v.data();
    const std::size_t n = it->second.size();
    for (std::size_t i = 0; i < n; ++i) dst[i] += scale * src[i];
  }
  if (it != params_.end() || jt != other.params_.end())
    fail_invalid("parameter stores differ in size");
}

}  // namespace jumper
