#include "wordorder/neural/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "wordorder/errors.hpp"

namespace wo {

Tensor& ParameterSet::add(std::string name, std::vector<std::size_t> shape) {
  if (index_.count(name)) throw InternalError("duplicate parameter tensor: " + name);
  std::size_t total = 1;
  for (std::size_t d : shape) total *= d;
  if (total == 0) throw InternalError("zero-sized parameter tensor: " + name);
  index_.emplace(name, tensors_.size());
  Tensor& t = tensors_.emplace_back();
  t.name = std::move(name);
  t.shape = std::move(shape);
  t.value.assign(total, 0.0);
  t.grad.assign(total, 0.0);
  return t;
}

Tensor& ParameterSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw InternalError("unknown parameter tensor: " + name);
  return tensors_[it->second];
}

const Tensor& ParameterSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InternalError("unknown parameter tensor: " + name);
  return tensors_[it->second];
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t total = 0;
  for (const Tensor& t : tensors_) total += t.size();
  return total;
}

void ParameterSet::init_uniform(Rng& rng, double range) {
  for (Tensor& t : tensors_) {
    for (double& v : t.value) v = rng.uniform(-range, range);
  }
}

void ParameterSet::zero_grads() {
  for (Tensor& t : tensors_) std::fill(t.grad.begin(), t.grad.end(), 0.0);
}

double ParameterSet::grad_norm() const {
  double total = 0.0;
  for (const Tensor& t : tensors_) {
    for (double g : t.grad) total += g * g;
  }
  return std::sqrt(total);
}

void ParameterSet::clip_grads(double max_norm) {
  const double norm = grad_norm();
  if (norm <= max_norm || norm == 0.0) return;
  const double scale = max_norm / norm;
  for (Tensor& t : tensors_) {
    for (double& g : t.grad) g *= scale;
  }
}

void ParameterSet::sgd_step(double lr) {
  for (Tensor& t : tensors_) {
    for (std::size_t i = 0; i < t.value.size(); ++i) t.value[i] -= lr * t.grad[i];
  }
}

bool ParameterSet::values_finite() const {
  for (const Tensor& t : tensors_) {
    for (double v : t.value) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

}  // namespace wo
