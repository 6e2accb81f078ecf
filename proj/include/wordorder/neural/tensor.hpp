#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wordorder/rng.hpp"

namespace wo {

// Named parameter tensor with its gradient accumulator. Values are doubles
// in memory; the serialized container stores float32.
struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;  // row-major
  std::vector<double> value;
  std::vector<double> grad;

  std::size_t size() const { return value.size(); }
  std::size_t rows() const { return shape.at(0); }
  std::size_t cols() const { return shape.at(1); }
  // Row view for embedding-style matrices.
  std::span<double> row(std::size_t r) { return {value.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const { return {value.data() + r * cols(), cols()}; }
  std::span<double> grad_row(std::size_t r) { return {grad.data() + r * cols(), cols()}; }
};

// Registry of a model's parameters, in registration order (the order tensors
// appear in the serialized container).
class ParameterSet {
 public:
  Tensor& add(std::string name, std::vector<std::size_t> shape);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;

  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }
  std::size_t scalar_count() const;

  void init_uniform(Rng& rng, double range);  // U[-range, range]
  void zero_grads();
  double grad_norm() const;
  // Scales gradients so the global norm is at most max_norm.
  void clip_grads(double max_norm);
  void sgd_step(double lr);  // value -= lr * grad
  bool values_finite() const;

 private:
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace wo
