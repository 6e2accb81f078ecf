#pragma once

#include <span>
#include <vector>

#include "wordorder/neural/tensor.hpp"

namespace wo {

// Single LSTM cell with gates packed row-wise as [input; forget; output;
// cell] in one 4H x X input transform, one 4H x H recurrent transform and one
// 4H bias:
//   z = W_x x + W_h h_prev + b,   i,f,o = sigmoid slices,  g = tanh slice
//   c = f.c_prev + i.g,           h = o.tanh(c)
struct LstmCell {
  const Tensor* w_x;  // [4H, X]
  const Tensor* w_h;  // [4H, H]
  const Tensor* b;    // [4H]
  std::size_t x_dim = 0;
  std::size_t h_dim = 0;

  LstmCell() = default;
  LstmCell(const Tensor& wx, const Tensor& wh, const Tensor& bias);
};

// Activations one forward step needs again during backprop.
struct LstmStepCache {
  std::vector<double> x, h_prev, c_prev;
  std::vector<double> i, f, o, g;      // post-nonlinearity gates
  std::vector<double> c, tanh_c, h;
};

// Fills `cache` (including copies of the inputs) and leaves the new state in
// cache.h / cache.c.
void lstm_forward(const LstmCell& cell, std::span<const double> x,
                  std::span<const double> h_prev, std::span<const double> c_prev,
                  LstmStepCache& cache);

// Backpropagates one step. d_h/d_c carry the gradients flowing into this
// step's outputs; d_x, d_h_prev, d_c_prev are overwritten. Parameter
// gradients accumulate into the grad buffers of the cell's tensors.
void lstm_backward(const LstmCell& cell, Tensor& w_x, Tensor& w_h, Tensor& b,
                   const LstmStepCache& cache, std::span<const double> d_h,
                   std::span<const double> d_c, std::span<double> d_x,
                   std::span<double> d_h_prev, std::span<double> d_c_prev);

}  // namespace wo
