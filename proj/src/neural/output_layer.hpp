#pragma once

#include <span>
#include <vector>

#include "wordorder/core/vocabulary.hpp"
#include "wordorder/kernels.hpp"
#include "wordorder/neural/tensor.hpp"

namespace wo {

// Full-softmax projection shared by all three models:
//   log_dist = log_softmax(W h + b),  loss = -log_dist[target].
inline void output_log_dist(const Tensor& w, const Tensor& b, std::span<const double> h,
                            std::vector<double>& out) {
  const std::size_t v = w.rows();
  out = b.value;
  kernels::matvec(w.value.data(), h.data(), out.data(), v, w.cols(), true);
  kernels::log_softmax(out.data(), out.data(), v);
}

// Cross-entropy backward: accumulates parameter gradients and adds W^T
// d_logits into d_h. Returns the loss for this position.
inline double output_backward(Tensor& w, Tensor& b, std::span<const double> h,
                              std::span<const double> log_dist, TokenId target,
                              std::span<double> d_h) {
  const std::size_t v = w.rows();
  std::vector<double> d_logits(v);
  for (std::size_t k = 0; k < v; ++k) d_logits[k] = std::exp(log_dist[k]);
  d_logits[static_cast<std::size_t>(target)] -= 1.0;

  kernels::rank1_update(1.0, d_logits.data(), h.data(), w.grad.data(), v, w.cols());
  kernels::add(d_logits.data(), b.grad.data(), v);
  kernels::matvec_t(w.value.data(), d_logits.data(), d_h.data(), v, w.cols());
  return -log_dist[static_cast<std::size_t>(target)];
}

}  // namespace wo
