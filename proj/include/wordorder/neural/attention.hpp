#pragma once

#include <span>
#include <vector>

namespace wo {

// Additive attention: energy_j = v . tanh(W_state h + W_annot a_j), weights
// softmax(energy), context = sum_j weight_j a_j. The context therefore lives
// in the annotation space.
struct AttentionParams {
  std::span<const double> state_w;  // [S, H] row-major
  std::span<const double> annot_w;  // [S, A]
  std::span<const double> v;        // [S]
  std::size_t s_dim = 0;
  std::size_t h_dim = 0;
  std::size_t a_dim = 0;
};

struct AttentionResult {
  std::vector<double> context;  // [A]
  std::vector<double> weights;  // [J], nonnegative, sums to 1
};

// `annotations` is J x A row-major with J >= 1.
AttentionResult attention_context(const AttentionParams& params, std::span<const double> h_prev,
                                  std::span<const double> annotations);

// W_annot a_j for every annotation, as a J x S block. The projection depends
// only on the annotations, so decoding and training compute it once per bag
// and reuse it at every step.
std::vector<double> attention_project(const AttentionParams& params,
                                      std::span<const double> annotations);

// Training-path variants that keep the intermediates backprop needs.
struct AttentionCache {
  std::vector<double> state_proj;  // [S]
  std::vector<double> u;           // [J, S] tanh pre-energies
  std::vector<double> weights;     // [J]
  std::vector<double> context;     // [A]
};

void attention_forward(const AttentionParams& params, std::span<const double> h_prev,
                       std::span<const double> annotations, std::span<const double> annot_proj,
                       AttentionCache& cache);

// d_context: incoming gradient on the context vector. Accumulates into the
// parameter gradient buffers, d_h_prev, and d_annotations (J x A).
void attention_backward(const AttentionParams& params, std::span<const double> h_prev,
                        std::span<const double> annotations, const AttentionCache& cache,
                        std::span<const double> d_context, std::span<double> state_w_grad,
                        std::span<double> annot_w_grad, std::span<double> v_grad,
                        std::span<double> d_h_prev, std::span<double> d_annotations);

}  // namespace wo
