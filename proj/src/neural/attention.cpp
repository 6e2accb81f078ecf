#include "wordorder/neural/attention.hpp"

#include <algorithm>

#include "wordorder/errors.hpp"
#include "wordorder/kernels.hpp"

namespace wo {

std::vector<double> attention_project(const AttentionParams& params,
                                      std::span<const double> annotations) {
  const std::size_t S = params.s_dim, A = params.a_dim;
  if (annotations.empty() || annotations.size() % A != 0) {
    throw InternalError("attention requires a nonempty J x A annotation block");
  }
  const std::size_t J = annotations.size() / A;
  std::vector<double> proj(J * S, 0.0);
  for (std::size_t j = 0; j < J; ++j) {
    kernels::matvec(params.annot_w.data(), annotations.data() + j * A, proj.data() + j * S, S, A,
                    false);
  }
  return proj;
}

void attention_forward(const AttentionParams& params, std::span<const double> h_prev,
                       std::span<const double> annotations, std::span<const double> annot_proj,
                       AttentionCache& cache) {
  const std::size_t S = params.s_dim, H = params.h_dim, A = params.a_dim;
  if (annotations.empty() || annotations.size() % A != 0) {
    throw InternalError("attention requires a nonempty J x A annotation block");
  }
  const std::size_t J = annotations.size() / A;
  if (annot_proj.size() != J * S) {
    throw InternalError("attention projection block does not match the annotations");
  }

  cache.state_proj.assign(S, 0.0);
  kernels::matvec(params.state_w.data(), h_prev.data(), cache.state_proj.data(), S, H, false);

  cache.u.assign(J * S, 0.0);
  std::vector<double> energy(J);
  for (std::size_t j = 0; j < J; ++j) {
    double* u_j = cache.u.data() + j * S;
    std::copy(cache.state_proj.begin(), cache.state_proj.end(), u_j);
    kernels::add(annot_proj.data() + j * S, u_j, S);
    kernels::tanh_vec(u_j, u_j, S);
    energy[j] = kernels::dot(params.v.data(), u_j, S);
  }

  cache.weights.resize(J);
  kernels::softmax(energy.data(), cache.weights.data(), J);

  cache.context.assign(A, 0.0);
  for (std::size_t j = 0; j < J; ++j) {
    kernels::axpy(cache.weights[j], annotations.data() + j * A, cache.context.data(), A);
  }
}

AttentionResult attention_context(const AttentionParams& params, std::span<const double> h_prev,
                                  std::span<const double> annotations) {
  AttentionCache cache;
  attention_forward(params, h_prev, annotations, attention_project(params, annotations), cache);
  return AttentionResult{std::move(cache.context), std::move(cache.weights)};
}

void attention_backward(const AttentionParams& params, std::span<const double> h_prev,
                        std::span<const double> annotations, const AttentionCache& cache,
                        std::span<const double> d_context, std::span<double> state_w_grad,
                        std::span<double> annot_w_grad, std::span<double> v_grad,
                        std::span<double> d_h_prev, std::span<double> d_annotations) {
  const std::size_t S = params.s_dim, H = params.h_dim, A = params.a_dim;
  const std::size_t J = annotations.size() / A;

  // Through context = sum_j w_j a_j.
  std::vector<double> d_weights(J);
  for (std::size_t j = 0; j < J; ++j) {
    d_weights[j] = kernels::dot(annotations.data() + j * A, d_context.data(), A);
    kernels::axpy(cache.weights[j], d_context.data(), d_annotations.data() + j * A, A);
  }

  // Softmax Jacobian: d_energy_j = w_j (d_w_j - sum_k w_k d_w_k).
  const double mixed = kernels::dot(cache.weights.data(), d_weights.data(), J);
  std::vector<double> d_state_proj(S, 0.0);
  std::vector<double> d_pre(S);
  for (std::size_t j = 0; j < J; ++j) {
    const double d_energy = cache.weights[j] * (d_weights[j] - mixed);
    const double* u_j = cache.u.data() + j * S;
    kernels::axpy(d_energy, u_j, v_grad.data(), S);
    for (std::size_t r = 0; r < S; ++r) {
      d_pre[r] = d_energy * params.v[r] * (1.0 - u_j[r] * u_j[r]);
    }
    kernels::add(d_pre.data(), d_state_proj.data(), S);
    kernels::rank1_update(1.0, d_pre.data(), annotations.data() + j * A, annot_w_grad.data(), S, A);
    kernels::matvec_t(params.annot_w.data(), d_pre.data(), d_annotations.data() + j * A, S, A);
  }

  kernels::rank1_update(1.0, d_state_proj.data(), h_prev.data(), state_w_grad.data(), S, H);
  kernels::matvec_t(params.state_w.data(), d_state_proj.data(), d_h_prev.data(), S, H);
}

}  // namespace wo
