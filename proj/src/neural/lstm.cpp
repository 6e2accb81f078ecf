#include "wordorder/neural/lstm.hpp"

#include <algorithm>

#include "wordorder/errors.hpp"
#include "wordorder/kernels.hpp"

namespace wo {

LstmCell::LstmCell(const Tensor& wx, const Tensor& wh, const Tensor& bias)
    : w_x(&wx), w_h(&wh), b(&bias), x_dim(wx.cols()), h_dim(wh.cols()) {
  if (wx.rows() != 4 * h_dim || wh.rows() != 4 * h_dim || bias.size() != 4 * h_dim) {
    throw InternalError("inconsistent LSTM tensor shapes");
  }
}

void lstm_forward(const LstmCell& cell, std::span<const double> x,
                  std::span<const double> h_prev, std::span<const double> c_prev,
                  LstmStepCache& cache) {
  const std::size_t H = cell.h_dim;
  cache.x.assign(x.begin(), x.end());
  cache.h_prev.assign(h_prev.begin(), h_prev.end());
  cache.c_prev.assign(c_prev.begin(), c_prev.end());

  std::vector<double> z(cell.b->value);
  kernels::matvec(cell.w_x->value.data(), x.data(), z.data(), 4 * H, cell.x_dim, true);
  kernels::matvec(cell.w_h->value.data(), h_prev.data(), z.data(), 4 * H, H, true);

  cache.i.resize(H); cache.f.resize(H); cache.o.resize(H); cache.g.resize(H);
  kernels::sigmoid_vec(z.data(), cache.i.data(), H);
  kernels::sigmoid_vec(z.data() + H, cache.f.data(), H);
  kernels::sigmoid_vec(z.data() + 2 * H, cache.o.data(), H);
  kernels::tanh_vec(z.data() + 3 * H, cache.g.data(), H);

  cache.c.resize(H);
  kernels::mul(cache.f.data(), c_prev.data(), cache.c.data(), H);
  kernels::mul_add(cache.i.data(), cache.g.data(), cache.c.data(), H);
  cache.tanh_c.resize(H);
  kernels::tanh_vec(cache.c.data(), cache.tanh_c.data(), H);
  cache.h.resize(H);
  kernels::mul(cache.o.data(), cache.tanh_c.data(), cache.h.data(), H);
}

void lstm_backward(const LstmCell& cell, Tensor& w_x, Tensor& w_h, Tensor& b,
                   const LstmStepCache& cache, std::span<const double> d_h,
                   std::span<const double> d_c, std::span<double> d_x,
                   std::span<double> d_h_prev, std::span<double> d_c_prev) {
  const std::size_t H = cell.h_dim;
  const std::size_t X = cell.x_dim;

  // Through h = o.tanh(c) and the incoming cell gradient.
  std::vector<double> dc_total(H);
  for (std::size_t j = 0; j < H; ++j) {
    const double d_tanh_c = d_h[j] * cache.o[j];
    dc_total[j] = d_c[j] + d_tanh_c * (1.0 - cache.tanh_c[j] * cache.tanh_c[j]);
  }

  // Pre-nonlinearity gate gradients, packed like the forward z.
  std::vector<double> dz(4 * H);
  for (std::size_t j = 0; j < H; ++j) {
    const double di = dc_total[j] * cache.g[j];
    const double df = dc_total[j] * cache.c_prev[j];
    const double do_ = d_h[j] * cache.tanh_c[j];
    const double dg = dc_total[j] * cache.i[j];
    dz[j] = di * cache.i[j] * (1.0 - cache.i[j]);
    dz[H + j] = df * cache.f[j] * (1.0 - cache.f[j]);
    dz[2 * H + j] = do_ * cache.o[j] * (1.0 - cache.o[j]);
    dz[3 * H + j] = dg * (1.0 - cache.g[j] * cache.g[j]);
    d_c_prev[j] = dc_total[j] * cache.f[j];
  }

  kernels::rank1_update(1.0, dz.data(), cache.x.data(), w_x.grad.data(), 4 * H, X);
  kernels::rank1_update(1.0, dz.data(), cache.h_prev.data(), w_h.grad.data(), 4 * H, H);
  kernels::add(dz.data(), b.grad.data(), 4 * H);

  std::fill(d_x.begin(), d_x.end(), 0.0);
  kernels::matvec_t(cell.w_x->value.data(), dz.data(), d_x.data(), 4 * H, X);
  std::fill(d_h_prev.begin(), d_h_prev.end(), 0.0);
  kernels::matvec_t(cell.w_h->value.data(), dz.data(), d_h_prev.data(), 4 * H, H);
}

}  // namespace wo
