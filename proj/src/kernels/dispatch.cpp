#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "wordorder/errors.hpp"
#include "wordorder/kernels.hpp"

namespace wo::kernels {

namespace {

#if defined(__x86_64__) || defined(_M_X64)
constexpr bool kHaveAvx2Build = true;
#else
constexpr bool kHaveAvx2Build = false;
#endif

Backend resolve_initial() {
  if (const char* env = std::getenv("WORDORDER_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (!avx2_supported()) {
        throw UsageError("WORDORDER_KERNELS=avx2 but this CPU has no AVX2/FMA");
      }
      return Backend::Avx2;
    }
    if (std::strcmp(env, "auto") != 0) {
      throw UsageError(std::string("unknown WORDORDER_KERNELS value: ") + env);
    }
  }
  return avx2_supported() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<int> g_backend{-1};

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend active_backend() {
  int b = g_backend.load(std::memory_order_acquire);
  if (b < 0) {
    b = static_cast<int>(resolve_initial());
    g_backend.store(b, std::memory_order_release);
  }
  return static_cast<Backend>(b);
}

void force_backend(Backend b) {
  if (b == Backend::Avx2 && !(kHaveAvx2Build && avx2_supported())) {
    throw UsageError("AVX2 backend unavailable on this machine");
  }
  g_backend.store(static_cast<int>(b), std::memory_order_release);
}

std::string backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

#if defined(__x86_64__) || defined(_M_X64)
#define WO_DISPATCH(fn, ...)                  \
  if (active_backend() == Backend::Avx2) {   \
    return avx2::fn(__VA_ARGS__);             \
  }                                           \
  return scalar::fn(__VA_ARGS__)
#else
#define WO_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

double dot(const double* x, const double* y, std::size_t n) { WO_DISPATCH(dot, x, y, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { WO_DISPATCH(axpy, a, x, y, n); }
void scale(double a, double* x, std::size_t n) { WO_DISPATCH(scale, a, x, n); }
void add(const double* x, double* y, std::size_t n) { WO_DISPATCH(add, x, y, n); }
void mul(const double* a, const double* b, double* out, std::size_t n) { WO_DISPATCH(mul, a, b, out, n); }
void mul_add(const double* a, const double* b, double* acc, std::size_t n) { WO_DISPATCH(mul_add, a, b, acc, n); }
double sum(const double* x, std::size_t n) { WO_DISPATCH(sum, x, n); }
double max(const double* x, std::size_t n) { WO_DISPATCH(max, x, n); }
void matvec(const double* A, const double* x, double* y, std::size_t m, std::size_t n,
            bool accumulate) {
  WO_DISPATCH(matvec, A, x, y, m, n, accumulate);
}
void matvec_t(const double* A, const double* x, double* y, std::size_t m, std::size_t n) {
  WO_DISPATCH(matvec_t, A, x, y, m, n);
}
void rank1_update(double alpha, const double* x, const double* y, double* A, std::size_t m,
                  std::size_t n) {
  WO_DISPATCH(rank1_update, alpha, x, y, A, m, n);
}

#undef WO_DISPATCH

void tanh_vec(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(x[i]);
}

void sigmoid_vec(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

double log_sum_exp(const double* x, std::size_t n) {
  const double m = max(x, n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::exp(x[i] - m);
  return m + std::log(acc);
}

void softmax(const double* logits, double* out, std::size_t n) {
  const double m = max(logits, n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(logits[i] - m);
    acc += out[i];
  }
  scale(1.0 / acc, out, n);
}

void log_softmax(const double* logits, double* out, std::size_t n) {
  const double lse = log_sum_exp(logits, n);
  for (std::size_t i = 0; i < n; ++i) out[i] = logits[i] - lse;
}

}  // namespace wo::kernels
