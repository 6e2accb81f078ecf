#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Double-precision arithmetic kernels behind the neural models. Every kernel
// has a scalar reference implementation and, on x86-64 with AVX2+FMA, a
// vectorized variant selected once at startup. The two variants are
// equivalence-tested; they may differ only by reduction order.
//
// Transcendentals (tanh, sigmoid, exp in the softmax family) call libm in
// both backends so the variants agree to reassociation error.
namespace wo::kernels {

enum class Backend { Scalar, Avx2 };

// Active backend, resolved on first use: the WORDORDER_KERNELS environment
// variable ("scalar", "avx2", "auto") if set, else AVX2 when the CPU has it.
Backend active_backend();
void force_backend(Backend b);  // for tests and the bench harness
bool avx2_supported();
std::string backend_name(Backend b);

double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);  // y += a*x
void scale(double a, double* x, std::size_t n);
void add(const double* x, double* y, std::size_t n);                   // y += x
void mul(const double* a, const double* b, double* out, std::size_t n);      // out = a.*b
void mul_add(const double* a, const double* b, double* acc, std::size_t n);  // acc += a.*b
double sum(const double* x, std::size_t n);
double max(const double* x, std::size_t n);  // n must be > 0

// y = A*x (accumulate=false) or y += A*x (accumulate=true); A row-major m x n.
void matvec(const double* A, const double* x, double* y, std::size_t m,
            std::size_t n, bool accumulate);
// y += A^T * x; A row-major m x n, x length m, y length n.
void matvec_t(const double* A, const double* x, double* y, std::size_t m,
              std::size_t n);
// A += alpha * x * y^T; A row-major m x n.
void rank1_update(double alpha, const double* x, const double* y, double* A,
                  std::size_t m, std::size_t n);

// Shared transcendental helpers (scalar libm on both backends).
void tanh_vec(const double* x, double* out, std::size_t n);
void sigmoid_vec(const double* x, double* out, std::size_t n);
double log_sum_exp(const double* x, std::size_t n);        // n > 0
void softmax(const double* logits, double* out, std::size_t n);
void log_softmax(const double* logits, double* out, std::size_t n);

// Scalar reference implementations, exposed for equivalence tests.
namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
void add(const double* x, double* y, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void mul_add(const double* a, const double* b, double* acc, std::size_t n);
double sum(const double* x, std::size_t n);
double max(const double* x, std::size_t n);
void matvec(const double* A, const double* x, double* y, std::size_t m,
            std::size_t n, bool accumulate);
void matvec_t(const double* A, const double* x, double* y, std::size_t m,
              std::size_t n);
void rank1_update(double alpha, const double* x, const double* y, double* A,
                  std::size_t m, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
void add(const double* x, double* y, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void mul_add(const double* a, const double* b, double* acc, std::size_t n);
double sum(const double* x, std::size_t n);
double max(const double* x, std::size_t n);
void matvec(const double* A, const double* x, double* y, std::size_t m,
            std::size_t n, bool accumulate);
void matvec_t(const double* A, const double* x, double* y, std::size_t m,
              std::size_t n);
void rank1_update(double alpha, const double* x, const double* y, double* A,
                  std::size_t m, std::size_t n);
}  // namespace avx2
#endif

}  // namespace wo::kernels
