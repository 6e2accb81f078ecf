#include <cstring>

#include "wordorder/kernels.hpp"

namespace wo::kernels::scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void add(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_add(const double* a, const double* b, double* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += a[i] * b[i];
}

double sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double max(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (x[i] > m) m = x[i];
  }
  return m;
}

void matvec(const double* A, const double* x, double* y, std::size_t m,
            std::size_t n, bool accumulate) {
  for (std::size_t r = 0; r < m; ++r) {
    const double v = dot(A + r * n, x, n);
    y[r] = accumulate ? y[r] + v : v;
  }
}

void matvec_t(const double* A, const double* x, double* y, std::size_t m,
              std::size_t n) {
  for (std::size_t r = 0; r < m; ++r) axpy(x[r], A + r * n, y, n);
}

void rank1_update(double alpha, const double* x, const double* y, double* A,
                  std::size_t m, std::size_t n) {
  for (std::size_t r = 0; r < m; ++r) axpy(alpha * x[r], y, A + r * n, n);
}

}  // namespace wo::kernels::scalar
