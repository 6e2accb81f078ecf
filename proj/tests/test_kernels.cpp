#include <cmath>
#include <cstdlib>
#include <vector>

#include <doctest.h>

#include "wordorder/kernels.hpp"
#include "wordorder/rng.hpp"

using namespace wo;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Sizes that cross the 8-wide unrolled body, the 4-wide tail, and the scalar
// remainder of the vector kernels.
const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 32, 33, 63, 64, 65, 300};

constexpr double kRelTol = 1e-12;

bool close(double a, double b, double tol = kRelTol) {
  const double scale = std::max({std::fabs(a), std::fabs(b), 1.0});
  return std::fabs(a - b) <= tol * scale;
}

}  // namespace

TEST_CASE("scalar and avx2 backends agree on every kernel") {
  if (!kernels::avx2_supported()) {
    MESSAGE("avx2 unavailable on this machine; equivalence suite skipped");
    return;
  }
  Rng rng(1234);
  for (std::size_t n : kSizes) {
    CAPTURE(n);
    const std::vector<double> x = random_vec(rng, n);
    const std::vector<double> y = random_vec(rng, n);

    CHECK(close(kernels::scalar::dot(x.data(), y.data(), n),
                kernels::avx2::dot(x.data(), y.data(), n)));
    CHECK(close(kernels::scalar::sum(x.data(), n), kernels::avx2::sum(x.data(), n)));
    if (n > 0) {
      CHECK(kernels::scalar::max(x.data(), n) == kernels::avx2::max(x.data(), n));
    }

    std::vector<double> a = y, b = y;
    kernels::scalar::axpy(0.37, x.data(), a.data(), n);
    kernels::avx2::axpy(0.37, x.data(), b.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(a[i] == b[i]);

    a = x; b = x;
    kernels::scalar::scale(-1.25, a.data(), n);
    kernels::avx2::scale(-1.25, b.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(a[i] == b[i]);

    a = y; b = y;
    kernels::scalar::add(x.data(), a.data(), n);
    kernels::avx2::add(x.data(), b.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(a[i] == b[i]);

    std::vector<double> oa(n), ob(n);
    kernels::scalar::mul(x.data(), y.data(), oa.data(), n);
    kernels::avx2::mul(x.data(), y.data(), ob.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(oa[i] == ob[i]);

    oa.assign(n, 0.25); ob.assign(n, 0.25);
    kernels::scalar::mul_add(x.data(), y.data(), oa.data(), n);
    kernels::avx2::mul_add(x.data(), y.data(), ob.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(close(oa[i], ob[i]));
  }
}

TEST_CASE("matrix kernels agree across backends") {
  if (!kernels::avx2_supported()) return;
  Rng rng(99);
  for (std::size_t m : {std::size_t{1}, std::size_t{3}, std::size_t{17}, std::size_t{64}}) {
    for (std::size_t n : {std::size_t{1}, std::size_t{5}, std::size_t{33}, std::size_t{50}}) {
      CAPTURE(m); CAPTURE(n);
      const std::vector<double> A = random_vec(rng, m * n);
      const std::vector<double> x = random_vec(rng, n);
      const std::vector<double> xt = random_vec(rng, m);

      std::vector<double> ya(m, 0.5), yb(m, 0.5);
      kernels::scalar::matvec(A.data(), x.data(), ya.data(), m, n, true);
      kernels::avx2::matvec(A.data(), x.data(), yb.data(), m, n, true);
      for (std::size_t i = 0; i < m; ++i) CHECK(close(ya[i], yb[i]));

      std::vector<double> za(n, 0.0), zb(n, 0.0);
      kernels::scalar::matvec_t(A.data(), xt.data(), za.data(), m, n);
      kernels::avx2::matvec_t(A.data(), xt.data(), zb.data(), m, n);
      for (std::size_t i = 0; i < n; ++i) CHECK(close(za[i], zb[i]));

      std::vector<double> Ga(m * n, 0.0), Gb(m * n, 0.0);
      kernels::scalar::rank1_update(0.9, xt.data(), x.data(), Ga.data(), m, n);
      kernels::avx2::rank1_update(0.9, xt.data(), x.data(), Gb.data(), m, n);
      for (std::size_t i = 0; i < m * n; ++i) CHECK(close(Ga[i], Gb[i]));
    }
  }
}

TEST_CASE("kernel results match hand-computed values") {
  const double x[] = {1.0, 2.0, 3.0};
  const double y[] = {4.0, -5.0, 6.0};
  CHECK(kernels::dot(x, y, 3) == doctest::Approx(12.0).epsilon(1e-15));
  CHECK(kernels::sum(x, 3) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(kernels::max(y, 3) == 6.0);

  // 2x3 row-major times x.
  const double A[] = {1, 0, 2, -1, 3, 1};
  double out[2];
  kernels::matvec(A, x, out, 2, 3, false);
  CHECK(out[0] == doctest::Approx(7.0));
  CHECK(out[1] == doctest::Approx(8.0));

  // A^T * u accumulates into y: columns of A weighted by u.
  double z[3] = {1.0, 1.0, 1.0};
  const double u[] = {2.0, -1.0};
  kernels::matvec_t(A, u, z, 2, 3);
  CHECK(z[0] == doctest::Approx(4.0));   // 1 + 2*1 + (-1)(-1)
  CHECK(z[1] == doctest::Approx(-2.0));  // 1 + 0 - 3
  CHECK(z[2] == doctest::Approx(4.0));   // 1 + 4 - 1
}

TEST_CASE("softmax and log_sum_exp are numerically stable and normalized") {
  const std::vector<double> logits = {1000.0, 1000.0, 1000.0};
  std::vector<double> p(3);
  kernels::softmax(logits.data(), p.data(), 3);
  for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  const double lse = kernels::log_sum_exp(logits.data(), logits.size());
  CHECK(lse == doctest::Approx(1000.0 + std::log(3.0)).epsilon(1e-12));

  Rng rng(7);
  std::vector<double> z = random_vec(rng, 257, -30.0, 30.0);
  std::vector<double> q(z.size());
  kernels::softmax(z.data(), q.data(), z.size());
  CHECK(kernels::sum(q.data(), q.size()) == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> lp(z.size());
  kernels::log_softmax(z.data(), lp.data(), z.size());
  double total = 0.0;
  for (double v : lp) total += std::exp(v);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < z.size(); ++i) {
    CHECK(lp[i] == doctest::Approx(std::log(q[i])).epsilon(1e-9));
  }
}

TEST_CASE("tanh and sigmoid vectors match libm element-wise") {
  Rng rng(11);
  std::vector<double> z = random_vec(rng, 97, -8.0, 8.0);
  std::vector<double> t(z.size()), s(z.size());
  kernels::tanh_vec(z.data(), t.data(), z.size());
  kernels::sigmoid_vec(z.data(), s.data(), z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    CHECK(t[i] == std::tanh(z[i]));
    CHECK(s[i] == doctest::Approx(1.0 / (1.0 + std::exp(-z[i]))).epsilon(1e-15));
  }
}

TEST_CASE("backend selection honors explicit overrides") {
  const kernels::Backend saved = kernels::active_backend();
  kernels::force_backend(kernels::Backend::Scalar);
  CHECK(kernels::backend_name(kernels::active_backend()) == "scalar");
  const double x[] = {1.0, 2.0};
  CHECK(kernels::dot(x, x, 2) == 5.0);
  if (kernels::avx2_supported()) {
    kernels::force_backend(kernels::Backend::Avx2);
    CHECK(kernels::backend_name(kernels::active_backend()) == "avx2");
    CHECK(kernels::dot(x, x, 2) == 5.0);
  }
  kernels::force_backend(saved);
}
