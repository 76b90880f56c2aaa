#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "ipg/errors.hpp"
#include "ipg/kernels.hpp"
#include "ipg/rng.hpp"

using namespace ipg;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("scalar primitives agree with naive arithmetic") {
  const std::vector<double> a{1.0, -2.0, 3.5};
  const std::vector<double> b{0.5, 4.0, -1.0};
  CHECK(kernels::scalar::dot(a.data(), b.data(), 3) == doctest::Approx(-11.0));
  CHECK(kernels::scalar::nrm2_sq(a.data(), 3) == doctest::Approx(17.25));
  CHECK(kernels::scalar::sq_dist(a.data(), b.data(), 3) ==
        doctest::Approx(0.25 + 36.0 + 20.25));

  std::vector<double> y = b;
  kernels::scalar::axpy(2.0, a.data(), y.data(), 3);
  CHECK(y[0] == doctest::Approx(2.5));
  CHECK(y[1] == doctest::Approx(0.0));
  CHECK(y[2] == doctest::Approx(6.0));
}

TEST_CASE("dispatched kernels match the scalar reference on every tail length") {
  // Vector lengths straddle the SIMD width so remainder handling is exercised.
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u,
                        64u, 100u, 257u}) {
    const auto a = random_vec(n, 0x100 + n);
    const auto b = random_vec(n, 0x200 + n);

    const double d_ref = kernels::scalar::sq_dist(a.data(), b.data(), n);
    const double dot_ref = kernels::scalar::dot(a.data(), b.data(), n);
    const double nrm_ref = kernels::scalar::nrm2_sq(a.data(), n);

    const double d = kernels::sq_dist(a.data(), b.data(), n);
    const double dt = kernels::dot(a.data(), b.data(), n);
    const double nr = kernels::nrm2_sq(a.data(), n);

    CHECK(d == doctest::Approx(d_ref).epsilon(1e-12));
    CHECK(dt == doctest::Approx(dot_ref).epsilon(1e-12));
    CHECK(nr == doctest::Approx(nrm_ref).epsilon(1e-12));

    auto y_ref = b;
    auto y = b;
    kernels::scalar::axpy(-1.75, a.data(), y_ref.data(), n);
    kernels::axpy(-1.75, a.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(y[i] == doctest::Approx(y_ref[i]).epsilon(1e-12));
  }
}

#ifdef IPG_HAVE_AVX2_TU
TEST_CASE("avx2 variant matches scalar when the cpu supports it") {
  if (!kernels::available(kernels::Isa::avx2)) {
    MESSAGE("cpu lacks avx2+fma; skipping");
    return;
  }
  for (std::size_t n : {1u, 3u, 4u, 7u, 8u, 13u, 32u, 50u, 255u}) {
    const auto a = random_vec(n, 0x300 + n);
    const auto b = random_vec(n, 0x400 + n);
    CHECK(kernels::avx2::sq_dist(a.data(), b.data(), n) ==
          doctest::Approx(kernels::scalar::sq_dist(a.data(), b.data(), n))
              .epsilon(1e-12));
    CHECK(kernels::avx2::dot(a.data(), b.data(), n) ==
          doctest::Approx(kernels::scalar::dot(a.data(), b.data(), n))
              .epsilon(1e-12));
    CHECK(kernels::avx2::nrm2_sq(a.data(), n) ==
          doctest::Approx(kernels::scalar::nrm2_sq(a.data(), n))
              .epsilon(1e-12));
  }
}
#endif

TEST_CASE("force switches the active variant and back") {
  const auto initial = kernels::active();
  kernels::force(kernels::Isa::scalar);
  CHECK(kernels::active() == kernels::Isa::scalar);

  const std::vector<double> a{1.0, 2.0, 3.0, 4.0, 5.0};
  const std::vector<double> b{5.0, 4.0, 3.0, 2.0, 1.0};
  CHECK(kernels::sq_dist(a.data(), b.data(), 5) ==
        kernels::scalar::sq_dist(a.data(), b.data(), 5));

  kernels::force(initial);
  CHECK(kernels::active() == initial);
}

TEST_CASE("forcing an unavailable isa throws") {
#if !defined(IPG_HAVE_NEON_TU)
  CHECK_THROWS_AS(kernels::force(kernels::Isa::neon), ipg::Error);
#endif
#if !defined(IPG_HAVE_AVX2_TU)
  CHECK_THROWS_AS(kernels::force(kernels::Isa::avx2), ipg::Error);
#endif
  CHECK(kernels::name(kernels::active()) != nullptr);
}

TEST_CASE("deterministic rng streams") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  // Distinct seeds should decouple immediately.
  CHECK(a.next_u64() != c.next_u64());

  CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
  CHECK(derive_seed(7, {1}) == derive_seed(7, {1}));

  Rng idx(9);
  for (int i = 0; i < 1000; ++i) CHECK(idx.index(13) < 13);
}

TEST_CASE("box-muller normals have sane moments") {
  Rng rng(2024);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
}
