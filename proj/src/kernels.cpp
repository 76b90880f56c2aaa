#include "ipg/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include "ipg/errors.hpp"
#include <string>

namespace ipg::kernels {

namespace scalar {

double sq_dist(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double nrm2_sq(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace scalar

namespace {

struct Vtable {
  double (*sq_dist)(const double*, const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*nrm2_sq)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
};

constexpr Vtable kScalar{scalar::sq_dist, scalar::dot, scalar::nrm2_sq,
                         scalar::axpy};

#if defined(IPG_HAVE_AVX2_TU)
const Vtable kAvx2{avx2::sq_dist, avx2::dot, avx2::nrm2_sq, avx2::axpy};
#endif
#if defined(IPG_HAVE_NEON_TU)
const Vtable kNeon{neon::sq_dist, neon::dot, neon::nrm2_sq, neon::axpy};
#endif

struct Dispatch {
  Isa isa = Isa::scalar;
  const Vtable* table = &kScalar;
};

const Vtable* table_for(Isa isa) {
  switch (isa) {
#if defined(IPG_HAVE_AVX2_TU)
    case Isa::avx2: return &kAvx2;
#endif
#if defined(IPG_HAVE_NEON_TU)
    case Isa::neon: return &kNeon;
#endif
    default: return &kScalar;
  }
}

Dispatch make_default() {
  Dispatch d;
  if (const char* env = std::getenv("IPG_KERNELS")) {
    const std::string want(env);
    Isa isa = Isa::scalar;
    if (want == "scalar") {
      isa = Isa::scalar;
    } else if (want == "avx2") {
      isa = Isa::avx2;
    } else if (want == "neon") {
      isa = Isa::neon;
    } else {
      throw Error("IPG_KERNELS: unknown variant '" + want + "'");
    }
    if (!available(isa))
      throw Error("IPG_KERNELS: variant '" + want +
                               "' not available in this build/CPU");
    d.isa = isa;
    d.table = table_for(isa);
    return d;
  }
#if defined(IPG_HAVE_AVX2_TU)
  if (available(Isa::avx2)) {
    d.isa = Isa::avx2;
    d.table = &kAvx2;
    return d;
  }
#endif
#if defined(IPG_HAVE_NEON_TU)
  if (available(Isa::neon)) {
    d.isa = Isa::neon;
    d.table = &kNeon;
    return d;
  }
#endif
  return d;
}

Dispatch& dispatch() {
  static Dispatch d = make_default();
  return d;
}

}  // namespace

const char* name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "?";
}

bool available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(IPG_HAVE_AVX2_TU)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(IPG_HAVE_NEON_TU)
      return true;  // baseline on AArch64
#else
      return false;
#endif
  }
  return false;
}

Isa active() { return dispatch().isa; }

void force(Isa isa) {
  if (!available(isa))
    throw Error(std::string("kernel variant '") + name(isa) +
                             "' not available in this build/CPU");
  Dispatch& d = dispatch();
  d.isa = isa;
  d.table = table_for(isa);
}

double sq_dist(const double* a, const double* b, std::size_t n) {
  return dispatch().table->sq_dist(a, b, n);
}
double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().table->dot(a, b, n);
}
double nrm2_sq(const double* a, std::size_t n) {
  return dispatch().table->nrm2_sq(a, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  dispatch().table->axpy(alpha, x, y, n);
}

}  // namespace ipg::kernels
