#pragma once

#include <cstddef>

// Low-level dense kernels.  Every distance/inner-product evaluation in the
// library funnels through these four entry points, so the active variant is
// the single source of floating-point truth for a process: brute-force
// reference scans and tree searches see bit-identical arithmetic.
//
// A scalar reference implementation is always available.  On x86-64 an AVX2+FMA
// variant is compiled in a separate translation unit and selected at startup
// when the CPU supports it; on AArch64 a NEON variant takes that role.  The
// environment variable IPG_KERNELS (values: scalar, avx2, neon) overrides the
// automatic choice, which is how cross-machine bit-reproducibility is obtained
// when it matters.

namespace ipg::kernels {

enum class Isa { scalar, avx2, neon };

const char* name(Isa isa);
bool available(Isa isa);
Isa active();
// Overrides the dispatch choice for the whole process (used by the
// equivalence tests and by the IPG_KERNELS environment variable).
void force(Isa isa);

// Dispatched entry points.
double sq_dist(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double nrm2_sq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);

// Direct access to the individual variants, for equivalence testing.
namespace scalar {
double sq_dist(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double nrm2_sq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

#if defined(IPG_HAVE_AVX2_TU)
namespace avx2 {
double sq_dist(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double nrm2_sq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2
#endif

#if defined(IPG_HAVE_NEON_TU)
namespace neon {
double sq_dist(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double nrm2_sq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace neon
#endif

}  // namespace ipg::kernels
