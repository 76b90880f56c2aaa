#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ipg {

// Dense sensing operator, row-major m x n.  n is the product-space dimension
// (ambient dim times number of blocks); block j of a signal occupies
// components [j*dim, (j+1)*dim).
struct SamplingOperator {
  std::size_t m = 0, n = 0;
  std::uint64_t seed = 0;  // recorded for provenance / CSV round trips
  std::vector<double> a;

  const double* row(std::size_t i) const { return a.data() + i * n; }

  void apply(const double* x, double* out) const;    // out = A x
  void adjoint(const double* v, double* out) const;  // out = A^T v
  std::vector<double> apply(const std::vector<double>& x) const;
  std::vector<double> adjoint(const std::vector<double>& v) const;
};

// iid N(0,1) entries in row-major order from the given seed.
SamplingOperator gen_gaussian(std::size_t m, std::size_t n, std::uint64_t seed);

void save_operator_csv(const SamplingOperator& op, const std::string& path);
SamplingOperator load_operator_csv(const std::string& path);

// Gradient oracle for f(x) = 1/2 ||y - A x||^2.  The exact mode returns
// A^T (A x - y).  The fixed-precision mode adds an error vector of norm
// exactly nu_g^k: a seeded random direction (redrawn per iteration k), or the
// normalized gradient direction itself in the adversarial mode (the error a
// worst-case oracle could always afford).  nu_g^k = nu_g * decay^k when a
// decay in (0,1) is set, else constant nu_g.
enum class GradientMode { exact, fp };
enum class PerturbMode { random, adversarial };

struct GradientSpec {
  GradientMode mode = GradientMode::exact;
  double nu_g = 0.0;
  PerturbMode perturb = PerturbMode::random;
  double decay = 1.0;  // 1.0 = constant schedule
  std::uint64_t seed = 0;

  double nu_g_at(int k) const;
};

std::vector<double> gradient(const SamplingOperator& op,
                             const std::vector<double>& y,
                             const std::vector<double>& x,
                             const GradientSpec& spec = {}, int k = 0);

}  // namespace ipg
