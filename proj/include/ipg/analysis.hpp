#pragma once

#include <cstdint>
#include <vector>

#include "ipg/point_cloud.hpp"
#include "ipg/sensing.hpp"

namespace ipg {

// Embedding constants of an operator restricted to the product model:
//   M    = max over distinct model pairs of ||A(x - x')||^2 / ||x - x'||^2
//   m_x  = min over model points x != x* of ||A(x - x*)||^2 / ||x - x*||^2
//   op_norm = spectral norm |||A||| (so m_x <= M <= op_norm^2).
struct EmbeddingConstants {
  double M = 0.0;
  double m_x = 0.0;
  double op_norm = 0.0;
};

// Exhaustive enumeration; the number of blocks is op.n / cloud.dim.  Guarded
// against blowup (TooLargeToEnumerate); x_star must be an exact column-stack
// of cloud atoms (XStarNotInModel).
EmbeddingConstants estimate_constants(const SamplingOperator& op,
                                      const PointCloud& cloud,
                                      const std::vector<double>& x_star);

// Power iteration on A^T A with a seeded start vector.
double spectral_norm(const SamplingOperator& op, std::uint64_t seed = 0x5eed,
                     double rel_tol = 1e-10, int max_iters = 10000);

// Convergence rate rho = sqrt(1/(mu m_x) - 1) for mu in (0, 1/m_x].
double rate_fp(double mu, double m_x);

// Fixed-precision error bound at iteration k:
//   rho^k (||x*|| + sum_{i=1..k} rho^-i nu~^i) + 2 sqrt(M) w / (m_x (1 - rho)),
//   nu~^i = 2 nu_g^i / m_x + nu_p^i / sqrt(mu m_x),
// valid when M < 2 m_x and mu in ((2 m_x)^-1, M^-1].
double bound_fp(int k, double x_star_norm, double mu, double m_x, double M,
                const std::vector<double>& nu_g, const std::vector<double>& nu_p,
                double w);

// (1+eps)-oracle counterpart.  phi = sqrt(2 eps + eps^2); delta is chosen as
// the smallest admissible value phi * |||A||| / sqrt(m_x) and must stay below
// 1 (EpsilonTooLarge).  Valid when M < (2 - 2 delta + delta^2) m_x and
// mu in (((2 - 2 delta + delta^2) m_x)^-1, M^-1].  At eps = 0 every output
// equals the fixed-precision calculator exactly.
struct EpsBound {
  double phi = 0.0;
  double delta = 0.0;
  double rho = 0.0;
  double kappa_g = 0.0;
  double kappa_w = 0.0;
  double bound = 0.0;
};
EpsBound rate_and_bound_eps(int k, double x_star_norm, double mu, double m_x,
                            double M, double op_norm, double eps,
                            const std::vector<double>& nu_g, double w);

// Bound under a geometric oracle schedule nu~^k <= C r^k:
//   r != rho: max(rho,r)^k (||x*|| + C / (1 - min/max)) + tail
//   r == rho: rho^k (||x*|| + C k) + tail
// rho_bar is the effective rate (rho + 1e-6 in the equal case).
struct PfpBound {
  double bound = 0.0;
  double rho_bar = 0.0;
};
PfpBound bound_pfp(int k, double x_star_norm, double rho, double r, double C,
                   double M, double m_x, double w);

// Smallest K with rho^K ||x*|| <= tau, clamped to >= 0.
int iterations_for_accuracy(double rho, double x_star_norm, double tau);

// Pairwise distortion of A / sqrt(m) on the cloud:
//   max over pairs | ||A(p - q)|| / sqrt(m) / ||p - q||  -  1 |.
double jl_distortion(const SamplingOperator& op, const PointCloud& cloud);

}  // namespace ipg
