#include "ipg/analysis.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ipg/errors.hpp"
#include "ipg/kernels.hpp"
#include "ipg/rng.hpp"

namespace ipg {

namespace {

constexpr double kCondSlack = 1e-12;  // tolerated rounding on mu <= 1/M

// sqrt(1/(mu m_x) - 1); the radicand is clamped at 0 so mu = 1/m_x computed
// in floating point cannot produce a NaN.
inline double rho_base(double mu, double m_x) {
  return std::sqrt(std::max(0.0, 1.0 / (mu * m_x) - 1.0));
}

// sum_{i=1..k} rho^{k-i} nu~^i with the exponents combined, so tiny rho never
// overflows the split rho^k * rho^-i form.
template <typename NuAt>
double damped_sum(int k, double rho, NuAt&& nu_at) {
  double acc = 0.0;
  double factor = 1.0;
  for (int i = k; i >= 1; --i) {
    acc += factor * nu_at(i);
    factor *= rho;
  }
  return acc;
}

void check_step_window(double mu, double m_x, double M, double q) {
  if (!(M < q * m_x))
    throw ConditionViolated("M < " + std::to_string(q) + " m_x fails (M = " +
                            std::to_string(M) + ", m_x = " + std::to_string(m_x) +
                            ")");
  if (!(mu * (q * m_x) > 1.0))
    throw ConditionViolated("mu > 1/(" + std::to_string(q) +
                            " m_x) fails (mu = " + std::to_string(mu) + ")");
  if (!(mu * M <= 1.0 + kCondSlack))
    throw ConditionViolated("mu <= 1/M fails (mu = " + std::to_string(mu) +
                            ", M = " + std::to_string(M) + ")");
}

}  // namespace

EmbeddingConstants estimate_constants(const SamplingOperator& op,
                                      const PointCloud& cloud,
                                      const std::vector<double>& x_star) {
  const std::size_t d = cloud.size();
  const std::size_t dim = cloud.dim;
  if (d == 0) throw EmptyCloud("estimate_constants");
  if (dim == 0 || op.n % dim != 0)
    throw DimensionMismatch("estimate_constants: operator width " +
                            std::to_string(op.n) +
                            " is not a multiple of the cloud dimension");
  const std::size_t J = op.n / dim;
  if (x_star.size() != op.n)
    throw DimensionMismatch("estimate_constants: x* has wrong length");

  // Enumeration guards: d^J model points, and all unordered pairs of them.
  double states_f = 1.0;
  for (std::size_t j = 0; j < J; ++j) states_f *= static_cast<double>(d);
  if (states_f > 1e6)
    throw TooLargeToEnumerate("model has d^J = " + std::to_string(states_f) +
                              " points");
  const auto states = static_cast<std::size_t>(states_f);
  if (0.5 * states_f * (states_f - 1.0) > 5e7)
    throw TooLargeToEnumerate("model pair enumeration would need " +
                              std::to_string(0.5 * states_f * (states_f - 1.0)) +
                              " evaluations");

  // Match x* against the atoms, block by block, exactly.
  std::vector<std::uint32_t> star(J);
  for (std::size_t j = 0; j < J; ++j) {
    const double* xj = x_star.data() + j * dim;
    bool found = false;
    for (std::size_t i = 0; i < d && !found; ++i) {
      const double* p = cloud.point(i);
      if (std::equal(p, p + dim, xj)) {
        star[j] = static_cast<std::uint32_t>(i);
        found = true;
      }
    }
    if (!found)
      throw XStarNotInModel("block " + std::to_string(j) +
                            " of x* is not an atom of the cloud");
  }

  // P[j*d + i] = A_j psi_i, the j-th block of columns applied to atom i.
  std::vector<double> P(J * d * op.m);
  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t i = 0; i < d; ++i) {
      double* out = P.data() + (j * d + i) * op.m;
      const double* atom = cloud.point(i);
      for (std::size_t r = 0; r < op.m; ++r)
        out[r] = kernels::dot(op.row(r) + j * dim, atom, dim);
    }
  }

  // Pairwise squared atom distances (also catches coincident atoms).
  std::vector<double> D2(d * d, 0.0);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b) {
      const double sq = kernels::sq_dist(cloud.point(a), cloud.point(b), dim);
      if (sq == 0.0)
        throw DegenerateCloud("atoms " + std::to_string(a) + " and " +
                              std::to_string(b) + " coincide");
      D2[a * d + b] = D2[b * d + a] = sq;
    }

  // Materialise the model as index tuples (odometer order).
  std::vector<std::uint32_t> tuples(states * J);
  {
    std::vector<std::uint32_t> cur(J, 0);
    for (std::size_t s = 0; s < states; ++s) {
      std::copy(cur.begin(), cur.end(), tuples.begin() + s * J);
      for (std::size_t j = J; j-- > 0;) {
        if (++cur[j] < d) break;
        cur[j] = 0;
      }
    }
  }

  EmbeddingConstants out;
  std::vector<double> diff(op.m);

  // m_x: min over model points != x*.
  out.m_x = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < states; ++s) {
    const std::uint32_t* tup = tuples.data() + s * J;
    double den = 0.0;
    for (std::size_t j = 0; j < J; ++j) den += D2[tup[j] * d + star[j]];
    if (den == 0.0) continue;  // the state is x* itself
    std::fill(diff.begin(), diff.end(), 0.0);
    for (std::size_t j = 0; j < J; ++j) {
      if (tup[j] == star[j]) continue;
      const double* pa = P.data() + (j * d + tup[j]) * op.m;
      const double* pb = P.data() + (j * d + star[j]) * op.m;
      for (std::size_t r = 0; r < op.m; ++r) diff[r] += pa[r] - pb[r];
    }
    out.m_x = std::min(out.m_x, kernels::nrm2_sq(diff.data(), op.m) / den);
  }

  // M: max over distinct model pairs.
  out.M = 0.0;
  for (std::size_t s1 = 0; s1 < states; ++s1) {
    const std::uint32_t* ta = tuples.data() + s1 * J;
    for (std::size_t s2 = s1 + 1; s2 < states; ++s2) {
      const std::uint32_t* tb = tuples.data() + s2 * J;
      double den = 0.0;
      for (std::size_t j = 0; j < J; ++j) den += D2[ta[j] * d + tb[j]];
      std::fill(diff.begin(), diff.end(), 0.0);
      for (std::size_t j = 0; j < J; ++j) {
        if (ta[j] == tb[j]) continue;
        const double* pa = P.data() + (j * d + ta[j]) * op.m;
        const double* pb = P.data() + (j * d + tb[j]) * op.m;
        for (std::size_t r = 0; r < op.m; ++r) diff[r] += pa[r] - pb[r];
      }
      out.M = std::max(out.M, kernels::nrm2_sq(diff.data(), op.m) / den);
    }
  }

  out.op_norm = spectral_norm(op);
  return out;
}

double spectral_norm(const SamplingOperator& op, std::uint64_t seed,
                     double rel_tol, int max_iters) {
  if (op.m == 0 || op.n == 0) throw ZeroDimension("spectral_norm");
  std::vector<double> v(op.n), w(op.m), u(op.n);
  Rng rng(seed);
  for (double& x : v) x = rng.normal();
  double nv = std::sqrt(kernels::nrm2_sq(v.data(), op.n));
  for (double& x : v) x /= nv;

  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    op.apply(v.data(), w.data());
    op.adjoint(w.data(), u.data());
    const double nu = std::sqrt(kernels::nrm2_sq(u.data(), op.n));
    if (nu == 0.0) return 0.0;  // v in the null space of A
    const double change = std::abs(nu - lambda);
    lambda = nu;
    for (std::size_t i = 0; i < op.n; ++i) v[i] = u[i] / nu;
    if (it > 0 && change <= rel_tol * lambda) break;
  }
  return std::sqrt(lambda);
}

double rate_fp(double mu, double m_x) {
  if (!(m_x > 0.0))
    throw StepOutOfRange("rate_fp: m_x must be positive, got " +
                         std::to_string(m_x));
  if (!(mu > 0.0) || mu * m_x > 1.0 + kCondSlack)
    throw StepOutOfRange("rate_fp: mu = " + std::to_string(mu) +
                         " outside (0, 1/m_x], m_x = " + std::to_string(m_x));
  return rho_base(mu, m_x);
}

double bound_fp(int k, double x_star_norm, double mu, double m_x, double M,
                const std::vector<double>& nu_g, const std::vector<double>& nu_p,
                double w) {
  if (k < 1) throw Error("bound_fp: k must be >= 1");
  if (!(m_x > 0.0)) throw ConditionViolated("bound_fp: m_x must be positive");
  check_step_window(mu, m_x, M, 2.0);
  if (static_cast<int>(nu_g.size()) < k || static_cast<int>(nu_p.size()) < k)
    throw DimensionMismatch("bound_fp: need nu_g and nu_p up to iteration k");

  const double rho = rho_base(mu, m_x);
  const double kappa_g = 2.0 / m_x;
  const double kappa_p = 1.0 / std::sqrt(mu * m_x);
  const double kappa_w = 2.0 * std::sqrt(M) / m_x;
  const double acc = damped_sum(k, rho, [&](int i) {
    return kappa_g * nu_g[static_cast<std::size_t>(i - 1)] +
           kappa_p * nu_p[static_cast<std::size_t>(i - 1)];
  });
  return std::pow(rho, k) * x_star_norm + acc + kappa_w * w / (1.0 - rho);
}

EpsBound rate_and_bound_eps(int k, double x_star_norm, double mu, double m_x,
                            double M, double op_norm, double eps,
                            const std::vector<double>& nu_g, double w) {
  if (k < 1) throw Error("rate_and_bound_eps: k must be >= 1");
  if (!(m_x > 0.0))
    throw ConditionViolated("rate_and_bound_eps: m_x must be positive");
  if (!(op_norm > 0.0))
    throw ConditionViolated("rate_and_bound_eps: op_norm must be positive");
  if (eps < 0.0) throw EpsilonTooLarge("eps must be >= 0");
  if (static_cast<int>(nu_g.size()) < k)
    throw DimensionMismatch("rate_and_bound_eps: need nu_g up to iteration k");

  EpsBound out;
  out.phi = std::sqrt(2.0 * eps + eps * eps);
  // smallest delta compatible with phi(eps) <= delta sqrt(m_x) / |||A|||
  out.delta = out.phi * op_norm / std::sqrt(m_x);
  if (!(out.delta < 1.0))
    throw EpsilonTooLarge("delta = " + std::to_string(out.delta) +
                          " >= 1 (eps too large for this embedding)");
  const double q = 2.0 - 2.0 * out.delta + out.delta * out.delta;
  check_step_window(mu, m_x, M, q);

  out.rho = rho_base(mu, m_x) + out.delta;
  out.kappa_g = 2.0 / m_x + std::sqrt(mu) * out.delta / op_norm;
  out.kappa_w = 2.0 * std::sqrt(M) / m_x + std::sqrt(mu) * out.delta;
  const double acc = damped_sum(k, out.rho, [&](int i) {
    return out.kappa_g * nu_g[static_cast<std::size_t>(i - 1)];
  });
  out.bound =
      std::pow(out.rho, k) * x_star_norm + acc + out.kappa_w * w / (1.0 - out.rho);
  return out;
}

PfpBound bound_pfp(int k, double x_star_norm, double rho, double r, double C,
                   double M, double m_x, double w) {
  if (k < 1) throw Error("bound_pfp: k must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0))
    throw RateOutOfRange("bound_pfp: rho = " + std::to_string(rho) +
                         " outside [0, 1)");
  if (!(r > 0.0 && r < 1.0))
    throw RateOutOfRange("bound_pfp: r = " + std::to_string(r) +
                         " outside (0, 1)");
  if (C < 0.0) throw Error("bound_pfp: C must be >= 0");
  if (!(m_x > 0.0)) throw ConditionViolated("bound_pfp: m_x must be positive");

  const double tail = (2.0 * std::sqrt(M) / m_x) * w / (1.0 - rho);
  PfpBound out;
  if (r == rho) {
    out.rho_bar = rho + 1e-6;
    out.bound = std::pow(rho, k) * (x_star_norm + C * k) + tail;
  } else {
    const double hi = std::max(rho, r);
    const double lo = std::min(rho, r);
    out.rho_bar = hi;
    out.bound = std::pow(hi, k) * (x_star_norm + C / (1.0 - lo / hi)) + tail;
  }
  return out;
}

int iterations_for_accuracy(double rho, double x_star_norm, double tau) {
  if (!(rho > 0.0 && rho < 1.0))
    throw RateOutOfRange("iterations_for_accuracy: rho = " +
                         std::to_string(rho) + " outside (0, 1)");
  if (!(tau > 0.0)) throw Error("iterations_for_accuracy: tau must be > 0");
  if (x_star_norm <= 0.0) return 0;
  const double val = std::log(x_star_norm / tau) / std::log(1.0 / rho);
  const double up = std::ceil(val);
  return up <= 0.0 ? 0 : static_cast<int>(up);
}

double jl_distortion(const SamplingOperator& op, const PointCloud& cloud) {
  if (cloud.size() < 2)
    throw EmptyCloud("jl_distortion needs at least two points");
  if (op.n != cloud.dim)
    throw DimensionMismatch("jl_distortion: operator width " +
                            std::to_string(op.n) + " != cloud dimension " +
                            std::to_string(cloud.dim));
  const std::size_t d = cloud.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(op.m));

  std::vector<double> img(d * op.m);
  for (std::size_t i = 0; i < d; ++i)
    op.apply(cloud.point(i), img.data() + i * op.m);

  double theta = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) {
      const double den =
          std::sqrt(kernels::sq_dist(cloud.point(a), cloud.point(b), cloud.dim));
      if (den == 0.0)
        throw DegenerateCloud("points " + std::to_string(a) + " and " +
                              std::to_string(b) + " coincide");
      const double num = scale * std::sqrt(kernels::sq_dist(
                                     img.data() + a * op.m,
                                     img.data() + b * op.m, op.m));
      theta = std::max(theta, std::abs(num / den - 1.0));
    }
  }
  return theta;
}

}  // namespace ipg
