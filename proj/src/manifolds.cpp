#include "ipg/manifolds.hpp"

#include <cmath>
#include <numbers>

#include "ipg/errors.hpp"
#include "ipg/kernels.hpp"
#include "ipg/rng.hpp"

namespace ipg {

namespace {

constexpr double kPi = std::numbers::pi;

void surface_point(ManifoldKind kind, double t, double s, double out[3]) {
  switch (kind) {
    case ManifoldKind::s_curve:
      out[0] = std::sin(t);
      out[1] = s;
      out[2] = (t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0)) * (std::cos(t) - 1.0);
      break;
    case ManifoldKind::swiss_roll:
      out[0] = t * std::cos(t);
      out[1] = s;
      out[2] = t * std::sin(t);
      break;
    case ManifoldKind::oscillating_wave:
      out[0] = t;
      out[1] = s;
      out[2] = std::sin(4.0 * kPi * t);
      break;
  }
}

void param_range(ManifoldKind kind, double& t_lo, double& t_hi, double& s_lo,
                 double& s_hi) {
  switch (kind) {
    case ManifoldKind::s_curve:
      t_lo = -1.5 * kPi; t_hi = 1.5 * kPi; s_lo = 0.0; s_hi = 2.0;
      break;
    case ManifoldKind::swiss_roll:
      t_lo = 1.5 * kPi; t_hi = 4.5 * kPi; s_lo = 0.0; s_hi = 21.0;
      break;
    case ManifoldKind::oscillating_wave:
      t_lo = 0.0; t_hi = 1.0; s_lo = 0.0; s_hi = 1.0;
      break;
  }
}

}  // namespace

ManifoldKind parse_manifold(const std::string& name) {
  if (name == "s-curve") return ManifoldKind::s_curve;
  if (name == "swiss-roll") return ManifoldKind::swiss_roll;
  if (name == "oscillating-wave") return ManifoldKind::oscillating_wave;
  throw ParseError("unknown dataset '" + name +
                   "' (expected s-curve, swiss-roll or oscillating-wave)");
}

const char* manifold_name(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::s_curve: return "s-curve";
    case ManifoldKind::swiss_roll: return "swiss-roll";
    case ManifoldKind::oscillating_wave: return "oscillating-wave";
  }
  return "?";
}

PointCloud gen_manifold(ManifoldKind kind, std::size_t d, std::size_t ambient,
                        std::uint64_t seed) {
  if (ambient < 3)
    throw AmbientTooSmall("gen_manifold: ambient dimension " +
                          std::to_string(ambient) + " < 3");

  const auto tag = static_cast<std::uint64_t>(kind) + 1;

  // Random orthonormal ambient x 3 frame: three Gaussian vectors,
  // Gram-Schmidt.  Redraw on (measure-zero) near-dependence.
  std::vector<double> frame(ambient * 3);
  {
    Rng rng(derive_seed(seed, {tag, 0x6672616dULL /* "fram" */}));
    for (std::size_t col = 0; col < 3; ++col) {
      double* q = frame.data() + col * ambient;
      while (true) {
        for (std::size_t i = 0; i < ambient; ++i) q[i] = rng.normal();
        for (std::size_t prev = 0; prev < col; ++prev) {
          const double* qp = frame.data() + prev * ambient;
          const double proj = kernels::dot(q, qp, ambient);
          kernels::axpy(-proj, qp, q, ambient);
        }
        const double norm = std::sqrt(kernels::nrm2_sq(q, ambient));
        if (norm > 1e-8) {
          for (std::size_t i = 0; i < ambient; ++i) q[i] /= norm;
          break;
        }
      }
    }
  }

  PointCloud cloud;
  cloud.dim = ambient;
  cloud.data.resize(d * ambient);
  double t_lo, t_hi, s_lo, s_hi;
  param_range(kind, t_lo, t_hi, s_lo, s_hi);
  Rng rng(derive_seed(seed, {tag, 0x70617261ULL /* "para" */}));
  double p3[3];
  for (std::size_t i = 0; i < d; ++i) {
    const double t = rng.uniform(t_lo, t_hi);
    const double s = rng.uniform(s_lo, s_hi);
    surface_point(kind, t, s, p3);
    double* x = cloud.data.data() + i * ambient;
    for (std::size_t r = 0; r < ambient; ++r) {
      x[r] = frame[0 * ambient + r] * p3[0] + frame[1 * ambient + r] * p3[1] +
             frame[2 * ambient + r] * p3[2];
    }
  }
  return cloud;
}

SignalMatrix select_signal(const PointCloud& cloud, std::size_t J,
                           std::uint64_t seed) {
  if (cloud.size() == 0) throw EmptyCloud("select_signal");
  if (J == 0) throw ZeroDimension("select_signal: J must be positive");
  SignalMatrix sig;
  sig.dim = cloud.dim;
  sig.blocks = J;
  sig.atoms.resize(J);
  sig.x.resize(cloud.dim * J);
  Rng rng(seed);
  for (std::size_t j = 0; j < J; ++j) {
    const auto idx = static_cast<std::uint32_t>(rng.index(cloud.size()));
    sig.atoms[j] = idx;
    const double* p = cloud.point(idx);
    std::copy(p, p + cloud.dim, sig.x.begin() + j * cloud.dim);
  }
  return sig;
}

}  // namespace ipg
