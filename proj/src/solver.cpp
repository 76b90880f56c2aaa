#include "ipg/solver.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ipg/errors.hpp"
#include "ipg/kernels.hpp"

namespace ipg {

IpgResult ipg_run(const SamplingOperator& op, const std::vector<double>& y,
                  const PointCloud& cloud, const CoverTree* tree,
                  const IpgConfig& cfg, const std::vector<double>* x_star,
                  const IterHook& hook) {
  if (!(cfg.mu > 0.0))
    throw NonpositiveStep("ipg_run: mu = " + std::to_string(cfg.mu));
  if (cfg.tol < 0.0) throw Error("ipg_run: tol must be >= 0");
  if (y.size() != op.m)
    throw DimensionMismatch("ipg_run: y has " + std::to_string(y.size()) +
                            " entries, operator has m = " + std::to_string(op.m));
  if (cloud.dim == 0 || op.n % cloud.dim != 0)
    throw DimensionMismatch("ipg_run: operator width " + std::to_string(op.n) +
                            " is not a multiple of the cloud dimension " +
                            std::to_string(cloud.dim));
  const std::size_t blocks = op.n / cloud.dim;
  if (x_star && x_star->size() != op.n)
    throw DimensionMismatch("ipg_run: x* has wrong length");

  IpgResult res;
  res.x.assign(op.n, 0.0);

  const double x_star_norm =
      x_star ? std::sqrt(kernels::nrm2_sq(x_star->data(), op.n)) : 0.0;

  double f_prev = 0.5 * kernels::nrm2_sq(y.data(), op.m);  // f(x^0), x^0 = 0
  std::vector<double> z(op.n), resid(op.m);

  for (int k = 1; k <= cfg.max_iters; ++k) {
    const std::vector<double> g = gradient(op, y, res.x, cfg.gradient, k);
    z = res.x;
    kernels::axpy(-cfg.mu, g.data(), z.data(), op.n);

    ProjectionResult proj =
        project(z.data(), cloud.dim, blocks, cloud, tree, cfg.oracle, k);
    res.x = std::move(proj.x);
    res.dist_evals += proj.dist_evals;

    op.apply(res.x.data(), resid.data());
    for (std::size_t i = 0; i < op.m; ++i) resid[i] -= y[i];
    const double f_cur = 0.5 * kernels::nrm2_sq(resid.data(), op.m);

    TraceRow row;
    row.k = k;
    row.objective = f_cur;
    row.cum_dist_evals = res.dist_evals;
    row.nu_p_k = cfg.oracle.kind == OracleKind::pfp || cfg.oracle.kind == OracleKind::fp
                     ? cfg.oracle.nu_p_at(k)
                     : 0.0;
    row.nu_g_k = cfg.gradient.nu_g_at(k);
    if (x_star) {
      const double err = std::sqrt(
          kernels::sq_dist(res.x.data(), x_star->data(), op.n));
      row.error = x_star_norm > 0.0 ? err / x_star_norm : err;
    }
    res.trace.push_back(row);

    if (hook) hook(k, z, res.x);

    if (std::abs(f_prev - f_cur) <= cfg.tol) {
      res.stopped_by_tol = true;
      break;
    }
    f_prev = f_cur;
  }
  return res;
}

void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path,
                    const std::string& oracle_label) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << "oracle,k,objective,error,cum_dist_evals,nu_p_k,nu_g_k\n";
  char buf[160];
  for (const TraceRow& r : trace) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g,%llu,%.17g,%.17g\n",
                  oracle_label.c_str(), r.k, r.objective, r.error,
                  static_cast<unsigned long long>(r.cum_dist_evals), r.nu_p_k,
                  r.nu_g_k);
    f << buf;
  }
  if (!f) throw IoError("write failed for '" + path + "'");
}

std::vector<std::array<double, 2>> converse_run(double gamma, double eps,
                                                int iters) {
  if (!(gamma >= 0.0 && gamma < 1.5707963267948966))
    throw GammaOutOfRange("converse_run: gamma = " + std::to_string(gamma) +
                          " outside [0, pi/2)");
  if (eps < 0.0) throw BadOracle("converse_run: eps must be >= 0");
  if (iters < 1) throw BadIteration("converse_run: iters must be >= 1");

  const double c = std::cos(gamma);
  const double s = std::sin(gamma);
  const double a0 = c, a1 = -s;   // A = [cos g, -sin g]
  const double yv = c;            // y = A x*, x* = [1, 0]
  const double mu = 1.0 / (c * c);

  std::vector<std::array<double, 2>> out;
  out.reserve(static_cast<std::size_t>(iters));
  std::array<double, 2> x{0.0, 0.0};
  for (int k = 1; k <= iters; ++k) {
    const double r = a0 * x[0] + a1 * x[1] - yv;  // A x - y
    std::array<double, 2> z{x[0] - mu * a0 * r, x[1] - mu * a1 * r};
    x = adversarial_line_project(z, eps);
    out.push_back(x);
  }
  return out;
}

}  // namespace ipg
