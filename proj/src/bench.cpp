#include "ipg/bench.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "ipg/errors.hpp"
#include "ipg/kernels.hpp"
#include "ipg/rng.hpp"

namespace ipg::bench {

namespace {

constexpr std::uint64_t kTagCloud = 0x636c6f7564ULL;
constexpr std::uint64_t kTagOp = 0x6f70657261ULL;
constexpr std::uint64_t kTagSignal = 0x7369676e6cULL;
constexpr std::uint64_t kTagNoise = 0x6e6f697365ULL;
constexpr std::uint64_t kTagGrad = 0x67726164ULL;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  return f;
}

}  // namespace

Workspace make_workspace(const Config& cfg) {
  Workspace ws;
  ws.cloud = std::make_unique<PointCloud>(
      gen_manifold(cfg.kind, cfg.d, cfg.ambient, derive_seed(cfg.seed, {kTagCloud})));
  ws.tree = CoverTree::build(*ws.cloud);
  return ws;
}

Instance make_instance(const Config& cfg, const Workspace& ws,
                       std::size_t ratio_index, int trial) {
  if (ratio_index >= cfg.ratios.size())
    throw Error("make_instance: ratio index out of range");
  const double ratio = cfg.ratios[ratio_index];
  const std::size_t n = cfg.ambient * cfg.J;
  Instance inst;
  inst.m = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n))));
  inst.op = gen_gaussian(
      inst.m, n,
      derive_seed(cfg.seed, {kTagOp, ratio_index, static_cast<std::uint64_t>(trial)}));
  inst.x_star = select_signal(
      *ws.cloud, cfg.J,
      derive_seed(cfg.seed,
                  {kTagSignal, ratio_index, static_cast<std::uint64_t>(trial)}));
  inst.y = inst.op.apply(inst.x_star.x);
  if (cfg.mu > 0.0)
    inst.mu = cfg.mu;
  else if (cfg.mu_scale > 0.0)
    inst.mu = cfg.mu_scale / static_cast<double>(inst.m);
  else
    inst.mu = 1.0 / static_cast<double>(inst.m);
  return inst;
}

std::vector<ConvergenceRow> run_convergence(const Config& cfg) {
  if (cfg.ratios.empty()) throw Error("run_convergence: no ratio given");
  const Workspace ws = make_workspace(cfg);
  std::vector<ConvergenceRow> rows;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const Instance inst = make_instance(cfg, ws, 0, trial);
    for (const OracleSpec& oracle : cfg.oracles) {
      IpgConfig run_cfg;
      run_cfg.mu = inst.mu;
      run_cfg.max_iters = cfg.max_iters;
      run_cfg.tol = cfg.tol;
      run_cfg.oracle = oracle;
      const IpgResult res =
          ipg_run(inst.op, inst.y, *ws.cloud, &ws.tree, run_cfg, &inst.x_star.x);
      for (const TraceRow& tr : res.trace)
        rows.push_back({oracle.label(), trial, tr});
    }
  }
  return rows;
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows,
                           const std::string& path) {
  auto f = open_out(path);
  f << "oracle,trial,k,objective,error,cum_dist_evals,nu_p_k,nu_g_k\n";
  for (const auto& r : rows) {
    f << r.oracle << ',' << r.trial << ',' << r.row.k << ','
      << fmt(r.row.objective) << ',' << fmt(r.row.error) << ','
      << r.row.cum_dist_evals << ',' << fmt(r.row.nu_p_k) << ','
      << fmt(r.row.nu_g_k) << '\n';
  }
}

std::vector<PhaseCell> run_phase(const Config& cfg) {
  const Workspace ws = make_workspace(cfg);
  std::vector<PhaseCell> cells;
  for (std::size_t ri = 0; ri < cfg.ratios.size(); ++ri) {
    std::vector<double> sums(cfg.oracles.size(), 0.0);
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const Instance inst = make_instance(cfg, ws, ri, trial);
      for (std::size_t oi = 0; oi < cfg.oracles.size(); ++oi) {
        IpgConfig run_cfg;
        run_cfg.mu = inst.mu;
        run_cfg.max_iters = cfg.max_iters;
        run_cfg.tol = cfg.tol;
        run_cfg.oracle = cfg.oracles[oi];
        const IpgResult res =
            ipg_run(inst.op, inst.y, *ws.cloud, &ws.tree, run_cfg, &inst.x_star.x);
        sums[oi] += res.final_error();
      }
    }
    for (std::size_t oi = 0; oi < cfg.oracles.size(); ++oi) {
      PhaseCell cell;
      cell.ratio = cfg.ratios[ri];
      cell.oracle = cfg.oracles[oi].label();
      cell.mean_mse = sums[oi] / cfg.trials;
      cell.recovered = cell.mean_mse <= 1e-4;
      cells.push_back(cell);
    }
  }
  return cells;
}

void write_phase_csv(const std::vector<PhaseCell>& cells,
                     const std::string& path) {
  auto f = open_out(path);
  f << "ratio,oracle,mean_mse,recovered\n";
  for (const auto& c : cells)
    f << fmt(c.ratio) << ',' << c.oracle << ',' << fmt(c.mean_mse) << ','
      << (c.recovered ? 1 : 0) << '\n';
}

std::vector<CostRow> run_cost(const Config& cfg) {
  const Workspace ws = make_workspace(cfg);
  std::vector<CostRow> rows;
  for (std::size_t ri = 0; ri < cfg.ratios.size(); ++ri) {
    std::vector<double> eval_sums(cfg.oracles.size(), 0.0);
    std::vector<double> mse_sums(cfg.oracles.size(), 0.0);
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const Instance inst = make_instance(cfg, ws, ri, trial);
      for (std::size_t oi = 0; oi < cfg.oracles.size(); ++oi) {
        IpgConfig run_cfg;
        run_cfg.mu = inst.mu;
        run_cfg.max_iters = cfg.max_iters;
        run_cfg.tol = cfg.tol;
        run_cfg.oracle = cfg.oracles[oi];
        const IpgResult res =
            ipg_run(inst.op, inst.y, *ws.cloud, &ws.tree, run_cfg, &inst.x_star.x);
        eval_sums[oi] += static_cast<double>(res.dist_evals);
        mse_sums[oi] += res.final_error();
      }
    }
    for (std::size_t oi = 0; oi < cfg.oracles.size(); ++oi) {
      CostRow row;
      row.oracle = cfg.oracles[oi].label();
      row.ratio = cfg.ratios[ri];
      row.mean_dist_evals = eval_sums[oi] / cfg.trials;
      row.mean_mse = mse_sums[oi] / cfg.trials;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_cost_csv(const std::vector<CostRow>& rows, const std::string& path) {
  auto f = open_out(path);
  f << "oracle,ratio,mean_dist_evals,mean_mse\n";
  for (const auto& r : rows)
    f << r.oracle << ',' << fmt(r.ratio) << ',' << fmt(r.mean_dist_evals) << ','
      << fmt(r.mean_mse) << '\n';
}

std::vector<ConverseRow> run_converse_grid(const std::vector<double>& gammas,
                                           const std::vector<double>& epss,
                                           int iters) {
  std::vector<ConverseRow> rows;
  for (double gamma : gammas) {
    for (double eps : epss) {
      const auto xs = converse_run(gamma, eps, iters);
      const double factor = eps * std::tan(gamma);
      const bool converged = factor < 1.0;
      for (int k = 1; k <= iters; ++k) {
        ConverseRow row;
        row.gamma = gamma;
        row.eps = eps;
        row.k = k;
        row.x1 = xs[static_cast<std::size_t>(k - 1)][0];
        row.x1_closed = 1.0 - std::pow(factor, k);
        row.rel_dev = std::abs(row.x1 - row.x1_closed) /
                      std::max(1.0, std::abs(row.x1_closed));
        row.converged = converged;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_converse_csv(const std::vector<ConverseRow>& rows,
                        const std::string& path) {
  auto f = open_out(path);
  f << "gamma,eps,k,x1,x1_closed,rel_dev,converged\n";
  for (const auto& r : rows)
    f << fmt(r.gamma) << ',' << fmt(r.eps) << ',' << r.k << ',' << fmt(r.x1)
      << ',' << fmt(r.x1_closed) << ',' << fmt(r.rel_dev) << ','
      << (r.converged ? 1 : 0) << '\n';
}

BoundsReport run_bounds(const BoundsInstance& inst) {
  const PointCloud cloud = gen_manifold(inst.kind, inst.d, inst.ambient,
                                        derive_seed(inst.seed, {kTagCloud}));
  const CoverTree tree = CoverTree::build(cloud);
  const std::size_t n = inst.ambient * inst.J;
  const auto m = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(inst.ratio * static_cast<double>(n))));

  const SignalMatrix x_star =
      select_signal(cloud, inst.J, derive_seed(inst.seed, {kTagSignal}));

  // Redraw the operator until the step-size window of the theorems exists
  // (M strictly below 2 m_x, with a little margin to stay off the boundary).
  SamplingOperator op;
  EmbeddingConstants ec;
  bool found = false;
  for (std::uint64_t attempt = 0; attempt < 200 && !found; ++attempt) {
    op = gen_gaussian(m, n, derive_seed(inst.seed, {kTagOp, attempt}));
    ec = estimate_constants(op, cloud, x_star.x);
    if (ec.m_x > 0.0 && ec.M < 2.0 * ec.m_x * (1.0 - 1e-9)) found = true;
  }
  if (!found)
    throw ConditionViolated(
        "run_bounds: no sampled operator satisfied M < 2 m_x after 200 draws");

  BoundsReport rep;
  rep.constants = ec;
  rep.mu = 1.0 / ec.M;

  OracleSpec oracle = inst.oracle;
  if (inst.eps_delta_fraction) {
    // Theorem-2 style run: pick eps from a target fraction of the largest
    // admissible delta for this instance.
    const double delta_max =
        1.0 - std::sqrt(std::max(0.0, ec.M / ec.m_x - 1.0));
    const double delta = *inst.eps_delta_fraction * delta_max;
    const double phi = delta * std::sqrt(ec.m_x) / ec.op_norm;
    oracle.kind = OracleKind::eps;
    oracle.eps = std::sqrt(1.0 + phi * phi) - 1.0;
  }
  rep.oracle = oracle.label();
  rep.eps = oracle.kind == OracleKind::eps ? oracle.eps : 0.0;

  std::vector<double> y = op.apply(x_star.x);
  if (inst.noise_w > 0.0) {
    std::vector<double> eta(m);
    Rng rng(derive_seed(inst.seed, {kTagNoise}));
    for (double& v : eta) v = rng.normal();
    const double norm = std::sqrt(kernels::nrm2_sq(eta.data(), m));
    for (std::size_t i = 0; i < m; ++i) y[i] += inst.noise_w * eta[i] / norm;
  }
  {
    // w as the solver sees it: the exact residual norm at x*.
    std::vector<double> resid = op.apply(x_star.x);
    for (std::size_t i = 0; i < m; ++i) resid[i] = y[i] - resid[i];
    rep.w = std::sqrt(kernels::nrm2_sq(resid.data(), m));
  }

  IpgConfig run_cfg;
  run_cfg.mu = rep.mu;
  run_cfg.max_iters = inst.iters;
  run_cfg.tol = 0.0;
  run_cfg.oracle = oracle;
  if (inst.nu_g > 0.0) {
    run_cfg.gradient.mode = GradientMode::fp;
    run_cfg.gradient.nu_g = inst.nu_g;
    run_cfg.gradient.seed = derive_seed(inst.seed, {kTagGrad});
  }

  // Instrumentation: per-iteration absolute error and the measured
  // product-space projection slack
  //   nu_p_eff^k = sqrt( sum_j achieved_j^2 - sum_j dstar_j^2 ).
  std::vector<double> errors, nu_eff;
  const std::size_t dim = cloud.dim;
  const auto hook = [&](int, const std::vector<double>& pre,
                        const std::vector<double>& post) {
    double sum_ach = 0.0, sum_opt = 0.0;
    for (std::size_t j = 0; j < inst.J; ++j) {
      const double* zj = pre.data() + j * dim;
      double best = kernels::sq_dist(cloud.point(0), zj, dim);
      for (std::size_t i = 1; i < cloud.size(); ++i)
        best = std::min(best, kernels::sq_dist(cloud.point(i), zj, dim));
      sum_opt += best;
      sum_ach += kernels::sq_dist(post.data() + j * dim, zj, dim);
    }
    nu_eff.push_back(std::sqrt(std::max(0.0, sum_ach - sum_opt)));
    errors.push_back(
        std::sqrt(kernels::sq_dist(post.data(), x_star.x.data(), n)));
  };

  const IpgResult res =
      ipg_run(op, y, cloud, &tree, run_cfg, &x_star.x, hook);

  const double x_star_norm = std::sqrt(kernels::nrm2_sq(x_star.x.data(), n));
  const int K = static_cast<int>(res.trace.size());
  std::vector<double> nu_g_list(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k)
    nu_g_list[static_cast<std::size_t>(k - 1)] = run_cfg.gradient.nu_g_at(k);

  rep.min_margin = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= K; ++k) {
    BoundsRow row;
    row.k = k;
    row.error = errors[static_cast<std::size_t>(k - 1)];
    row.nu_p_eff = nu_eff[static_cast<std::size_t>(k - 1)];
    if (oracle.kind == OracleKind::eps) {
      const EpsBound eb = rate_and_bound_eps(k, x_star_norm, rep.mu, ec.m_x,
                                             ec.M, ec.op_norm, oracle.eps,
                                             nu_g_list, rep.w);
      row.bound = eb.bound;
      rep.rho = eb.rho;
      rep.delta = eb.delta;
    } else {
      row.bound = bound_fp(k, x_star_norm, rep.mu, ec.m_x, ec.M, nu_g_list,
                           nu_eff, rep.w);
      rep.rho = rate_fp(rep.mu, ec.m_x);
      rep.delta = 0.0;
    }
    rep.min_margin = std::min(rep.min_margin, row.bound - row.error);
    rep.rows.push_back(row);
  }
  return rep;
}

void write_bounds_csv(const BoundsReport& rep, const std::string& path) {
  auto f = open_out(path);
  f << "# oracle=" << rep.oracle << " M=" << fmt(rep.constants.M)
    << " m_x=" << fmt(rep.constants.m_x)
    << " op_norm=" << fmt(rep.constants.op_norm) << " mu=" << fmt(rep.mu)
    << " rho=" << fmt(rep.rho) << " delta=" << fmt(rep.delta)
    << " w=" << fmt(rep.w) << '\n';
  f << "k,error,bound,margin,nu_p_eff\n";
  for (const auto& r : rep.rows)
    f << r.k << ',' << fmt(r.error) << ',' << fmt(r.bound) << ','
      << fmt(r.bound - r.error) << ',' << fmt(r.nu_p_eff) << '\n';
}

}  // namespace ipg::bench
