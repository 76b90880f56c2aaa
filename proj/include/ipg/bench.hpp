#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ipg/analysis.hpp"
#include "ipg/cover_tree.hpp"
#include "ipg/manifolds.hpp"
#include "ipg/projection.hpp"
#include "ipg/solver.hpp"

namespace ipg::bench {

// Shared experiment description.  One cloud (and tree) per experiment; the
// operator and the signal are redrawn per (ratio, trial) pair, so different
// oracles face identical instances and comparisons are paired.
struct Config {
  ManifoldKind kind = ManifoldKind::s_curve;
  std::size_t d = 1000;
  std::size_t ambient = 50;
  std::size_t J = 20;
  std::vector<double> ratios = {0.05, 0.10, 0.15, 0.20, 0.25,
                                0.30, 0.35, 0.40, 0.45, 0.50};
  std::vector<OracleSpec> oracles = {OracleSpec{}};
  int trials = 5;
  std::uint64_t seed = 1;
  double mu = 0.0;        // absolute step; <= 0 defers to mu_scale
  double mu_scale = 0.0;  // step = mu_scale/m per cell; both <= 0 gives 1/m
  int max_iters = 30;
  double tol = 1e-8;
};

// The tree refers to the cloud by address, so the cloud lives behind a
// unique_ptr and the pair stays valid when a Workspace is moved.
struct Workspace {
  std::unique_ptr<PointCloud> cloud;
  CoverTree tree;
};
Workspace make_workspace(const Config& cfg);

struct Instance {
  SamplingOperator op;
  SignalMatrix x_star;
  std::vector<double> y;
  std::size_t m = 0;
  double mu = 0.0;
};
Instance make_instance(const Config& cfg, const Workspace& ws,
                       std::size_t ratio_index, int trial);

// --- convergence ------------------------------------------------------------
struct ConvergenceRow {
  std::string oracle;
  int trial = 0;
  TraceRow row;
};
std::vector<ConvergenceRow> run_convergence(const Config& cfg);
void write_convergence_csv(const std::vector<ConvergenceRow>& rows,
                           const std::string& path);

// --- phase transition -------------------------------------------------------
struct PhaseCell {
  double ratio = 0.0;
  std::string oracle;
  double mean_mse = 0.0;
  bool recovered = false;  // mean_mse <= 1e-4
};
std::vector<PhaseCell> run_phase(const Config& cfg);
void write_phase_csv(const std::vector<PhaseCell>& cells,
                     const std::string& path);

// --- oracle cost ------------------------------------------------------------
struct CostRow {
  std::string oracle;
  double ratio = 0.0;
  double mean_dist_evals = 0.0;
  double mean_mse = 0.0;
};
std::vector<CostRow> run_cost(const Config& cfg);
void write_cost_csv(const std::vector<CostRow>& rows, const std::string& path);

// --- converse grid ----------------------------------------------------------
struct ConverseRow {
  double gamma = 0.0;
  double eps = 0.0;
  int k = 0;
  double x1 = 0.0;        // simulated x^k(1)
  double x1_closed = 0.0; // 1 - (eps tan gamma)^k
  double rel_dev = 0.0;   // |x1 - x1_closed| / max(1, |x1_closed|)
  bool converged = false; // eps tan gamma < 1
};
std::vector<ConverseRow> run_converse_grid(const std::vector<double>& gammas,
                                           const std::vector<double>& epss,
                                           int iters);
void write_converse_csv(const std::vector<ConverseRow>& rows,
                        const std::string& path);

// --- theorem-bound validation ----------------------------------------------
// A small instance is sampled (the operator is redrawn until the step-size
// window exists), the solver is run with full instrumentation, and the
// per-iteration measured error is compared with the matching bound:
// fixed-precision oracles instantiate the product-space slack from measured
// per-block distances, (1+eps) oracles use the eps-rate bound.
struct BoundsRow {
  int k = 0;
  double error = 0.0;  // absolute ||x^k - x*||
  double bound = 0.0;
  double nu_p_eff = 0.0;
};
struct BoundsReport {
  std::string oracle;
  EmbeddingConstants constants;
  double mu = 0.0;
  double rho = 0.0;
  double delta = 0.0;  // 0 for fixed-precision oracles
  double eps = 0.0;
  double w = 0.0;
  std::vector<BoundsRow> rows;
  double min_margin = 0.0;  // min over k of bound - error
};

struct BoundsInstance {
  ManifoldKind kind = ManifoldKind::s_curve;
  std::size_t d = 60;
  std::size_t ambient = 6;
  std::size_t J = 1;
  // Oversampled on purpose: the step-size window M < 2 m_x of the theorems
  // is rarely satisfiable by an undersampled draw at this size.
  double ratio = 2.0;
  std::uint64_t seed = 1;
  OracleSpec oracle;           // exact / tree / fp / pfp / eps
  double nu_g = 0.0;           // fp gradient noise (0 = exact gradient)
  double noise_w = 0.0;        // measurement noise norm
  int iters = 30;
  // When set, overrides oracle.eps with a fraction of the largest
  // admissible delta for the sampled instance (Theorem-2 style runs).
  std::optional<double> eps_delta_fraction;
};
BoundsReport run_bounds(const BoundsInstance& inst);
void write_bounds_csv(const BoundsReport& rep, const std::string& path);

}  // namespace ipg::bench
