#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ipg/cover_tree.hpp"
#include "ipg/projection.hpp"
#include "ipg/sensing.hpp"

namespace ipg {

// Iterative projected gradient for f(x) = 1/2 ||y - A x||^2 over the product
// model defined by a point cloud:
//   x^k = P( x^{k-1} - mu * grad(x^{k-1}) ),   x^0 = 0.
// Stops after max_iters iterations or when the objective progress
// |f(x^{k-1}) - f(x^k)| drops to tol (absolute).

struct IpgConfig {
  double mu = 0.0;
  int max_iters = 30;
  double tol = 1e-8;
  OracleSpec oracle;
  GradientSpec gradient;
};

struct TraceRow {
  int k = 0;
  double objective = 0.0;
  double error = -1.0;  // ||x^k - x*|| / ||x*||; -1 when x* was not supplied
  std::uint64_t cum_dist_evals = 0;
  double nu_p_k = 0.0;
  double nu_g_k = 0.0;
};

struct IpgResult {
  std::vector<double> x;
  std::vector<TraceRow> trace;
  std::uint64_t dist_evals = 0;
  bool stopped_by_tol = false;

  double final_error() const { return trace.empty() ? -1.0 : trace.back().error; }
};

// Observer invoked after each iteration with the pre-projection point
// z = x^{k-1} - mu * g and the post-projection iterate x^k.
using IterHook = std::function<void(int k, const std::vector<double>& pre,
                                    const std::vector<double>& post)>;

IpgResult ipg_run(const SamplingOperator& op, const std::vector<double>& y,
                  const PointCloud& cloud, const CoverTree* tree,
                  const IpgConfig& cfg,
                  const std::vector<double>* x_star = nullptr,
                  const IterHook& hook = {});

void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path,
                    const std::string& oracle_label);

// One run of the 2-d converse construction: A = [cos g, -sin g], y = cos g,
// x* = [1, 0], mu = 1 / cos^2 g, with the adversarial line oracle.  Returns
// x^1 .. x^iters.  The first component obeys
// x^k(1) = 1 - (eps tan g)^k in exact arithmetic; the second stays 0.
std::vector<std::array<double, 2>> converse_run(double gamma, double eps,
                                                int iters);

}  // namespace ipg
