#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "ipg/bench.hpp"
#include "ipg/errors.hpp"
#include "oracles.hpp"

using namespace ipg;
using namespace ipg::bench;

namespace {

// Small, fast experiment shape shared by the harness tests.
Config tiny_config() {
  Config cfg;
  cfg.kind = ManifoldKind::s_curve;
  cfg.d = 80;
  cfg.ambient = 4;
  cfg.J = 2;
  cfg.ratios = {0.5};
  cfg.trials = 2;
  cfg.seed = 77;
  cfg.max_iters = 5;
  cfg.tol = 0.0;  // fixed-length traces
  return cfg;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream f(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("converse grid covers the product and matches the closed form") {
  const std::vector<double> gammas = {0.3, 1.0};
  const std::vector<double> epss = {0.1, 2.0};
  const auto rows = run_converse_grid(gammas, epss, 5);
  REQUIRE(rows.size() == 2 * 2 * 5);

  std::size_t i = 0;
  for (double gamma : gammas) {
    for (double eps : epss) {
      const bool should_converge = eps * std::tan(gamma) < 1.0;
      for (int k = 1; k <= 5; ++k, ++i) {
        CAPTURE(gamma);
        CAPTURE(eps);
        CAPTURE(k);
        CHECK(rows[i].gamma == gamma);
        CHECK(rows[i].eps == eps);
        CHECK(rows[i].k == k);
        CHECK(rows[i].rel_dev <= 1e-12);
        CHECK(rows[i].converged == should_converge);
      }
    }
  }

  const auto path = test::temp_path("converse.csv");
  write_converse_csv(rows, path);
  const auto lines = read_lines(path);
  REQUIRE(lines.size() == rows.size() + 1);
  CHECK(lines[0] == "gamma,eps,k,x1,x1_closed,rel_dev,converged");
  // the diverging cell is flagged 0
  CHECK(lines.back().back() == '0');
  std::remove(path.c_str());
}

TEST_CASE("paired convergence rows: exact and tree runs coincide bitwise") {
  // Both oracles see the same redrawn instance per trial, and tree search
  // returns the brute-force nearest atom exactly, so whole traces match.
  auto cfg = tiny_config();
  cfg.oracles = {OracleSpec::parse("exact"), OracleSpec::parse("tree")};
  const auto rows = run_convergence(cfg);
  REQUIRE(rows.size() == 2 * 2 * 5);  // trials x oracles x iters

  for (int trial = 0; trial < 2; ++trial) {
    for (int k = 1; k <= 5; ++k) {
      const TraceRow* exact_row = nullptr;
      const TraceRow* tree_row = nullptr;
      for (const auto& r : rows) {
        if (r.trial != trial || r.row.k != k) continue;
        if (r.oracle == "exact") exact_row = &r.row;
        if (r.oracle == "tree") tree_row = &r.row;
      }
      REQUIRE(exact_row != nullptr);
      REQUIRE(tree_row != nullptr);
      CHECK(exact_row->objective == tree_row->objective);
      CHECK(exact_row->error == tree_row->error);
      // cost differs: the tree prunes, brute force scans all d atoms
      CHECK(tree_row->cum_dist_evals < exact_row->cum_dist_evals);
    }
  }

  const auto path = test::temp_path("conv.csv");
  write_convergence_csv(rows, path);
  const auto lines = read_lines(path);
  REQUIRE(lines.size() == rows.size() + 1);
  CHECK(lines[0] == "oracle,trial,k,objective,error,cum_dist_evals,nu_p_k,nu_g_k");
  std::remove(path.c_str());
}

TEST_CASE("phase cells aggregate recovery over trials") {
  auto cfg = tiny_config();
  cfg.ratios = {0.3, 0.5};
  cfg.oracles = {OracleSpec::parse("tree")};
  const auto cells = run_phase(cfg);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].ratio == 0.3);
  CHECK(cells[1].ratio == 0.5);
  for (const auto& c : cells) {
    CHECK(c.oracle == "tree");
    CHECK(c.mean_mse >= 0.0);
    CHECK(c.recovered == (c.mean_mse <= 1e-4));
  }

  const auto path = test::temp_path("phase.csv");
  write_phase_csv(cells, path);
  const auto lines = read_lines(path);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "ratio,oracle,mean_mse,recovered");
  std::remove(path.c_str());
}

TEST_CASE("cost rows count full-dimension distance evaluations") {
  auto cfg = tiny_config();
  cfg.oracles = {OracleSpec::parse("exact"), OracleSpec::parse("tree")};
  const auto rows = run_cost(cfg);
  REQUIRE(rows.size() == 2);

  // Brute force scans all d atoms for each of J blocks on every iteration;
  // with tol = 0 the trace length is pinned, so the count is exact.
  const double brute = static_cast<double>(cfg.max_iters * cfg.J * cfg.d);
  const CostRow& exact_row = rows[0].oracle == "exact" ? rows[0] : rows[1];
  const CostRow& tree_row = rows[0].oracle == "tree" ? rows[0] : rows[1];
  CHECK(exact_row.mean_dist_evals == brute);
  CHECK(tree_row.mean_dist_evals < brute);
  CHECK(tree_row.mean_mse == exact_row.mean_mse);

  const auto path = test::temp_path("cost.csv");
  write_cost_csv(rows, path);
  const auto lines = read_lines(path);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "oracle,ratio,mean_dist_evals,mean_mse");
  std::remove(path.c_str());
}

TEST_CASE("bounds runner: fixed-precision theorem holds on a sampled instance") {
  BoundsInstance inst;
  inst.seed = 4;
  inst.oracle = OracleSpec::parse("fp:0.05");
  inst.nu_g = 0.1;
  inst.iters = 10;
  const auto rep = run_bounds(inst);

  CHECK(rep.constants.m_x > 0.0);
  CHECK(rep.constants.M < 2.0 * rep.constants.m_x);
  CHECK(rep.mu == 1.0 / rep.constants.M);
  CHECK(rep.rho >= 0.0);
  CHECK(rep.rho < 1.0);
  CHECK(rep.delta == 0.0);
  // Delta-objective hits zero once the iterate locks onto x*, so the trace
  // may legitimately stop before the iteration cap.
  REQUIRE(!rep.rows.empty());
  CHECK(rep.rows.size() <= 10);
  for (const auto& row : rep.rows) {
    CAPTURE(row.k);
    CHECK(row.error >= 0.0);
    CHECK(row.bound + 1e-9 >= row.error);
  }
  CHECK(rep.min_margin >= -1e-9);
}

TEST_CASE("bounds runner: eps variant stays below one in delta and bounds the error") {
  BoundsInstance inst;
  inst.d = 15;
  inst.ambient = 6;
  inst.J = 2;
  inst.ratio = 4.0;
  inst.seed = 11;
  inst.eps_delta_fraction = 0.5;
  inst.nu_g = 0.05;
  inst.noise_w = 0.01;
  inst.iters = 10;
  const auto rep = run_bounds(inst);

  CHECK(rep.delta > 0.0);
  CHECK(rep.delta < 1.0);
  CHECK(rep.eps > 0.0);
  CHECK(rep.w > 0.0);
  CHECK(rep.min_margin >= -1e-9);

  const auto path = test::temp_path("bounds.csv");
  write_bounds_csv(rep, path);
  const auto lines = read_lines(path);
  REQUIRE(lines.size() == rep.rows.size() + 2);
  CHECK(lines[0].rfind("# oracle=", 0) == 0);
  CHECK(lines[1] == "k,error,bound,margin,nu_p_eff");
  std::remove(path.c_str());
}
