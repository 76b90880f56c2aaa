// Command-line front end: dataset generation, cover-tree maintenance and the
// experiment harness.  Every run is fully determined by --seed.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ipg/analysis.hpp"
#include "ipg/bench.hpp"
#include "ipg/cover_tree.hpp"
#include "ipg/errors.hpp"
#include "ipg/kernels.hpp"
#include "ipg/manifolds.hpp"
#include "ipg/point_cloud.hpp"
#include "ipg/projection.hpp"
#include "ipg/sensing.hpp"

namespace {

struct CommonOpts {
  std::string dataset = "s-curve";
  std::size_t d = 1000;
  std::size_t ambient = 50;
  std::size_t J = 20;
  std::vector<double> ratios;
  std::vector<std::string> oracles;
  int trials = 5;
  std::uint64_t seed = 1;
  double mu = 0.0;
  double mu_scale = 0.0;
  int max_iters = 30;
  double tol = 1e-8;
  std::string out;
};

void add_instance_flags(CLI::App* cmd, CommonOpts& o, bool with_oracles) {
  cmd->add_option("--dataset", o.dataset,
                  "s-curve | swiss-roll | oscillating-wave")
      ->capture_default_str();
  cmd->add_option("--d", o.d, "number of atoms")->capture_default_str();
  cmd->add_option("--ambient", o.ambient, "ambient dimension")
      ->capture_default_str();
  cmd->add_option("--J", o.J, "number of signal blocks")->capture_default_str();
  cmd->add_option("--trials", o.trials, "trials per cell")->capture_default_str();
  cmd->add_option("--seed", o.seed, "master seed")->capture_default_str();
  cmd->add_option("--mu", o.mu, "absolute step size (default 1/m)");
  cmd->add_option("--mu-scale", o.mu_scale,
                  "per-cell step size as a multiple of 1/m; ignored when "
                  "--mu is given");
  cmd->add_option("--max-iters", o.max_iters, "iteration cap")
      ->capture_default_str();
  cmd->add_option("--tol", o.tol, "objective-progress stop tolerance")
      ->capture_default_str();
  if (with_oracles)
    cmd->add_option("--oracle", o.oracles,
                    "projection oracle (repeatable): exact | tree | fp:NU | "
                    "pfp:NU:R | eps:E");
}

ipg::bench::Config to_config(const CommonOpts& o) {
  ipg::bench::Config cfg;
  cfg.kind = ipg::parse_manifold(o.dataset);
  cfg.d = o.d;
  cfg.ambient = o.ambient;
  cfg.J = o.J;
  if (!o.ratios.empty()) cfg.ratios = o.ratios;
  if (!o.oracles.empty()) {
    cfg.oracles.clear();
    for (const auto& s : o.oracles) cfg.oracles.push_back(ipg::OracleSpec::parse(s));
  }
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  cfg.mu = o.mu;
  cfg.mu_scale = o.mu_scale;
  cfg.max_iters = o.max_iters;
  cfg.tol = o.tol;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"point-cloud compressed sensing via inexact projected gradients"};
  app.require_subcommand(1);

  // ---- gen-data ----
  std::string gd_dataset = "s-curve", gd_out = "cloud.csv";
  std::size_t gd_d = 1000, gd_ambient = 50;
  std::uint64_t gd_seed = 1;
  auto* gen_data = app.add_subcommand("gen-data", "sample a manifold cloud");
  gen_data->add_option("--dataset", gd_dataset, "s-curve | swiss-roll | oscillating-wave")
      ->capture_default_str();
  gen_data->add_option("--d", gd_d, "number of atoms")->capture_default_str();
  gen_data->add_option("--ambient", gd_ambient, "ambient dimension")
      ->capture_default_str();
  gen_data->add_option("--seed", gd_seed, "seed")->capture_default_str();
  gen_data->add_option("--out", gd_out, "output CSV")->capture_default_str();

  // ---- build-tree / verify-tree / tree-stats ----
  std::string t_cloud, t_tree, t_out = "tree.txt";
  auto* build_tree = app.add_subcommand("build-tree", "build and save a cover tree");
  build_tree->add_option("--cloud", t_cloud, "cloud CSV")->required();
  build_tree->add_option("--out", t_out, "output tree file")->capture_default_str();

  std::string v_cloud, v_tree;
  auto* verify_tree =
      app.add_subcommand("verify-tree", "check all cover-tree invariants");
  verify_tree->add_option("--cloud", v_cloud, "cloud CSV")->required();
  verify_tree->add_option("--tree", v_tree, "tree file")->required();

  std::string s_cloud, s_tree;
  auto* tree_stats = app.add_subcommand("tree-stats", "print tree statistics");
  tree_stats->add_option("--cloud", s_cloud, "cloud CSV")->required();
  tree_stats->add_option("--tree", s_tree, "tree file (otherwise built fresh)");

  // ---- converge ----
  CommonOpts cv;
  cv.out = "convergence.csv";
  auto* converge = app.add_subcommand(
      "converge", "error/objective/cost traces for a set of oracles");
  add_instance_flags(converge, cv, true);
  converge->add_option("--ratio,--ratios", cv.ratios, "sampling ratio m/n");
  converge->add_option("--out", cv.out, "output CSV")->capture_default_str();

  // ---- phase ----
  CommonOpts ph;
  ph.out = "phase.csv";
  auto* phase = app.add_subcommand(
      "phase", "recovery phase transition over sampling ratios");
  add_instance_flags(phase, ph, true);
  phase->add_option("--ratios,--ratio", ph.ratios, "sampling ratios (repeatable)")
      ->delimiter(',');
  phase->add_option("--out", ph.out, "output CSV")->capture_default_str();

  // ---- cost ----
  CommonOpts co;
  co.out = "cost.csv";
  auto* cost = app.add_subcommand(
      "cost", "distance-evaluation cost per oracle and ratio");
  add_instance_flags(cost, co, true);
  cost->add_option("--ratios,--ratio", co.ratios, "sampling ratios (repeatable)")
      ->delimiter(',');
  cost->add_option("--out", co.out, "output CSV")->capture_default_str();

  // ---- converse ----
  std::vector<double> cg_gammas{0.3, 0.5235987755982988, 0.7853981633974483,
                                1.0471975511965976};
  std::vector<double> cg_epss{0.0, 0.25, 0.5, 0.9, 1.2, 2.5};
  int cg_iters = 50;
  std::string cg_out = "converse.csv";
  auto* converse = app.add_subcommand(
      "converse", "adversarial 2-d construction vs its closed form");
  converse->add_option("--gammas", cg_gammas, "sensing angles")->delimiter(',');
  converse->add_option("--epsilons", cg_epss, "oracle slopes")->delimiter(',');
  converse->add_option("--iters", cg_iters, "iterations")->capture_default_str();
  converse->add_option("--out", cg_out, "output CSV")->capture_default_str();

  // ---- bounds ----
  std::string b_dataset = "s-curve", b_oracle = "tree", b_out = "bounds.csv";
  std::size_t b_d = 60, b_ambient = 6, b_J = 1;
  double b_ratio = 2.0, b_nu_g = 0.0, b_noise = 0.0, b_eps_frac = -1.0;
  std::uint64_t b_seed = 1;
  int b_iters = 30;
  auto* bounds = app.add_subcommand(
      "bounds", "validate the error bound on a small enumerable instance");
  bounds->add_option("--dataset", b_dataset)->capture_default_str();
  bounds->add_option("--d", b_d)->capture_default_str();
  bounds->add_option("--ambient", b_ambient)->capture_default_str();
  bounds->add_option("--J", b_J)->capture_default_str();
  bounds->add_option("--ratio", b_ratio)->capture_default_str();
  bounds->add_option("--seed", b_seed)->capture_default_str();
  bounds->add_option("--oracle", b_oracle, "exact | tree | fp:NU | pfp:NU:R | eps:E")
      ->capture_default_str();
  bounds->add_option("--nu-g", b_nu_g, "gradient oracle noise")->capture_default_str();
  bounds->add_option("--noise", b_noise, "measurement noise norm")
      ->capture_default_str();
  bounds->add_option("--eps-delta-fraction", b_eps_frac,
                     "choose eps from this fraction of the admissible delta");
  bounds->add_option("--max-iters", b_iters)->capture_default_str();
  bounds->add_option("--out", b_out, "output CSV")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_data->parsed()) {
      const auto cloud = ipg::gen_manifold(ipg::parse_manifold(gd_dataset), gd_d,
                                           gd_ambient, gd_seed);
      ipg::save_cloud_csv(cloud, gd_out);
      std::printf("wrote %zu x %zu cloud to %s\n", cloud.size(), cloud.dim,
                  gd_out.c_str());
    } else if (build_tree->parsed()) {
      const auto cloud = ipg::load_cloud_csv(t_cloud);
      const auto tree = ipg::CoverTree::build(cloud);
      tree.save(t_out);
      std::printf("built tree over %zu points (sigma %.6g, depth %d) -> %s\n",
                  cloud.size(), tree.sigma(), tree.l_max(), t_out.c_str());
    } else if (verify_tree->parsed()) {
      const auto cloud = ipg::load_cloud_csv(v_cloud);
      const auto tree = ipg::CoverTree::load(v_tree, cloud);
      const auto rep = tree.verify();
      std::fputs(rep.to_string().c_str(), stdout);
      if (!rep.all_pass()) return 2;
    } else if (tree_stats->parsed()) {
      const auto cloud = ipg::load_cloud_csv(s_cloud);
      const auto tree = s_tree.empty() ? ipg::CoverTree::build(cloud)
                                       : ipg::CoverTree::load(s_tree, cloud);
      std::fputs(tree.stats().to_string().c_str(), stdout);
    } else if (converge->parsed()) {
      auto cfg = to_config(cv);
      if (cfg.ratios.size() != 1 && !cv.ratios.empty())
        cfg.ratios.resize(1);
      const auto rows = ipg::bench::run_convergence(cfg);
      ipg::bench::write_convergence_csv(rows, cv.out);
      std::printf("wrote %zu trace rows to %s\n", rows.size(), cv.out.c_str());
    } else if (phase->parsed()) {
      const auto cells = ipg::bench::run_phase(to_config(ph));
      ipg::bench::write_phase_csv(cells, ph.out);
      std::printf("wrote %zu phase cells to %s\n", cells.size(), ph.out.c_str());
    } else if (cost->parsed()) {
      const auto rows = ipg::bench::run_cost(to_config(co));
      ipg::bench::write_cost_csv(rows, co.out);
      std::printf("wrote %zu cost rows to %s\n", rows.size(), co.out.c_str());
    } else if (converse->parsed()) {
      const auto rows = ipg::bench::run_converse_grid(cg_gammas, cg_epss, cg_iters);
      ipg::bench::write_converse_csv(rows, cg_out);
      double max_dev = 0.0;
      for (const auto& r : rows) max_dev = std::max(max_dev, r.rel_dev);
      std::printf("wrote %zu rows to %s (max closed-form deviation %.3g)\n",
                  rows.size(), cg_out.c_str(), max_dev);
    } else if (bounds->parsed()) {
      ipg::bench::BoundsInstance inst;
      inst.kind = ipg::parse_manifold(b_dataset);
      inst.d = b_d;
      inst.ambient = b_ambient;
      inst.J = b_J;
      inst.ratio = b_ratio;
      inst.seed = b_seed;
      inst.oracle = ipg::OracleSpec::parse(b_oracle);
      inst.nu_g = b_nu_g;
      inst.noise_w = b_noise;
      inst.iters = b_iters;
      if (b_eps_frac >= 0.0) inst.eps_delta_fraction = b_eps_frac;
      const auto rep = ipg::bench::run_bounds(inst);
      ipg::bench::write_bounds_csv(rep, b_out);
      std::printf(
          "oracle %s: M=%.6g m_x=%.6g rho=%.6g; min bound margin %.6g -> %s\n",
          rep.oracle.c_str(), rep.constants.M, rep.constants.m_x, rep.rho,
          rep.min_margin, b_out.c_str());
      if (rep.min_margin < 0) return 2;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
