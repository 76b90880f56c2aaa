#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ipg/cover_tree.hpp"
#include "ipg/point_cloud.hpp"

namespace ipg {

// Projection oracles onto the product model C^J (every block an atom of the
// cloud).  The product projection decomposes per block, so each variant is a
// per-block nearest-atom rule:
//   brute      exact projection by exhaustive scan (d evaluations per block);
//   tree       exact projection through the cover tree (identical output);
//   fp:nu      fixed precision, each block within d* + nu;
//   pfp:nu:r   progressive fixed precision, slack nu * r^k at iteration k;
//   eps:e      (1+e)-approximate, each block within (1+e) * d*;
//   advline:e:g  the adversarial valid (1+e')-oracle of the 2-d converse
//                construction (only meaningful there; see
//                adversarial_line_project).
enum class OracleKind { brute, tree_exact, fp, pfp, eps, advline };

struct OracleSpec {
  OracleKind kind = OracleKind::brute;
  double nu_p = 0.0;   // fp / pfp initial slack
  double r = 0.0;      // pfp decay
  double eps = 0.0;    // eps / advline
  double gamma = 0.0;  // advline sensing angle

  // Accepted strings: "exact", "tree", "fp:NU", "pfp:NU:R", "eps:E",
  // "advline:E:GAMMA".  Throws BadOracle.
  static OracleSpec parse(const std::string& text);
  std::string label() const;

  // Additive slack at iteration k (pfp requires k >= 1).
  double nu_p_at(int k) const;
  bool needs_tree() const {
    return kind == OracleKind::tree_exact || kind == OracleKind::fp ||
           kind == OracleKind::pfp || kind == OracleKind::eps;
  }
};

struct ProjectionResult {
  std::vector<double> x;               // projected signal, dim * blocks
  std::vector<std::uint32_t> atoms;    // chosen atom per block
  std::vector<double> block_dist;      // achieved distance per block
  std::uint64_t dist_evals = 0;        // total distance evaluations
};

// Projects z (dim * blocks) onto the product model.  k is the IPG iteration
// index, used by the pfp schedule.  Throws DimensionMismatch, MissingTree,
// BadIteration (pfp with k < 1) and BadOracle (advline).
ProjectionResult project(const double* z, std::size_t dim, std::size_t blocks,
                         const PointCloud& cloud, const CoverTree* tree,
                         const OracleSpec& spec, int k = 0);

// The valid-but-adversarial oracle of the converse construction:
// P([z1, z2]) = [z1 + eps * z2, 0], a (1 + eps')-projection onto the line
// x2 = 0 with eps' = sqrt(1 + eps^2) - 1.
std::array<double, 2> adversarial_line_project(const std::array<double, 2>& z,
                                               double eps);

}  // namespace ipg
