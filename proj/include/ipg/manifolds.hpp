#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ipg/point_cloud.hpp"

namespace ipg {

// Synthetic signal models: d points sampled from a 2-parameter surface in R^3
// and pushed into R^ambient by a seeded random orthonormal map, so intrinsic
// geometry (pairwise distances) is preserved.
//
// Parametrisations (t, s drawn uniformly per point):
//   s-curve:          (sin t, s, sign(t) * (cos t - 1)),  t in [-3pi/2, 3pi/2], s in [0, 2]
//   swiss-roll:       (t cos t, s, t sin t),              t in [1.5pi, 4.5pi], s in [0, 21]
//   oscillating-wave: (t, s, sin 4pi t),                  t, s in [0, 1]
enum class ManifoldKind { s_curve, swiss_roll, oscillating_wave };

ManifoldKind parse_manifold(const std::string& name);
const char* manifold_name(ManifoldKind kind);

// Throws AmbientTooSmall when ambient < 3.
PointCloud gen_manifold(ManifoldKind kind, std::size_t d, std::size_t ambient,
                        std::uint64_t seed);

// J atoms drawn with replacement; the signal is their column-stack
// vec(X) in R^{dim*J}.
struct SignalMatrix {
  std::size_t dim = 0;
  std::size_t blocks = 0;
  std::vector<std::uint32_t> atoms;  // ground-truth atom index per block
  std::vector<double> x;             // dim * blocks, block-major

  const double* block(std::size_t j) const { return x.data() + j * dim; }
};

SignalMatrix select_signal(const PointCloud& cloud, std::size_t J,
                           std::uint64_t seed);

}  // namespace ipg
