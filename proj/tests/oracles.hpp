// Shared test-side oracles: independent brute-force implementations that the
// tree-based code must reproduce, plus small helpers for building fixtures.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "ipg/kernels.hpp"
#include "ipg/point_cloud.hpp"
#include "ipg/rng.hpp"

namespace test {

struct BruteHit {
  std::uint32_t index = 0;
  double dist = 0.0;
};

// Exhaustive nearest neighbour.  Uses the same distance kernel and the same
// sqrt as the tree so exact-search comparisons can demand bitwise equality.
// Ties resolve to the lowest point index (strict < keeps the first minimum).
inline BruteHit brute_nn(const ipg::PointCloud& cloud, const double* q) {
  BruteHit best{0, std::sqrt(ipg::kernels::sq_dist(cloud.point(0), q, cloud.dim))};
  for (std::size_t i = 1; i < cloud.size(); ++i) {
    const double d = std::sqrt(ipg::kernels::sq_dist(cloud.point(i), q, cloud.dim));
    if (d < best.dist) best = {static_cast<std::uint32_t>(i), d};
  }
  return best;
}

inline ipg::PointCloud uniform_cloud(std::size_t d, std::size_t dim,
                                     std::uint64_t seed, double lo = -1.0,
                                     double hi = 1.0) {
  ipg::Rng rng(seed);
  ipg::PointCloud cloud;
  cloud.dim = dim;
  std::vector<double> p(dim);
  for (std::size_t i = 0; i < d; ++i) {
    for (auto& x : p) x = rng.uniform(lo, hi);
    cloud.add_point(p.data());
  }
  return cloud;
}

inline std::string temp_path(const std::string& stem) {
  return std::string("ipg_test_") + stem;
}

}  // namespace test
