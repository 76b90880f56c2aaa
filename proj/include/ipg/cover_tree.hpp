#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ipg/point_cloud.hpp"

namespace ipg {

// Cover tree over a point cloud, in the compressed representation: one
// explicit node per point, recorded at the scale where it first appears.
// Scale 0 is the root; the cover radius at scale s is sigma * 2^-s, where
// sigma is the distance from the root point to the farthest point.  A node at
// scale s is logically present at every scale >= s (the implicit self-child
// chain); implicit nodes are never materialised and never re-counted in
// distance-evaluation totals.
//
// Invariants maintained (and re-checked by verify()):
//   nesting     - every parent sits at a strictly smaller scale than its
//                 children, so each cover set contains the previous one;
//   covering    - a node first appearing at scale s lies within
//                 sigma * 2^-(s-1) of its parent;
//   separation  - two nodes that are both present at scale s are more than
//                 sigma * 2^-s apart;
//   maxdist     - each node stores the exact maximum distance to the points
//                 of its explicit subtree, and that value stays below the
//                 sigma * 2^-(s-1) bound implied by covering.

struct CoverTreeNode {
  std::uint32_t point = 0;   // index into the cloud
  std::int32_t scale = 0;    // scale of first appearance
  std::int32_t parent = -1;  // node id, -1 for the root
  double maxdist = 0.0;      // max distance to any point in the explicit subtree
  std::vector<std::uint32_t> children;  // node ids, sorted by (scale, id)
};

struct NnResult {
  std::uint32_t index = 0;        // point index of the returned neighbour
  double dist = 0.0;              // distance to it
  std::uint64_t dist_evals = 0;   // distance evaluations spent by this query
};

struct InvariantCheck {
  std::string name;
  bool pass = true;
  std::string detail;  // first counterexample, empty when the check passes
};

struct InvariantReport {
  std::vector<InvariantCheck> checks;
  bool all_pass() const;
  std::string to_string() const;
};

struct TreeStats {
  std::size_t points = 0;
  int l_max = 0;
  double sigma = 0.0;
  double finest_resolution = 0.0;           // sigma * 2^-l_max
  double aspect_ratio = 0.0;                // max / min pairwise distance
  std::vector<std::size_t> nodes_per_scale; // explicit nodes, index = scale
  std::string to_string() const;
};

class CoverTree {
 public:
  // Builds by sequential insertion; point 0 becomes the root.  Throws
  // EmptyCloud / DuplicatePoints.
  static CoverTree build(const PointCloud& cloud);

  // Exact nearest neighbour; ties broken towards the lowest point index.
  NnResult nn_exact(const double* query) const;
  // Fixed-precision: result within d* + nu_p, via truncation of the descent
  // at the first scale whose worst-case residual sigma * 2^-(l-1) is <= nu_p.
  NnResult nn_fp(const double* query, double nu_p) const;
  // (1 + eps)-approximate: result within (1 + eps) * d*.  eps == 0 falls back
  // to nn_exact, tie-breaking included.
  NnResult nn_eps(const double* query, double eps) const;

  InvariantReport verify() const;
  TreeStats stats() const;  // includes the O(d^2) aspect-ratio scan

  void save(const std::string& path) const;
  // Loads a serialized tree and re-binds it to the cloud it was built from.
  // Node lines without the maxdist field get a conservative fallback bound
  // and maxdist_exact() reports false.
  static CoverTree load(const std::string& path, const PointCloud& cloud);

  const PointCloud& cloud() const { return *cloud_; }
  double sigma() const { return sigma_; }
  int l_max() const { return l_max_; }
  bool maxdist_exact() const { return maxdist_exact_; }
  const std::vector<CoverTreeNode>& nodes() const { return nodes_; }
  std::vector<CoverTreeNode>& mutable_nodes() { return nodes_; }

 private:
  const PointCloud* cloud_ = nullptr;
  double sigma_ = 0.0;
  int l_max_ = 0;
  bool maxdist_exact_ = true;

  std::vector<CoverTreeNode> nodes_;  // node id == position, 0 is the root

  enum class Mode { exact, fp, eps };
  NnResult search(const double* query, Mode mode, double param) const;
  void insert_point(std::uint32_t pi);
  void finalize();
  double node_dist(std::uint32_t node, const double* query) const;
};

// Max over min pairwise distance; O(d^2).  Throws EmptyCloud (fewer than two
// points) and DegenerateCloud (coincident points).
double aspect_ratio(const PointCloud& cloud);

}  // namespace ipg
