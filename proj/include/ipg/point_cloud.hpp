#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ipg {

// Dense set of points in R^dim, row-major.  Point i is the index used
// everywhere else in the library (tree nodes, signal atoms, traces).
struct PointCloud {
  std::size_t dim = 0;
  std::vector<double> data;

  std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
  const double* point(std::size_t i) const { return data.data() + i * dim; }

  void add_point(const double* p) { data.insert(data.end(), p, p + dim); }
};

// CSV, one point per line, no header, values printed with 17 significant
// digits so a round trip reproduces the doubles exactly.
void save_cloud_csv(const PointCloud& cloud, const std::string& path);
PointCloud load_cloud_csv(const std::string& path);

}  // namespace ipg
