#include "ipg/point_cloud.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ipg/errors.hpp"

namespace ipg {

namespace {

std::vector<double> parse_csv_doubles(const std::string& line, std::size_t lineno,
                                      const std::string& path) {
  std::vector<double> out;
  const char* p = line.data();
  const char* end = p + line.size();
  const auto skip_ws = [&] {
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
  };
  while (p < end) {
    skip_ws();
    double v = 0.0;
    const auto res = std::from_chars(p, end, v);
    if (res.ec != std::errc()) {
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": expected a number at '" +
                       std::string(p, std::min<std::size_t>(end - p, 12)) + "'");
    }
    out.push_back(v);
    p = res.ptr;
    skip_ws();
    if (p < end) {
      if (*p != ',')
        throw ParseError(path + ": line " + std::to_string(lineno) +
                         ": expected ',' after field " +
                         std::to_string(out.size()));
      ++p;
      if (p == end)
        throw ParseError(path + ": line " + std::to_string(lineno) +
                         ": trailing ','");
    }
  }
  return out;
}

}  // namespace

void save_cloud_csv(const PointCloud& cloud, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  char buf[40];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double* p = cloud.point(i);
    for (std::size_t j = 0; j < cloud.dim; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", p[j]);
      if (j) f << ',';
      f << buf;
    }
    f << '\n';
  }
  if (!f) throw IoError("write failed for '" + path + "'");
}

PointCloud load_cloud_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  PointCloud cloud;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> vals = parse_csv_doubles(line, lineno, path);
    if (cloud.dim == 0) {
      cloud.dim = vals.size();
    } else if (vals.size() != cloud.dim) {
      throw ParseError(path + ": line " + std::to_string(lineno) + ": expected " +
                       std::to_string(cloud.dim) + " fields, got " +
                       std::to_string(vals.size()));
    }
    cloud.data.insert(cloud.data.end(), vals.begin(), vals.end());
  }
  return cloud;
}

}  // namespace ipg
