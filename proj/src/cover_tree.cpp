#include "ipg/cover_tree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "ipg/errors.hpp"
#include "ipg/kernels.hpp"

namespace ipg {

namespace {

// Cover radius at scale s.  ldexp keeps the power-of-two scaling exact, so
// build, verify and search all agree on radii to the last bit.
inline double radius_at(double sigma, int s) { return std::ldexp(sigma, -s); }

constexpr int kMaxInsertDepth = 5000;  // defensive; never reached for valid input

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

bool InvariantReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string InvariantReport::to_string() const {
  std::string out;
  for (const auto& c : checks) {
    out += c.pass ? "[ok]   " : "[FAIL] ";
    out += c.name;
    if (!c.detail.empty()) {
      out += ": ";
      out += c.detail;
    }
    out += '\n';
  }
  return out;
}

std::string TreeStats::to_string() const {
  std::ostringstream os;
  os << "points: " << points << '\n'
     << "depth (L_max): " << l_max << '\n'
     << "sigma: " << fmt(sigma) << '\n'
     << "finest covering resolution: " << fmt(finest_resolution) << '\n'
     << "aspect ratio: " << fmt(aspect_ratio) << '\n'
     << "nodes per scale:";
  for (std::size_t s = 0; s < nodes_per_scale.size(); ++s)
    os << ' ' << s << ':' << nodes_per_scale[s];
  os << '\n';
  return os.str();
}

double CoverTree::node_dist(std::uint32_t node, const double* query) const {
  return std::sqrt(
      kernels::sq_dist(cloud_->point(nodes_[node].point), query, cloud_->dim));
}

CoverTree CoverTree::build(const PointCloud& cloud) {
  if (cloud.size() == 0) throw EmptyCloud("cannot build a cover tree");

  // Coincident points would make the separation invariant unsatisfiable at
  // every scale; detect them up front by lexicographic sort.
  {
    std::vector<std::uint32_t> order(cloud.size());
    std::iota(order.begin(), order.end(), 0u);
    const std::size_t dim = cloud.dim;
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return std::lexicographical_compare(cloud.point(a), cloud.point(a) + dim,
                                          cloud.point(b), cloud.point(b) + dim);
    });
    for (std::size_t i = 1; i < order.size(); ++i) {
      const double* pa = cloud.point(order[i - 1]);
      const double* pb = cloud.point(order[i]);
      if (std::equal(pa, pa + dim, pb, pb + dim))
        throw DuplicatePoints("points " + std::to_string(order[i - 1]) + " and " +
                              std::to_string(order[i]) + " coincide");
    }
  }

  CoverTree t;
  t.cloud_ = &cloud;
  t.nodes_.push_back(CoverTreeNode{0, 0, -1, 0.0, {}});

  t.sigma_ = 0.0;
  for (std::size_t i = 1; i < cloud.size(); ++i)
    t.sigma_ = std::max(t.sigma_, t.node_dist(0, cloud.point(i)));

  for (std::size_t i = 1; i < cloud.size(); ++i)
    t.insert_point(static_cast<std::uint32_t>(i));

  t.finalize();
  return t;
}

void CoverTree::insert_point(std::uint32_t pi) {
  const double* p = cloud_->point(pi);

  struct Cand {
    std::uint32_t node;
    double dist;
  };
  std::vector<Cand> q = {{0u, node_dist(0, p)}};
  if (q[0].dist == 0.0)
    throw DuplicatePoints("point " + std::to_string(pi) +
                          " coincides with the root at working precision");

  std::int32_t best_parent = -1;
  std::int32_t best_scale = -1;

  for (int s = 0;; ++s) {
    if (s > kMaxInsertDepth)
      throw Error("cover tree insertion did not terminate (degenerate metric)");
    const double rad = radius_at(sigma_, s);

    // Record the deepest level whose cover set still covers p; the nearest
    // covering candidate becomes the parent if the descent stops below.
    double cover_best = std::numeric_limits<double>::infinity();
    for (const Cand& c : q) {
      if (c.dist <= rad && (c.dist < cover_best ||
                            (c.dist == cover_best &&
                             best_parent >= 0 &&
                             c.node < static_cast<std::uint32_t>(best_parent)))) {
        cover_best = c.dist;
        best_parent = static_cast<std::int32_t>(c.node);
        best_scale = s + 1;
      }
    }

    // Expand: children first appearing at scale s+1, added to the self-chain.
    const std::size_t old_size = q.size();
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t ci = 0; ci < old_size; ++ci) {
      dmin = std::min(dmin, q[ci].dist);
      for (std::uint32_t child : nodes_[q[ci].node].children) {
        if (nodes_[child].scale != s + 1) continue;
        const double d = node_dist(child, p);
        if (d == 0.0)
          throw DuplicatePoints("point " + std::to_string(pi) +
                                " coincides with point " +
                                std::to_string(nodes_[child].point) +
                                " at working precision");
        q.push_back({child, d});
        dmin = std::min(dmin, d);
      }
    }

    if (dmin > rad) break;  // nothing below this level can cover p

    std::erase_if(q, [rad](const Cand& c) { return c.dist > rad; });
    if (q.empty()) break;
  }

  // Covered at level 0 by construction of sigma, so a parent always exists.
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(CoverTreeNode{pi, best_scale, best_parent, 0.0, {}});
  nodes_[static_cast<std::size_t>(best_parent)].children.push_back(id);
}

void CoverTree::finalize() {
  l_max_ = 0;
  for (const auto& n : nodes_) l_max_ = std::max(l_max_, n.scale);

  for (auto& n : nodes_) {
    std::sort(n.children.begin(), n.children.end(),
              [this](std::uint32_t a, std::uint32_t b) {
                if (nodes_[a].scale != nodes_[b].scale)
                  return nodes_[a].scale < nodes_[b].scale;
                return a < b;
              });
  }

  // Exact maxdist: DFS per node over its explicit subtree.
  std::vector<std::uint32_t> stack;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const double* base = cloud_->point(nodes_[i].point);
    double md = 0.0;
    stack.assign(1, static_cast<std::uint32_t>(i));
    while (!stack.empty()) {
      const std::uint32_t cur = stack.back();
      stack.pop_back();
      if (cur != i)
        md = std::max(md, std::sqrt(kernels::sq_dist(
                              base, cloud_->point(nodes_[cur].point), cloud_->dim)));
      for (std::uint32_t c : nodes_[cur].children) stack.push_back(c);
    }
    nodes_[i].maxdist = md;
  }
  maxdist_exact_ = true;
}

NnResult CoverTree::search(const double* query, Mode mode, double param) const {
  struct Cand {
    std::uint32_t node;
    std::uint32_t cursor;  // next unvisited entry in children (sorted by scale)
    double dist;
  };

  NnResult res;
  res.dist = node_dist(0, query);
  res.index = nodes_[0].point;
  res.dist_evals = 1;

  std::vector<Cand> cands = {{0u, 0u, res.dist}};

  // Fixed-precision truncation level: the first scale l with
  // sigma * 2^-(l-1) <= nu_p, capped at the deepest scale (then the search
  // degenerates to the exact one).
  int l_trunc = std::numeric_limits<int>::max();
  if (mode == Mode::fp) {
    int l = 0;
    while (l < l_max_ && radius_at(sigma_, l - 1) > param) ++l;
    l_trunc = l;
  }

  for (int s = 0;; ++s) {
    if (mode == Mode::eps) {
      double low = std::numeric_limits<double>::infinity();
      for (const Cand& c : cands)
        low = std::min(low, c.dist - nodes_[c.node].maxdist);
      low = std::max(low, 0.0);
      if (res.dist <= (1.0 + param) * low) break;
    }
    if (s + 1 > l_trunc) break;  // fp truncation; never taken in other modes
    if (s + 1 > l_max_) break;

    // Expand the children that first appear at scale s+1.  The implicit
    // self-children carry their parent's distance and cost nothing.
    // push_back below may reallocate cands, so go through the index each time.
    const std::size_t old_size = cands.size();
    for (std::size_t ci = 0; ci < old_size; ++ci) {
      const auto& kids = nodes_[cands[ci].node].children;
      while (cands[ci].cursor < kids.size() &&
             nodes_[kids[cands[ci].cursor]].scale == s + 1) {
        const std::uint32_t child = kids[cands[ci].cursor];
        ++cands[ci].cursor;
        const double d = node_dist(child, query);
        ++res.dist_evals;
        const std::uint32_t pt = nodes_[child].point;
        if (d < res.dist || (d == res.dist && pt < res.index)) {
          res.dist = d;
          res.index = pt;
        }
        cands.push_back({child, 0u, d});
      }
    }

    // Drop candidates that cannot contain a better point (triangle bound on
    // the subtree) and candidates whose subtree is fully expanded.
    std::erase_if(cands, [&](const Cand& c) {
      if (c.dist > res.dist + nodes_[c.node].maxdist) return true;
      return c.cursor >= nodes_[c.node].children.size();
    });
    if (cands.empty()) break;
  }
  return res;
}

NnResult CoverTree::nn_exact(const double* query) const {
  return search(query, Mode::exact, 0.0);
}

NnResult CoverTree::nn_fp(const double* query, double nu_p) const {
  if (nu_p < 0.0) throw BadOracle("nu_p must be >= 0");
  return search(query, Mode::fp, nu_p);
}

NnResult CoverTree::nn_eps(const double* query, double eps) const {
  if (eps < 0.0) throw BadOracle("eps must be >= 0");
  if (eps == 0.0) return search(query, Mode::exact, 0.0);
  return search(query, Mode::eps, eps);
}

InvariantReport CoverTree::verify() const {
  InvariantReport rep;
  const std::size_t n = nodes_.size();

  // -- structure / nesting ---------------------------------------------------
  {
    InvariantCheck c{"structure", true, ""};
    const auto fail = [&](const std::string& why) {
      if (c.pass) {
        c.pass = false;
        c.detail = why;
      }
    };
    if (n == 0) fail("tree has no nodes");
    if (n != cloud_->size())
      fail("tree has " + std::to_string(n) + " nodes for " +
           std::to_string(cloud_->size()) + " points");
    std::vector<std::uint32_t> point_seen(cloud_->size(), 0);
    int roots = 0;
    for (std::size_t i = 0; i < n && c.pass; ++i) {
      const auto& nd = nodes_[i];
      if (nd.point >= cloud_->size()) {
        fail("node " + std::to_string(i) + ": point index out of range");
        break;
      }
      ++point_seen[nd.point];
      if (nd.parent < 0) {
        ++roots;
        if (i != 0) fail("node " + std::to_string(i) + " has no parent");
        if (nd.scale != 0) fail("root scale is " + std::to_string(nd.scale));
      } else {
        if (static_cast<std::size_t>(nd.parent) >= n) {
          fail("node " + std::to_string(i) + ": parent id out of range");
          break;
        }
        const auto& par = nodes_[static_cast<std::size_t>(nd.parent)];
        if (!(par.scale < nd.scale))
          fail("nesting: node " + std::to_string(i) + " at scale " +
               std::to_string(nd.scale) + " under parent at scale " +
               std::to_string(par.scale));
        if (std::count(par.children.begin(), par.children.end(),
                       static_cast<std::uint32_t>(i)) != 1)
          fail("node " + std::to_string(i) +
               " not listed exactly once among its parent's children");
      }
      if (nd.scale > l_max_)
        fail("node " + std::to_string(i) + " at scale " +
             std::to_string(nd.scale) + " exceeds L_max " +
             std::to_string(l_max_));
      for (std::uint32_t ch : nd.children)
        if (ch >= n || nodes_[ch].parent != static_cast<std::int32_t>(i)) {
          fail("child link " + std::to_string(i) + " -> " + std::to_string(ch) +
               " not mirrored by the child's parent field");
          break;
        }
    }
    if (c.pass && roots != 1) fail(std::to_string(roots) + " roots");
    if (c.pass)
      for (std::size_t p = 0; p < point_seen.size(); ++p)
        if (point_seen[p] != 1) {
          fail("point " + std::to_string(p) + " appears in " +
               std::to_string(point_seen[p]) + " nodes");
          break;
        }
    rep.checks.push_back(std::move(c));
  }

  // -- covering --------------------------------------------------------------
  {
    InvariantCheck c{"covering", true, ""};
    for (std::size_t i = 1; i < n; ++i) {
      const auto& nd = nodes_[i];
      if (nd.parent < 0) continue;
      const double d = std::sqrt(kernels::sq_dist(
          cloud_->point(nodes_[static_cast<std::size_t>(nd.parent)].point),
          cloud_->point(nd.point), cloud_->dim));
      const double bound = radius_at(sigma_, nd.scale - 1);
      if (!(d <= bound)) {
        c.pass = false;
        c.detail = "node " + std::to_string(i) + " (point " +
                   std::to_string(nd.point) + ", scale " +
                   std::to_string(nd.scale) + "): dist to parent " + fmt(d) +
                   " > " + fmt(bound);
        break;
      }
    }
    rep.checks.push_back(std::move(c));
  }

  // -- separation ------------------------------------------------------------
  {
    InvariantCheck c{"separation", true, ""};
    for (std::size_t i = 0; i < n && c.pass; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const int s = std::max(nodes_[i].scale, nodes_[j].scale);
        const double bound = radius_at(sigma_, s);
        const double d = std::sqrt(kernels::sq_dist(cloud_->point(nodes_[i].point),
                                                    cloud_->point(nodes_[j].point),
                                                    cloud_->dim));
        if (!(d > bound)) {
          c.pass = false;
          c.detail = "points " + std::to_string(nodes_[i].point) + " and " +
                     std::to_string(nodes_[j].point) +
                     " both present at scale " + std::to_string(s) + ": dist " +
                     fmt(d) + " <= " + fmt(bound);
          break;
        }
      }
    }
    rep.checks.push_back(std::move(c));
  }

  // -- maxdist exactness -----------------------------------------------------
  {
    InvariantCheck c{"maxdist-exact", true, ""};
    if (!maxdist_exact_) {
      c.detail = "skipped: tree loaded without stored maxdist values";
    } else {
      std::vector<std::uint32_t> stack;
      for (std::size_t i = 0; i < n; ++i) {
        const double* base = cloud_->point(nodes_[i].point);
        double md = 0.0;
        stack.assign(1, static_cast<std::uint32_t>(i));
        while (!stack.empty()) {
          const std::uint32_t cur = stack.back();
          stack.pop_back();
          if (cur != i)
            md = std::max(md,
                          std::sqrt(kernels::sq_dist(
                              base, cloud_->point(nodes_[cur].point), cloud_->dim)));
          for (std::uint32_t ch : nodes_[cur].children) stack.push_back(ch);
        }
        if (md != nodes_[i].maxdist) {
          c.pass = false;
          c.detail = "node " + std::to_string(i) + ": stored " +
                     fmt(nodes_[i].maxdist) + ", recomputed " + fmt(md);
          break;
        }
      }
    }
    rep.checks.push_back(std::move(c));
  }

  // -- maxdist bound ---------------------------------------------------------
  {
    InvariantCheck c{"maxdist-bound", true, ""};
    for (std::size_t i = 0; i < n; ++i) {
      const double bound = radius_at(sigma_, nodes_[i].scale - 1);
      if (nodes_[i].maxdist != 0.0 && !(nodes_[i].maxdist < bound)) {
        c.pass = false;
        c.detail = "node " + std::to_string(i) + " at scale " +
                   std::to_string(nodes_[i].scale) + ": maxdist " +
                   fmt(nodes_[i].maxdist) + " >= " + fmt(bound);
        break;
      }
    }
    rep.checks.push_back(std::move(c));
  }

  return rep;
}

TreeStats CoverTree::stats() const {
  TreeStats st;
  st.points = cloud_->size();
  st.l_max = l_max_;
  st.sigma = sigma_;
  st.finest_resolution = radius_at(sigma_, l_max_);
  st.aspect_ratio = cloud_->size() >= 2 ? ipg::aspect_ratio(*cloud_) : 0.0;
  st.nodes_per_scale.assign(static_cast<std::size_t>(l_max_) + 1, 0);
  for (const auto& nd : nodes_)
    ++st.nodes_per_scale[static_cast<std::size_t>(nd.scale)];
  return st;
}

void CoverTree::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << cloud_->size() << ',' << cloud_->dim << ',' << fmt(sigma_) << ','
    << l_max_ << '\n';
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& nd = nodes_[i];
    f << i << ',' << nd.point << ',' << nd.scale << ',' << nd.parent << ','
      << fmt(nd.maxdist) << '\n';
  }
  if (!f) throw IoError("write failed for '" + path + "'");
}

namespace {

std::vector<double> split_numbers(const std::string& line, std::size_t lineno,
                                  const std::string& path) {
  std::vector<double> out;
  const char* p = line.data();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    double v = 0.0;
    const auto res = std::from_chars(p, end, v);
    if (res.ec != std::errc())
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": malformed number");
    out.push_back(v);
    p = res.ptr;
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p < end) {
      if (*p != ',')
        throw ParseError(path + ": line " + std::to_string(lineno) +
                         ": expected ','");
      ++p;
    }
  }
  return out;
}

}  // namespace

CoverTree CoverTree::load(const std::string& path, const PointCloud& cloud) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for reading");

  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(f, line))
    throw ParseError(path + ": empty file (missing header)");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<double> hdr = split_numbers(line, lineno, path);
  if (hdr.size() != 4)
    throw ParseError(path + ": line 1: header must be d,dim,sigma,L_max");
  const auto d = static_cast<std::size_t>(hdr[0]);
  const auto dim = static_cast<std::size_t>(hdr[1]);
  if (d != cloud.size() || dim != cloud.dim)
    throw DimensionMismatch("tree header says " + std::to_string(d) + "x" +
                            std::to_string(dim) + ", cloud is " +
                            std::to_string(cloud.size()) + "x" +
                            std::to_string(cloud.dim));

  CoverTree t;
  t.cloud_ = &cloud;
  t.sigma_ = hdr[2];
  t.l_max_ = static_cast<int>(hdr[3]);
  t.nodes_.assign(d, CoverTreeNode{});
  std::vector<bool> seen(d, false);

  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<double> v = split_numbers(line, lineno, path);
    if (v.size() != 4 && v.size() != 5)
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": expected node_id,point,scale,parent[,maxdist]");
    const auto id = static_cast<std::size_t>(v[0]);
    if (v[0] < 0 || id >= d)
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": node id out of range");
    if (seen[id])
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": duplicate node id " + std::to_string(id));
    seen[id] = true;
    CoverTreeNode nd;
    if (v[1] < 0 || static_cast<std::size_t>(v[1]) >= d)
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": point index out of range");
    nd.point = static_cast<std::uint32_t>(v[1]);
    nd.scale = static_cast<std::int32_t>(v[2]);
    nd.parent = static_cast<std::int32_t>(v[3]);
    if (v.size() == 5) {
      nd.maxdist = v[4];
    } else {
      // Conservative chain bound over scales s..L_max-1; rounded up so it
      // stays an upper bound, and flags the tree as carrying inexact values.
      nd.maxdist = nd.scale >= t.l_max_
                       ? 0.0
                       : std::nextafter(radius_at(t.sigma_, nd.scale - 1) -
                                            radius_at(t.sigma_, t.l_max_ - 1),
                                        std::numeric_limits<double>::infinity());
      t.maxdist_exact_ = false;
    }
    t.nodes_[id] = std::move(nd);
  }
  for (std::size_t i = 0; i < d; ++i)
    if (!seen[i])
      throw ParseError(path + ": node " + std::to_string(i) + " missing");
  if (t.nodes_[0].parent != -1)
    throw ParseError(path + ": node 0 must be the root (parent -1)");

  for (std::size_t i = 0; i < d; ++i) {
    const auto par = t.nodes_[i].parent;
    if (par >= 0) {
      if (static_cast<std::size_t>(par) >= d)
        throw ParseError(path + ": node " + std::to_string(i) +
                         ": parent id out of range");
      t.nodes_[static_cast<std::size_t>(par)].children.push_back(
          static_cast<std::uint32_t>(i));
    } else if (i != 0) {
      throw ParseError(path + ": node " + std::to_string(i) +
                       " has no parent but is not node 0");
    }
  }
  for (auto& nd : t.nodes_) {
    std::sort(nd.children.begin(), nd.children.end(),
              [&t](std::uint32_t a, std::uint32_t b) {
                if (t.nodes_[a].scale != t.nodes_[b].scale)
                  return t.nodes_[a].scale < t.nodes_[b].scale;
                return a < b;
              });
  }
  return t;
}

double aspect_ratio(const PointCloud& cloud) {
  if (cloud.size() < 2)
    throw EmptyCloud("aspect ratio needs at least two points");
  double min_sq = std::numeric_limits<double>::infinity();
  double max_sq = 0.0;
  std::size_t bad_i = 0, bad_j = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t j = i + 1; j < cloud.size(); ++j) {
      const double sq =
          kernels::sq_dist(cloud.point(i), cloud.point(j), cloud.dim);
      if (sq < min_sq) {
        min_sq = sq;
        bad_i = i;
        bad_j = j;
      }
      max_sq = std::max(max_sq, sq);
    }
  }
  if (min_sq == 0.0)
    throw DegenerateCloud("points " + std::to_string(bad_i) + " and " +
                          std::to_string(bad_j) + " coincide");
  return std::sqrt(max_sq / min_sq);
}

}  // namespace ipg
