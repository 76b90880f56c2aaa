#include "ipg/projection.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "ipg/errors.hpp"
#include "ipg/kernels.hpp"

namespace ipg {

namespace {

double parse_field(const char*& p, const char* end, const std::string& text) {
  if (p < end && *p == ':') ++p;
  double v = 0.0;
  const auto res = std::from_chars(p, end, v);
  if (res.ec != std::errc() || (res.ptr < end && *res.ptr != ':'))
    throw BadOracle("cannot parse oracle spec '" + text + "'");
  p = res.ptr;
  return v;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

OracleSpec OracleSpec::parse(const std::string& text) {
  OracleSpec spec;
  const char* p = text.data();
  const char* end = p + text.size();
  const auto head = text.substr(0, text.find(':'));
  p += head.size();

  if (head == "exact") {
    spec.kind = OracleKind::brute;
  } else if (head == "tree") {
    spec.kind = OracleKind::tree_exact;
  } else if (head == "fp") {
    spec.kind = OracleKind::fp;
    spec.nu_p = parse_field(p, end, text);
    if (spec.nu_p < 0) throw BadOracle("fp: nu_p must be >= 0");
  } else if (head == "pfp") {
    spec.kind = OracleKind::pfp;
    spec.nu_p = parse_field(p, end, text);
    spec.r = parse_field(p, end, text);
    if (spec.nu_p <= 0) throw BadOracle("pfp: nu_p must be > 0");
    if (!(spec.r > 0 && spec.r < 1))
      throw BadOracle("pfp: decay must satisfy 0 < r < 1");
  } else if (head == "eps") {
    spec.kind = OracleKind::eps;
    spec.eps = parse_field(p, end, text);
    if (spec.eps < 0) throw BadOracle("eps: epsilon must be >= 0");
  } else if (head == "advline") {
    spec.kind = OracleKind::advline;
    spec.eps = parse_field(p, end, text);
    spec.gamma = parse_field(p, end, text);
    if (spec.eps < 0) throw BadOracle("advline: epsilon must be >= 0");
    if (!(spec.gamma >= 0 && spec.gamma < 1.5707963267948966))
      throw BadOracle("advline: gamma must lie in [0, pi/2)");
  } else {
    throw BadOracle("unknown oracle '" + text + "'");
  }
  if (p != end) throw BadOracle("trailing characters in oracle spec '" + text + "'");
  return spec;
}

std::string OracleSpec::label() const {
  switch (kind) {
    case OracleKind::brute: return "exact";
    case OracleKind::tree_exact: return "tree";
    case OracleKind::fp: return "fp:" + short_num(nu_p);
    case OracleKind::pfp: return "pfp:" + short_num(nu_p) + ":" + short_num(r);
    case OracleKind::eps: return "eps:" + short_num(eps);
    case OracleKind::advline:
      return "advline:" + short_num(eps) + ":" + short_num(gamma);
  }
  return "?";
}

double OracleSpec::nu_p_at(int k) const {
  switch (kind) {
    case OracleKind::fp: return nu_p;
    case OracleKind::pfp:
      if (k < 1)
        throw BadIteration("pfp oracle needs an iteration index k >= 1, got " +
                           std::to_string(k));
      return nu_p * std::pow(r, k);
    default: return 0.0;
  }
}

ProjectionResult project(const double* z, std::size_t dim, std::size_t blocks,
                         const PointCloud& cloud, const CoverTree* tree,
                         const OracleSpec& spec, int k) {
  if (cloud.dim != dim)
    throw DimensionMismatch("project: cloud dim " + std::to_string(cloud.dim) +
                            " != block dim " + std::to_string(dim));
  if (cloud.size() == 0) throw EmptyCloud("project");
  if (spec.kind == OracleKind::advline)
    throw BadOracle(
        "the adversarial-line oracle only applies to the 2-d converse "
        "construction (see run_converse)");
  if (spec.needs_tree() && tree == nullptr)
    throw MissingTree("oracle '" + spec.label() + "' requires a cover tree");
  const double nu_k = spec.nu_p_at(k);  // validates pfp's k

  ProjectionResult out;
  out.x.resize(dim * blocks);
  out.atoms.resize(blocks);
  out.block_dist.resize(blocks);

  for (std::size_t j = 0; j < blocks; ++j) {
    const double* zj = z + j * dim;
    NnResult nn;
    switch (spec.kind) {
      case OracleKind::brute: {
        nn.index = 0;
        nn.dist = std::sqrt(kernels::sq_dist(cloud.point(0), zj, dim));
        for (std::size_t i = 1; i < cloud.size(); ++i) {
          const double d = std::sqrt(kernels::sq_dist(cloud.point(i), zj, dim));
          if (d < nn.dist) {
            nn.dist = d;
            nn.index = static_cast<std::uint32_t>(i);
          }
        }
        nn.dist_evals = cloud.size();
        break;
      }
      case OracleKind::tree_exact:
        nn = tree->nn_exact(zj);
        break;
      case OracleKind::fp:
      case OracleKind::pfp:
        nn = tree->nn_fp(zj, nu_k);
        break;
      case OracleKind::eps:
        nn = tree->nn_eps(zj, spec.eps);
        break;
      case OracleKind::advline:
        break;  // unreachable
    }
    out.atoms[j] = nn.index;
    out.block_dist[j] = nn.dist;
    out.dist_evals += nn.dist_evals;
    const double* atom = cloud.point(nn.index);
    std::copy(atom, atom + dim, out.x.begin() + j * dim);
  }
  return out;
}

std::array<double, 2> adversarial_line_project(const std::array<double, 2>& z,
                                               double eps) {
  if (eps < 0) throw BadOracle("adversarial_line_project: eps must be >= 0");
  return {z[0] + eps * z[1], 0.0};
}

}  // namespace ipg
