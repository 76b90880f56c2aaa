#include "ipg/sensing.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ipg/errors.hpp"
#include "ipg/kernels.hpp"
#include "ipg/rng.hpp"

namespace ipg {

void SamplingOperator::apply(const double* x, double* out) const {
  for (std::size_t i = 0; i < m; ++i) out[i] = kernels::dot(row(i), x, n);
}

void SamplingOperator::adjoint(const double* v, double* out) const {
  std::fill(out, out + n, 0.0);
  for (std::size_t i = 0; i < m; ++i) kernels::axpy(v[i], row(i), out, n);
}

std::vector<double> SamplingOperator::apply(const std::vector<double>& x) const {
  if (x.size() != n)
    throw DimensionMismatch("apply: x has " + std::to_string(x.size()) +
                            " entries, operator has n = " + std::to_string(n));
  std::vector<double> out(m);
  apply(x.data(), out.data());
  return out;
}

std::vector<double> SamplingOperator::adjoint(const std::vector<double>& v) const {
  if (v.size() != m)
    throw DimensionMismatch("adjoint: v has " + std::to_string(v.size()) +
                            " entries, operator has m = " + std::to_string(m));
  std::vector<double> out(n);
  adjoint(v.data(), out.data());
  return out;
}

SamplingOperator gen_gaussian(std::size_t m, std::size_t n, std::uint64_t seed) {
  if (m == 0 || n == 0)
    throw ZeroDimension("gen_gaussian: m and n must be positive (got " +
                        std::to_string(m) + "x" + std::to_string(n) + ")");
  SamplingOperator op;
  op.m = m;
  op.n = n;
  op.seed = seed;
  op.a.resize(m * n);
  Rng rng(seed);
  for (double& v : op.a) v = rng.normal();
  return op;
}

void save_operator_csv(const SamplingOperator& op, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << op.m << ',' << op.n << ',' << op.seed << '\n';
  char buf[40];
  for (std::size_t i = 0; i < op.m; ++i) {
    const double* r = op.row(i);
    for (std::size_t j = 0; j < op.n; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", r[j]);
      if (j) f << ',';
      f << buf;
    }
    f << '\n';
  }
  if (!f) throw IoError("write failed for '" + path + "'");
}

SamplingOperator load_operator_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(f, line))
    throw ParseError(path + ": empty file (missing m,n,seed header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  SamplingOperator op;
  {
    const char* p = line.data();
    const char* end = p + line.size();
    auto field = [&](auto& out) {
      const auto res = std::from_chars(p, end, out);
      if (res.ec != std::errc())
        throw ParseError(path + ": line 1: malformed m,n,seed header");
      p = res.ptr;
      if (p < end && *p == ',') ++p;
    };
    field(op.m);
    field(op.n);
    field(op.seed);
  }
  if (op.m == 0 || op.n == 0)
    throw ParseError(path + ": line 1: m and n must be positive");

  op.a.reserve(op.m * op.n);
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    std::size_t count = 0;
    while (p < end) {
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc())
        throw ParseError(path + ": line " + std::to_string(lineno) +
                         ": malformed number");
      op.a.push_back(v);
      ++count;
      p = res.ptr;
      if (p < end) {
        if (*p != ',')
          throw ParseError(path + ": line " + std::to_string(lineno) +
                           ": expected ','");
        ++p;
      }
    }
    if (count != op.n)
      throw ParseError(path + ": line " + std::to_string(lineno) + ": expected " +
                       std::to_string(op.n) + " fields, got " +
                       std::to_string(count));
  }
  if (op.a.size() != op.m * op.n)
    throw ParseError(path + ": expected " + std::to_string(op.m) +
                     " data rows, got " + std::to_string(op.a.size() / op.n));
  return op;
}

double GradientSpec::nu_g_at(int k) const {
  if (mode == GradientMode::exact) return 0.0;
  if (decay > 0.0 && decay < 1.0) return nu_g * std::pow(decay, k);
  return nu_g;
}

std::vector<double> gradient(const SamplingOperator& op,
                             const std::vector<double>& y,
                             const std::vector<double>& x,
                             const GradientSpec& spec, int k) {
  if (y.size() != op.m)
    throw DimensionMismatch("gradient: y has " + std::to_string(y.size()) +
                            " entries, operator has m = " + std::to_string(op.m));
  if (x.size() != op.n)
    throw DimensionMismatch("gradient: x has " + std::to_string(x.size()) +
                            " entries, operator has n = " + std::to_string(op.n));

  std::vector<double> r(op.m);
  op.apply(x.data(), r.data());
  for (std::size_t i = 0; i < op.m; ++i) r[i] -= y[i];
  std::vector<double> g(op.n);
  op.adjoint(r.data(), g.data());

  if (spec.mode == GradientMode::fp) {
    const double nu = spec.nu_g_at(k);
    if (nu > 0.0) {
      if (spec.perturb == PerturbMode::random) {
        std::vector<double> u(op.n);
        Rng rng(derive_seed(spec.seed, {0x67726164ULL /* "grad" */,
                                        static_cast<std::uint64_t>(k)}));
        double norm = 0.0;
        while (norm == 0.0) {
          for (double& v : u) v = rng.normal();
          norm = std::sqrt(kernels::nrm2_sq(u.data(), op.n));
        }
        kernels::axpy(nu / norm, u.data(), g.data(), op.n);
      } else {
        const double norm = std::sqrt(kernels::nrm2_sq(g.data(), op.n));
        if (norm > 0.0) {
          const double s = 1.0 + nu / norm;
          for (double& v : g) v *= s;
        }
        // at a stationary point there is no direction to inflate; the oracle
        // returns the exact (zero) gradient
      }
    }
  }
  return g;
}

}  // namespace ipg
