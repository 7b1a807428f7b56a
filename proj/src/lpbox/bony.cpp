#include "bony.hpp"

#include <cmath>

namespace lpb {

namespace {

void check_scalar_pair(const Partition& pa, const Field& u, const Field& v) {
  if (u.grid() != pa.grid() || v.grid() != pa.grid()) fail("field grid mismatch");
  if (u.comps() != 1 || v.comps() != 1) fail("paraproduct calculus expects scalar fields");
}

// physical samples of every dyadic block of u (one inverse transform per shell)
std::vector<Phys> block_phys(const Partition& pa, const Field& u) {
  std::vector<Phys> out;
  out.reserve(size_t(pa.shells()));
  for (int j = pa.jmin(); j <= pa.jmax(); ++j) out.push_back(to_phys(pa.block(u, j)));
  return out;
}

// Leray projection with the constants-pass-through convention at the zero mode
// (Q kills constants); used for commutators where means must ride along.
Field leray_p_const(const Field& u) { return project_solenoidal(u); }

} // namespace

Field paraproduct(const Partition& pa, const Field& u, const Field& v) {
  check_scalar_pair(pa, u, v);
  const Grid& g = pa.grid();
  const std::int64_t m = g.points();

  std::vector<Phys> vb = block_phys(pa, v);
  // running low cutoff S_{j-1} u = sum of blocks j' <= j - 2, in physical space
  Phys slow(g, 1);
  Phys acc(g, 1);
  for (int j = pa.jmin(); j <= pa.jmax(); ++j) {
    if (j - 2 >= pa.jmin()) {
      Phys prev = to_phys(pa.block(u, j - 2));
      for (std::int64_t i = 0; i < m; ++i) slow.v[size_t(i)] += prev.v[size_t(i)];
    }
    const Phys& bj = vb[size_t(j - pa.jmin())];
    for (std::int64_t i = 0; i < m; ++i) acc.v[size_t(i)] += slow.v[size_t(i)] * bj.v[size_t(i)];
  }
  Field out = from_phys(acc);
  dealias(out);
  return out;
}

Field bony_remainder(const Partition& pa, const Field& u, const Field& v) {
  check_scalar_pair(pa, u, v);
  const Grid& g = pa.grid();
  const std::int64_t m = g.points();

  std::vector<Phys> ub = block_phys(pa, u);
  std::vector<Phys> vb = block_phys(pa, v);
  Phys acc(g, 1);
  for (int j = pa.jmin(); j <= pa.jmax(); ++j) {
    const Phys& aj = ub[size_t(j - pa.jmin())];
    for (int jj = j - 1; jj <= j + 1; ++jj) {
      if (jj < pa.jmin() || jj > pa.jmax()) continue;
      const Phys& bj = vb[size_t(jj - pa.jmin())];
      for (std::int64_t i = 0; i < m; ++i)
        acc.v[size_t(i)] += aj.v[size_t(i)] * bj.v[size_t(i)];
    }
  }
  Field out = from_phys(acc);
  dealias(out);
  return out;
}

double reconstruction_defect(const Partition& pa, const Field& u, const Field& v) {
  Field sum = paraproduct(pa, u, v);
  sum += paraproduct(pa, v, u);
  sum += bony_remainder(pa, u, v);
  Field prod = multiply(u, v);
  double denom = l2(prod);
  sum -= prod;
  return denom > 0 ? l2(sum) / denom : l2(sum);
}

Field block_commutator(const Partition& pa, const Field& a, const Field& b, int j) {
  Field ab = multiply(a, b);
  Field first = pa.block(ab, j);
  Field second = multiply(a, pa.block(b, j));
  first -= second;
  return first;
}

double block_commutator_ratio(const Partition& pa, const Field& a, const Field& b, int j,
                              double p, double q) {
  double r = 1.0 / (1.0 / p + 1.0 / q);
  if (r < 1.0) fail("commutator exponents must satisfy 1/r = 1/p + 1/q with r >= 1");
  Field comm = block_commutator(pa, a, b, j);
  double num = std::pow(2.0, double(j)) * lp_norm(comm, r);
  double den = lp_norm(gradient(a), p) * lp_norm(b, q);
  return den > 0 ? num / den : 0.0;
}

CommutatorProfile commutator_profile(const Partition& pa, const Field& a, const Field& b,
                                     double p, double q) {
  double r = 1.0 / (1.0 / p + 1.0 / q);
  if (r < 1.0) fail("commutator exponents must satisfy 1/r = 1/p + 1/q with r >= 1");
  CommutatorProfile out;
  out.normalizer = lp_norm(gradient(a), p) * lp_norm(b, q);
  for (int j = pa.jmin(); j <= pa.jmax(); ++j) {
    Field comm = block_commutator(pa, a, b, j);
    out.cj.push_back(std::pow(2.0, double(j)) * lp_norm(comm, r));
  }
  return out;
}

Field leray_commutator(const Field& a, const Field& w) {
  const Grid& g = w.grid();
  if (a.comps() != 1 || w.comps() != g.n) fail("leray commutator expects scalar a, vector w");
  Field aw = multiply(a, w);
  Field first = leray_p_const(aw);
  Field second = multiply(a, leray_p_const(w));
  first -= second;
  return first;
}

ProductEstimate product_estimate_check(const Partition& pa, const Field& f, const Field& g,
                                       double v1, double v2, double p, double r) {
  ProductEstimate out{};
  const double np = pa.grid().n / p;
  const double npp = pa.grid().n * (1.0 - 1.0 / p); // n / p'
  out.admissible = (v1 >= 0.0) && (v2 >= 0.0) && (v1 + v2 < np + std::min(np, npp));
  Field prod = multiply(f, g);
  const double inf = std::numeric_limits<double>::infinity();
  double num = besov_norm(pa, prod, v1 + v2 - np, p, r);
  double den = besov_norm(pa, f, v1, p, r) * besov_norm(pa, g, v2, p, inf) +
               besov_norm(pa, f, v1, p, inf) * besov_norm(pa, g, v2, p, r);
  out.measured = den > 0 ? num / den : 0.0;
  return out;
}

} // namespace lpb
