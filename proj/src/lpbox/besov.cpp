#include "besov.hpp"

#include <cmath>
#include <limits>

namespace lpb {

double inner(const Field& u, const Field& v) {
  if (u.grid() != v.grid() || u.comps() != v.comps()) fail("inner-product shape mismatch");
  double s = 0;
  const auto& a = u.raw();
  const auto& b = v.raw();
  for (size_t i = 0; i < a.size(); ++i)
    s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return std::pow(u.grid().L, u.grid().n) * s;
}

namespace {

double ell_r(const std::vector<double>& c, double r) {
  if (std::isinf(r)) {
    double m = 0;
    for (double x : c) m = std::max(m, x);
    return m;
  }
  double s = 0;
  for (double x : c) s += std::pow(x, r);
  return std::pow(s, 1.0 / r);
}

// all-shell L^2 profile in one pass over modes (Parseval per shell)
std::vector<double> shell_profile_l2(const Partition& pa, const Field& u) {
  const Grid& g = pa.grid();
  std::vector<double> acc(size_t(pa.shells()), 0.0);
  const std::int64_t m = g.points();
  for (int c = 0; c < u.comps(); ++c) {
    const cd* h = u.data(c);
    for (int j = pa.jmin(); j <= pa.jmax(); ++j) {
      const auto& mk = pa.mask(j);
      double s = 0;
      for (std::int64_t i = 0; i < m; ++i) s += mk[size_t(i)] * mk[size_t(i)] * std::norm(h[i]);
      acc[size_t(j - pa.jmin())] += s;
    }
  }
  const double vol = std::pow(g.L, g.n);
  for (double& x : acc) x = std::sqrt(vol * x);
  return acc;
}

} // namespace

std::vector<double> shell_profile(const Partition& pa, const Field& u, double p) {
  if (u.grid() != pa.grid()) fail("field grid mismatch");
  if (p == 2.0) return shell_profile_l2(pa, u);
  std::vector<double> out;
  out.reserve(size_t(pa.shells()));
  for (int j = pa.jmin(); j <= pa.jmax(); ++j) out.push_back(lp_norm(pa.block(u, j), p));
  return out;
}

double besov_norm(const Partition& pa, const Field& u, double s, double p, double r) {
  std::vector<double> c = shell_profile(pa, u, p);
  for (int j = pa.jmin(); j <= pa.jmax(); ++j)
    c[size_t(j - pa.jmin())] *= std::pow(2.0, double(j) * s);
  return ell_r(c, r);
}

bool besov_banach_gate(const Grid& g, double s, double p, double r) {
  double critical = g.n / p;
  return s < critical || (s == critical && r == 1.0);
}

double besov_low_norm(const Partition& pa, const Field& u, double s, double p, double r) {
  if (s >= 0) fail("low-frequency characterization requires s < 0");
  std::vector<double> c;
  for (int j = pa.jmin(); j <= pa.jmax() + 1; ++j)
    c.push_back(std::pow(2.0, double(j) * s) * lp_norm(pa.low(u, j), p));
  return ell_r(c, r);
}

double duality_pair(const Partition& pa, const Field& u, const Field& v) {
  const Grid& g = pa.grid();
  if (u.grid() != g || v.grid() != g || u.comps() != v.comps())
    fail("duality pairing shape mismatch");
  const std::int64_t m = g.points();
  // weight w(k) = sum_j phi_j (phi_{j-1} + phi_j + phi_{j+1}) collapses the pairing
  // to a single spectral sum
  std::vector<double> w(size_t(m), 0.0);
  for (int j = pa.jmin(); j <= pa.jmax(); ++j) {
    const auto& mj = pa.mask(j);
    for (int jj = j - 1; jj <= j + 1; ++jj) {
      if (jj < pa.jmin() || jj > pa.jmax()) continue;
      const auto& mjj = pa.mask(jj);
      for (std::int64_t i = 0; i < m; ++i) w[size_t(i)] += mj[size_t(i)] * mjj[size_t(i)];
    }
  }
  double s = 0;
  for (int c = 0; c < u.comps(); ++c) {
    const cd* a = u.data(c);
    const cd* b = v.data(c);
    for (std::int64_t i = 0; i < m; ++i)
      s += w[size_t(i)] * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
  }
  return std::pow(g.L, g.n) * s;
}

double interpolation_ratio(const Partition& pa, const Field& u, double s0, double s1,
                           double theta, double p) {
  double st = (1.0 - theta) * s0 + theta * s1;
  double nt = besov_norm(pa, u, st, p, 1.0);
  double n0 = besov_norm(pa, u, s0, p, 1.0);
  double n1 = besov_norm(pa, u, s1, p, 1.0);
  double rhs = std::pow(n0, 1.0 - theta) * std::pow(n1, theta);
  return rhs > 0 ? nt / rhs : 0.0;
}

double lq_time_aggregate(const std::vector<double>& values, double dt, double q) {
  if (values.empty()) return 0.0;
  if (std::isinf(q)) {
    double m = 0;
    for (double v : values) m = std::max(m, v);
    return m;
  }
  double s = 0;
  for (size_t i = 0; i + 1 < values.size(); ++i) s += std::pow(values[i], q) * dt;
  if (values.size() == 1) s = std::pow(values[0], q) * dt;
  return std::pow(s, 1.0 / q);
}

} // namespace lpb
