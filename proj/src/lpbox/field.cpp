#include "field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "fft.hpp"

namespace lpb {

namespace {
void check_same(const Field& a, const Field& b) {
  if (a.grid() != b.grid()) fail("field grid mismatch");
}
} // namespace

Field Field::component(int c) const {
  Field out(g_, 1);
  std::copy(data(c), data(c) + g_.points(), out.data(0));
  return out;
}

void Field::set_component(int c, const Field& s) {
  if (s.grid() != g_ || s.comps() != 1) fail("component shape mismatch");
  std::copy(s.data(0), s.data(0) + g_.points(), data(c));
}

Field& Field::operator+=(const Field& o) {
  check_same(*this, o);
  if (o.comps() != comps_) fail("field component mismatch");
  for (size_t i = 0; i < hat_.size(); ++i) hat_[i] += o.hat_[i];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  check_same(*this, o);
  if (o.comps() != comps_) fail("field component mismatch");
  for (size_t i = 0; i < hat_.size(); ++i) hat_[i] -= o.hat_[i];
  return *this;
}

Field& Field::operator*=(double a) {
  for (auto& z : hat_) z *= a;
  return *this;
}

Field operator+(Field a, const Field& b) { a += b; return a; }
Field operator-(Field a, const Field& b) { a -= b; return a; }
Field operator*(double a, Field f) { f *= a; return f; }

void axpy(double a, const Field& x, Field& y) {
  check_same(x, y);
  const cd* xs = x.raw().data();
  cd* ys = y.raw().data();
  for (size_t i = 0; i < y.raw().size(); ++i) ys[i] += a * xs[i];
}

//------------------------------------------------------------------------------
// transforms
//------------------------------------------------------------------------------

Field from_phys(const Phys& p) {
  Field f(p.g, p.comps);
  const std::int64_t m = p.g.points();
  for (int c = 0; c < p.comps; ++c) {
    cd* h = f.data(c);
    const double* s = p.data(c);
    for (std::int64_t i = 0; i < m; ++i) h[i] = cd(s[i], 0.0);
    fft::forward(p.g, h);
  }
  return f;
}

Phys to_phys(const Field& f) {
  Phys p(f.grid(), f.comps());
  const std::int64_t m = f.points();
  std::vector<cd> buf(m);
  for (int c = 0; c < f.comps(); ++c) {
    std::copy(f.data(c), f.data(c) + m, buf.data());
    fft::inverse(f.grid(), buf.data());
    double* s = p.data(c);
    for (std::int64_t i = 0; i < m; ++i) s[i] = buf[i].real();
  }
  return p;
}

double imag_residual(const Field& f) {
  const std::int64_t m = f.points();
  std::vector<cd> buf(m);
  double worst = 0.0, scale = 0.0;
  for (int c = 0; c < f.comps(); ++c) {
    std::copy(f.data(c), f.data(c) + m, buf.data());
    fft::inverse(f.grid(), buf.data());
    for (std::int64_t i = 0; i < m; ++i) {
      worst = std::max(worst, std::abs(buf[i].imag()));
      scale = std::max(scale, std::abs(buf[i]));
    }
  }
  return scale > 0 ? worst / scale : 0.0;
}

//------------------------------------------------------------------------------
// spectral calculus
//------------------------------------------------------------------------------

Field derivative(const Field& f, int axis) {
  const Grid& g = f.grid();
  if (axis < 0 || axis >= g.n) fail("derivative axis out of range");
  Field out(g, f.comps());
  const std::int64_t m = g.points();
  const double ks = g.kscale();
  for (int c = 0; c < f.comps(); ++c) {
    const cd* in = f.data(c);
    cd* o = out.data(c);
    for (std::int64_t i = 0; i < m; ++i) {
      int k = g.modes(i)[axis];
      if (k == -g.N / 2) { o[i] = cd(0, 0); continue; }
      o[i] = in[i] * cd(0.0, ks * k);
    }
  }
  return out;
}

Field gradient(const Field& f) {
  const Grid& g = f.grid();
  Field out(g, f.comps() * g.n);
  for (int c = 0; c < f.comps(); ++c)
    for (int a = 0; a < g.n; ++a)
      out.set_component(c * g.n + a, derivative(f.component(c), a));
  return out;
}

Field divergence(const Field& f) {
  const Grid& g = f.grid();
  if (f.comps() % g.n != 0) fail("divergence needs component count divisible by n");
  const int rows = f.comps() / g.n;
  Field out(g, rows);
  for (int r = 0; r < rows; ++r) {
    Field acc(g, 1);
    for (int a = 0; a < g.n; ++a) acc += derivative(f.component(r * g.n + a), a);
    out.set_component(r, acc);
  }
  return out;
}

Field laplacian(const Field& f) {
  const Grid& g = f.grid();
  Field out(g, f.comps());
  const std::int64_t m = g.points();
  const double ks2 = g.kscale() * g.kscale();
  for (int c = 0; c < f.comps(); ++c) {
    const cd* in = f.data(c);
    cd* o = out.data(c);
    for (std::int64_t i = 0; i < m; ++i) {
      auto k = g.modes(i);
      double k2 = 0;
      for (int a = 0; a < g.n; ++a) k2 += double(k[a]) * k[a];
      o[i] = -ks2 * k2 * in[i];
    }
  }
  return out;
}

void require_mean_free(const Field& f, double tol) {
  double scale = 0.0, worst = 0.0;
  const std::int64_t m = f.points();
  for (int c = 0; c < f.comps(); ++c) {
    worst = std::max(worst, std::abs(f.data(c)[0]));
    for (std::int64_t i = 0; i < m; ++i) scale = std::max(scale, std::abs(f.data(c)[i]));
  }
  if (worst > tol * std::max(1.0, scale)) fail(msg::undefined_zero_mode);
}

Field inv_laplacian(const Field& f) {
  require_mean_free(f);
  const Grid& g = f.grid();
  Field out(g, f.comps());
  const std::int64_t m = g.points();
  const double ks2 = g.kscale() * g.kscale();
  for (int c = 0; c < f.comps(); ++c) {
    const cd* in = f.data(c);
    cd* o = out.data(c);
    for (std::int64_t i = 0; i < m; ++i) {
      auto k = g.modes(i);
      double k2 = 0;
      for (int a = 0; a < g.n; ++a) k2 += double(k[a]) * k[a];
      o[i] = (k2 == 0) ? cd(0, 0) : in[i] / (-ks2 * k2);
    }
  }
  return out;
}

Field grad_div(const Field& f) {
  const Grid& g = f.grid();
  if (f.comps() != g.n) fail("grad_div expects a velocity stack");
  Field out(g, g.n);
  const std::int64_t m = g.points();
  const double ks = g.kscale();
  for (std::int64_t i = 0; i < m; ++i) {
    auto k = g.modes(i);
    cd div(0, 0);
    for (int a = 0; a < g.n; ++a) {
      if (k[a] == -g.N / 2) continue; // odd symbol: Nyquist dropped
      div += cd(0.0, ks * k[a]) * f.data(a)[i];
    }
    for (int a = 0; a < g.n; ++a) {
      if (k[a] == -g.N / 2) { out.data(a)[i] = cd(0, 0); continue; }
      out.data(a)[i] = cd(0.0, ks * k[a]) * div;
    }
  }
  return out;
}

// wavenumbers as the derivative operators see them: Nyquist columns drop out,
// keeping div/grad/Leray mutually consistent on full-band data
std::array<int, 3> effective_modes(const Grid& g, std::int64_t idx) {
  auto k = g.modes(idx);
  for (int a = 0; a < g.n; ++a)
    if (k[a] == -g.N / 2) k[a] = 0;
  return k;
}

void project_split(const Field& u, Field& grad_part, Field& sol_part) {
  const Grid& g = u.grid();
  if (u.comps() != g.n) fail("leray split expects a velocity stack");
  grad_part = Field(g, g.n);
  sol_part = Field(g, g.n);
  const std::int64_t m = g.points();
  for (std::int64_t i = 0; i < m; ++i) {
    auto k = effective_modes(g, i);
    double k2 = 0;
    for (int a = 0; a < g.n; ++a) k2 += double(k[a]) * k[a];
    if (k2 == 0) {
      // zero mode and pure-Nyquist corners carry no resolvable gradient
      // content: constants are divergence-free, so they ride with P
      for (int a = 0; a < g.n; ++a) sol_part.data(a)[i] = u.data(a)[i];
      continue;
    }
    cd dot(0, 0);
    for (int a = 0; a < g.n; ++a) dot += double(k[a]) * u.data(a)[i];
    for (int a = 0; a < g.n; ++a) {
      cd q = (double(k[a]) / k2) * dot;
      grad_part.data(a)[i] = q;
      sol_part.data(a)[i] = u.data(a)[i] - q;
    }
  }
}

Field project_gradient(const Field& u) {
  Field q, p;
  project_split(u, q, p);
  return q;
}

Field project_solenoidal(const Field& u) {
  Field q, p;
  project_split(u, q, p);
  return p;
}

void leray_split(const Field& u, Field& grad_part, Field& sol_part) {
  require_mean_free(u);
  project_split(u, grad_part, sol_part);
}

Field leray_q(const Field& u) {
  Field q, p;
  leray_split(u, q, p);
  return q;
}

Field leray_p(const Field& u) {
  Field q, p;
  leray_split(u, q, p);
  return p;
}

//------------------------------------------------------------------------------
// products and masks
//------------------------------------------------------------------------------

int dealias_cut(const Grid& g) { return g.N / 3; }

void dealias(Field& f) {
  const Grid& g = f.grid();
  const int cut = dealias_cut(g);
  const std::int64_t m = g.points();
  for (int c = 0; c < f.comps(); ++c) {
    cd* h = f.data(c);
    for (std::int64_t i = 0; i < m; ++i) {
      auto k = g.modes(i);
      for (int a = 0; a < g.n; ++a)
        if (std::abs(k[a]) > cut) { h[i] = cd(0, 0); break; }
    }
  }
}

Field multiply(const Field& a, const Field& b, bool dealias_result) {
  check_same(a, b);
  const Grid& g = a.grid();
  int ca = a.comps(), cb = b.comps();
  if (ca != cb && ca != 1 && cb != 1) fail("product component mismatch");
  const int co = std::max(ca, cb);
  const std::int64_t m = g.points();

  Phys pa = to_phys(a), pb = to_phys(b);
  Phys prod(g, co);
  for (int c = 0; c < co; ++c) {
    const double* xa = pa.data(ca == 1 ? 0 : c);
    const double* xb = pb.data(cb == 1 ? 0 : c);
    double* xo = prod.data(c);
    for (std::int64_t i = 0; i < m; ++i) xo[i] = xa[i] * xb[i];
  }
  Field out = from_phys(prod);
  if (dealias_result) dealias(out);
  return out;
}

Field coeff_multiply(const Phys& coeff, const Field& f, bool dealias_result) {
  if (coeff.g != f.grid()) fail("field grid mismatch");
  if (coeff.comps != 1 && coeff.comps != f.comps()) fail("coefficient component mismatch");
  const Grid& g = f.grid();
  const std::int64_t m = g.points();
  Phys pf = to_phys(f);
  for (int c = 0; c < f.comps(); ++c) {
    const double* a = coeff.data(coeff.comps == 1 ? 0 : c);
    double* x = pf.data(c);
    for (std::int64_t i = 0; i < m; ++i) x[i] *= a[i];
  }
  Field out = from_phys(pf);
  if (dealias_result) dealias(out);
  return out;
}

void apply_mask(Field& f, const std::vector<double>& mask) {
  const std::int64_t m = f.points();
  if (std::int64_t(mask.size()) != m) fail("mask length mismatch");
  for (int c = 0; c < f.comps(); ++c) {
    cd* h = f.data(c);
    for (std::int64_t i = 0; i < m; ++i) h[i] *= mask[i];
  }
}

Field masked(const Field& f, const std::vector<double>& mask) {
  Field out = f;
  apply_mask(out, mask);
  return out;
}

//------------------------------------------------------------------------------
// means and norms
//------------------------------------------------------------------------------

cd mean_mode(const Field& f, int c) { return f.data(c)[0]; }

void zero_mean(Field& f) {
  for (int c = 0; c < f.comps(); ++c) f.data(c)[0] = cd(0, 0);
}

double l2(const Field& f) {
  double s = 0;
  for (const cd& z : f.raw()) s += std::norm(z);
  return std::sqrt(std::pow(f.grid().L, f.grid().n) * s);
}

double lp_norm(const Phys& ph, double pexp) {
  const std::int64_t m = ph.g.points();
  if (std::isinf(pexp)) {
    double worst = 0;
    for (std::int64_t i = 0; i < m; ++i) {
      double mag2 = 0;
      for (int c = 0; c < ph.comps; ++c) mag2 += ph.data(c)[i] * ph.data(c)[i];
      worst = std::max(worst, mag2);
    }
    return std::sqrt(worst);
  }
  double acc = 0;
  for (std::int64_t i = 0; i < m; ++i) {
    double mag2 = 0;
    for (int c = 0; c < ph.comps; ++c) mag2 += ph.data(c)[i] * ph.data(c)[i];
    acc += std::pow(mag2, 0.5 * pexp);
  }
  return std::pow(acc * ph.g.cell_volume(), 1.0 / pexp);
}

double lp_norm(const Field& f, double p) {
  if (p < 1.0) fail("lp exponent must be >= 1");
  return lp_norm(to_phys(f), p);
}

double linf(const Field& f) { return lp_norm(f, std::numeric_limits<double>::infinity()); }

//------------------------------------------------------------------------------
// snapshot io: "BNSF" | version u32 | n u32 | N u32 | comps u32 | L f64 | payload
//------------------------------------------------------------------------------

void write_snapshot(const std::string& path, const Phys& p) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) fail("cannot open snapshot for writing: " + path);
  auto w32 = [&](std::uint32_t v) { std::fwrite(&v, 4, 1, fp); };
  std::fwrite("BNSF", 1, 4, fp);
  w32(1u);
  w32(std::uint32_t(p.g.n));
  w32(std::uint32_t(p.g.N));
  w32(std::uint32_t(p.comps));
  std::fwrite(&p.g.L, 8, 1, fp);
  size_t wrote = std::fwrite(p.v.data(), 8, p.v.size(), fp);
  std::fclose(fp);
  if (wrote != p.v.size()) fail("short write: " + path);
}

Phys read_snapshot(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) fail("cannot open snapshot: " + path);
  char magic[4];
  std::uint32_t ver = 0, n = 0, N = 0, comps = 0;
  double L = 0;
  bool ok = std::fread(magic, 1, 4, fp) == 4 && std::memcmp(magic, "BNSF", 4) == 0 &&
            std::fread(&ver, 4, 1, fp) == 1 && ver == 1 &&
            std::fread(&n, 4, 1, fp) == 1 && std::fread(&N, 4, 1, fp) == 1 &&
            std::fread(&comps, 4, 1, fp) == 1 && std::fread(&L, 8, 1, fp) == 1;
  if (!ok) { std::fclose(fp); fail("bad snapshot header: " + path); }
  Grid g(int(n), int(N), L);
  Phys p(g, int(comps));
  ok = std::fread(p.v.data(), 8, p.v.size(), fp) == p.v.size();
  std::fclose(fp);
  if (!ok) fail("truncated snapshot: " + path);
  return p;
}

} // namespace lpb
