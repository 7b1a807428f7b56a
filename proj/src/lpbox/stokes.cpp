//==========================================================================
// stokes.cpp
//==========================================================================
#include "lpbox/stokes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "lpbox/errors.hpp"

namespace lpb {

namespace {

template <class... A>
std::string fmts(const char* f, A... a) {
  char b[200];
  std::snprintf(b, sizeof b, f, a...);
  return std::string(b);
}

// |kappa|^2 as the derivative symbols see the mode (Nyquist columns -> 0)
double k2_eff(const Grid& g, std::int64_t i) {
  auto k = effective_modes(g, i);
  double s = 0;
  for (int a = 0; a < g.n; ++a) s += double(k[a]) * k[a];
  const double ks = g.kscale();
  return ks * ks * s;
}

// phi1 = (e^z - 1)/z, phi2 = (e^z - 1 - z)/z^2. The direct quotients lose
// half the digits to cancellation near 0, so switch to series below |z| = 1/2.
void etd_weights(double z, double& ez, double& phi1, double& phi2) {
  ez = std::exp(z);
  if (std::abs(z) < 0.5) {
    double t1 = 1.0, t2 = 0.5; // z^k/(k+1)!, z^k/(k+2)!
    phi1 = t1;
    phi2 = t2;
    for (int k = 1; k <= 18; ++k) {
      t1 *= z / double(k + 1);
      t2 *= z / double(k + 2);
      phi1 += t1;
      phi2 += t2;
    }
  } else {
    phi1 = (ez - 1.0) / z;
    phi2 = (ez - 1.0 - z) / (z * z);
  }
}

// single finite-difference node; second order at the ends when possible
Field diff_node(const std::vector<Field>& tr, int m, double dt, TimeDiff sc) {
  const int M = int(tr.size());
  if (M <= 1) {
    Field z = tr[0];
    z *= 0.0;
    return z;
  }
  auto slope = [&](int hi, int lo) {
    Field d = tr[size_t(hi)];
    d -= tr[size_t(lo)];
    d *= 1.0 / dt;
    return d;
  };
  if (sc == TimeDiff::backward) return m == 0 ? slope(1, 0) : slope(m, m - 1);
  if (M == 2) return slope(1, 0);
  if (m == 0) {
    Field d = tr[0];
    d *= -3.0;
    axpy(4.0, tr[1], d);
    axpy(-1.0, tr[2], d);
    d *= 1.0 / (2.0 * dt);
    return d;
  }
  if (m == M - 1) {
    Field d = tr[size_t(M - 1)];
    d *= 3.0;
    axpy(-4.0, tr[size_t(M - 2)], d);
    axpy(1.0, tr[size_t(M - 3)], d);
    d *= 1.0 / (2.0 * dt);
    return d;
  }
  Field d = tr[size_t(m + 1)];
  d -= tr[size_t(m - 1)];
  d *= 1.0 / (2.0 * dt);
  return d;
}

// per-shell L2 profiles in one spectral pass: weight 1 and (optionally)
// |kappa|^4, the second-gradient multiplier. Matches shell_profile at p = 2.
void shell_l2_pair(const Partition& pa, const Field& u, const std::vector<double>* w4,
                   std::vector<double>& plain, std::vector<double>& second) {
  const Grid& g = pa.grid();
  const std::int64_t n = g.points();
  std::vector<double> m2(size_t(n), 0.0);
  for (int c = 0; c < u.comps(); ++c) {
    const cd* h = u.data(c);
    for (std::int64_t i = 0; i < n; ++i) m2[size_t(i)] += std::norm(h[i]);
  }
  plain.assign(size_t(pa.shells()), 0.0);
  if (w4) second.assign(size_t(pa.shells()), 0.0);
  for (int j = pa.jmin(); j <= pa.jmax(); ++j) {
    const auto& mk = pa.mask(j);
    double sp = 0, s4 = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double q = mk[size_t(i)] * mk[size_t(i)] * m2[size_t(i)];
      sp += q;
      if (w4) s4 += q * (*w4)[size_t(i)];
    }
    plain[size_t(j - pa.jmin())] = sp;
    if (w4) second[size_t(j - pa.jmin())] = s4;
  }
  const double vol = std::pow(g.L, g.n);
  for (double& x : plain) x = std::sqrt(vol * x);
  if (w4)
    for (double& x : second) x = std::sqrt(vol * x);
}

double besov_from_profile(const Partition& pa, const std::vector<double>& c, double s,
                          double r) {
  double acc = 0, mx = 0;
  const bool inf = std::isinf(r);
  for (size_t i = 0; i < c.size(); ++i) {
    const double x = std::pow(2.0, double(pa.jmin() + int(i)) * s) * c[i];
    if (inf)
      mx = std::max(mx, x);
    else
      acc += std::pow(x, r);
  }
  return inf ? mx : std::pow(acc, 1.0 / r);
}

// per-node ingredients of the solution norm (and the solver traces)
struct NodeVals {
  std::vector<double> bu, bdt, bd2, bgp, bgp_low, ul2;
};

NodeVals node_values(const Partition& part, double p, const std::vector<Field>& u,
                     const std::vector<Field>& gp, double dt, TimeDiff scheme) {
  if (u.empty() || u.size() != gp.size()) fail("trajectory shape mismatch");
  const Grid& g = part.grid();
  const double s = double(g.n) / p - 1.0;
  const double s_low = double(g.n) / p - double(g.n) / 2.0;
  const int M = int(u.size());
  NodeVals nv;
  const bool fast = (p == 2.0);
  std::vector<double> w4;
  if (fast) {
    w4.resize(size_t(g.points()));
    for (std::int64_t i = 0; i < g.points(); ++i) {
      const double k2 = k2_eff(g, i);
      w4[size_t(i)] = k2 * k2;
    }
  }
  std::vector<double> c0, c1;
  for (int m = 0; m < M; ++m) {
    const Field du = diff_node(u, m, dt, scheme);
    if (fast) {
      shell_l2_pair(part, u[size_t(m)], &w4, c0, c1);
      nv.bu.push_back(besov_from_profile(part, c0, s, 1.0));
      nv.bd2.push_back(besov_from_profile(part, c1, s, 1.0));
      shell_l2_pair(part, du, nullptr, c0, c1);
      nv.bdt.push_back(besov_from_profile(part, c0, s, 1.0));
      shell_l2_pair(part, gp[size_t(m)], nullptr, c0, c1);
      nv.bgp.push_back(besov_from_profile(part, c0, s, 1.0));
      nv.bgp_low.push_back(besov_from_profile(part, c0, s_low, 2.0));
    } else {
      nv.bu.push_back(besov_norm(part, u[size_t(m)], s, p, 1.0));
      nv.bd2.push_back(besov_norm(part, gradient(gradient(u[size_t(m)])), s, p, 1.0));
      nv.bdt.push_back(besov_norm(part, du, s, p, 1.0));
      nv.bgp.push_back(besov_norm(part, gp[size_t(m)], s, p, 1.0));
      nv.bgp_low.push_back(besov_norm(part, gp[size_t(m)], s_low, p, 2.0));
    }
    nv.ul2.push_back(l2(u[size_t(m)]));
  }
  return nv;
}

SolutionNorm reduce_norm(const NodeVals& nv, double dt) {
  SolutionNorm sn;
  for (double x : nv.bu) sn.u_sup = std::max(sn.u_sup, x);
  sn.dtu_l1 = lq_time_aggregate(nv.bdt, dt, 1.0);
  sn.d2u_l1 = lq_time_aggregate(nv.bd2, dt, 1.0);
  sn.gp_l1 = lq_time_aggregate(nv.bgp, dt, 1.0);
  sn.gp_low_l1 = lq_time_aggregate(nv.bgp_low, dt, 1.0);
  return sn;
}

Field stack2(const Field& x, const Field& y) {
  if (x.grid() != y.grid()) fail("stacked fields must share a grid");
  Field out(x.grid(), x.comps() + y.comps());
  std::copy(x.raw().begin(), x.raw().end(), out.raw().begin());
  std::copy(y.raw().begin(), y.raw().end(),
            out.raw().begin() + std::ptrdiff_t(x.raw().size()));
  return out;
}

void check_stokes_data(const StokesData& d, double abar, double bbar) {
  const Grid& g = d.g;
  if (d.u0.empty() || d.u0.grid() != g || d.u0.comps() != g.n)
    fail("invalid input: initial velocity must have one component per axis");
  if (!(abar > 0.0) || !(bbar > 0.0))
    fail("invalid input: coefficient means must be positive");
  const int M = d.tg.nodes();
  if (!(d.tg.T > 0.0) || d.tg.steps < 1) fail("invalid input: empty time grid");
  auto check_traj = [&](const std::vector<Field>& tr, const char* what) {
    if (tr.empty()) return;
    if (int(tr.size()) != M)
      fail(fmts("invalid input: %s needs one field per time node", what));
    for (const Field& f : tr)
      if (f.grid() != g || f.comps() != g.n)
        fail(fmts("invalid input: %s shape mismatch", what));
  };
  check_traj(d.f, "forcing");
  check_traj(d.R, "constraint data");
  Field du0 = divergence(d.u0);
  double scale = 1.0;
  if (!d.R.empty()) {
    const Field dR0 = divergence(d.R[0]);
    scale = std::max(1.0, l2(dR0));
    du0 -= dR0;
  }
  const double defect = l2(du0);
  if (defect > 1e-10 * scale)
    fail(fmts("invalid input: div u0 must match div R(0) (defect %.3e)", defect));
}

//---- constant-coefficient core ---------------------------------------------
// Q-part is slaved to the constraint: Qu = QR and
//   abar grad P = Q f - Q dtR + 2 abar bbar grad div R + Q g
// with g the lagged correction forcing. P-part marches by the exact
// exponential two-step rule for dt(Pu) = abar bbar lap(Pu) + P(f + g):
//   Pu_{m+1} = e^z Pu_m + dt (phi1 - phi2) F_m + dt phi2 F_{m+1}
// (zero mode: trapezoid, so constants ride with the P-part).
struct ConstCore {
  Grid g;
  TimeGrid tg;
  double abar = 0, bbar = 0;
  bool has_f = false, has_R = false, has_base = false;
  std::vector<Field> QR, Pf, base_gp;
  Field Pu0;
  std::vector<double> ez, w0, w1;

  ConstCore(const StokesData& d, double abar_, double bbar_)
      : g(d.g), tg(d.tg), abar(abar_), bbar(bbar_) {
    const int M = tg.nodes();
    const double dt = tg.dt();
    const double nu = abar * bbar;
    const std::int64_t pts = g.points();
    ez.resize(size_t(pts));
    w0.resize(size_t(pts));
    w1.resize(size_t(pts));
    for (std::int64_t i = 0; i < pts; ++i) {
      double e, p1, p2;
      etd_weights(-nu * k2_eff(g, i) * dt, e, p1, p2);
      ez[size_t(i)] = e;
      w0[size_t(i)] = dt * (p1 - p2);
      w1[size_t(i)] = dt * p2;
    }
    has_f = !d.f.empty();
    has_R = !d.R.empty();
    has_base = has_f || has_R;
    if (has_f) Pf.resize(size_t(M));
    if (has_base) base_gp.resize(size_t(M));
    if (has_R) QR.resize(size_t(M));
    std::vector<Field> dtR;
    if (has_R) dtR = traj_derivative(d.R, dt);
    for (int m = 0; m < M; ++m) {
      Field bg(g, g.n);
      if (has_f) {
        Field qf, pf;
        project_split(d.f[size_t(m)], qf, pf);
        Pf[size_t(m)] = std::move(pf);
        axpy(1.0 / abar, qf, bg);
      }
      if (has_R) {
        axpy(-1.0 / abar, project_gradient(dtR[size_t(m)]), bg);
        axpy(2.0 * bbar, grad_div(d.R[size_t(m)]), bg);
        QR[size_t(m)] = project_gradient(d.R[size_t(m)]);
      }
      if (has_base) base_gp[size_t(m)] = std::move(bg);
    }
    Pu0 = project_solenoidal(d.u0);
  }

  void run(const std::vector<Field>* extra, std::vector<Field>& u,
           std::vector<Field>& gp) const {
    const int M = tg.nodes();
    const std::int64_t pts = g.points();
    u.assign(size_t(M), Field());
    gp.assign(size_t(M), Field());
    std::vector<Field> Pg;
    if (extra && int(extra->size()) != M) fail("forcing trajectory length mismatch");
    if (extra) Pg.resize(size_t(M));
    for (int m = 0; m < M; ++m) {
      gp[size_t(m)] = has_base ? base_gp[size_t(m)] : Field(g, g.n);
      if (extra) {
        Field q, pp;
        project_split((*extra)[size_t(m)], q, pp);
        axpy(1.0 / abar, q, gp[size_t(m)]);
        Pg[size_t(m)] = std::move(pp);
      }
    }
    Field Pu = Pu0;
    for (int m = 0; m < M; ++m) {
      u[size_t(m)] = Pu;
      if (has_R) u[size_t(m)] += QR[size_t(m)];
      if (m + 1 == M) break;
      for (int c = 0; c < g.n; ++c) {
        cd* pc = Pu.data(c);
        const cd* f0 = has_f ? Pf[size_t(m)].data(c) : nullptr;
        const cd* f1 = has_f ? Pf[size_t(m) + 1].data(c) : nullptr;
        const cd* x0 = extra ? Pg[size_t(m)].data(c) : nullptr;
        const cd* x1 = extra ? Pg[size_t(m) + 1].data(c) : nullptr;
        for (std::int64_t i = 0; i < pts; ++i) {
          const cd F0 = (f0 ? f0[i] : cd()) + (x0 ? x0[i] : cd());
          const cd F1 = (f1 ? f1[i] : cd()) + (x1 ? x1[i] : cd());
          pc[i] = ez[size_t(i)] * pc[i] + w0[size_t(i)] * F0 + w1[size_t(i)] * F1;
        }
      }
    }
  }
};

void fill_solution(StokesSolution& sol, const StokesData& data, const Partition& part,
                   const StokesOptions& o, std::vector<Field>&& u,
                   std::vector<Field>&& gp) {
  sol.g = data.g;
  sol.tg = data.tg;
  sol.p = o.p;
  const NodeVals nv = node_values(part, o.p, u, gp, data.tg.dt(), TimeDiff::centered);
  sol.norm = reduce_norm(nv, data.tg.dt());
  if (o.record_traces) {
    std::vector<double> joint(nv.bu.size(), 0.0);
    for (size_t i = 0; i < joint.size(); ++i)
      joint[i] = nv.bdt[i] + nv.bd2[i] + nv.bgp[i];
    sol.traces = {{"u_besov", nv.bu},
                  {"dtu_d2u_gp_besov", joint},
                  {"gp_low_besov", nv.bgp_low},
                  {"u_l2", nv.ul2}};
  }
  sol.u = std::move(u);
  sol.grad_p = std::move(gp);
}

struct AnchorStats {
  bool ok = false;
  int sweeps = 0;
  double contraction = 0;
};

// Picard sweep around the constant core at one continuation anchor:
//   g = (abar - a_th) grad P + a_th div(b_th D(u)) - abar bbar div D(u)
// lagged from the previous iterate; converged when the relative update in the
// solution norm drops under tol, abandoned on sustained growth.
AnchorStats picard_anchor(const ConstCore& core, const Partition& part,
                          const StokesOptions& o, const Phys& a_th, const Phys& da_th,
                          const Phys& b_th, std::vector<Field>& u,
                          std::vector<Field>& gp) {
  const int M = core.tg.nodes();
  const double dt = core.tg.dt();
  const double nu = core.abar * core.bbar;
  std::vector<Field> uu = u, gg = gp, u2, gp2, extra;
  extra.resize(size_t(M));
  AnchorStats st;
  double prev = -1.0;
  int growth = 0;
  for (int k = 1; k <= o.max_picard; ++k) {
    for (int m = 0; m < M; ++m) {
      const Field D = deformation(uu[size_t(m)]);
      Field t = coeff_multiply(a_th, divergence(coeff_multiply(b_th, D)));
      axpy(-nu, divergence(D), t);
      t += coeff_multiply(da_th, gg[size_t(m)]);
      extra[size_t(m)] = std::move(t);
    }
    core.run(&extra, u2, gp2);
    const double dist = solution_distance(part, o.p, u2, gp2, uu, gg, dt);
    const double scale =
        std::max(1.0, solution_norm(part, o.p, u2, gp2, dt).total());
    const double rel = dist / scale;
    uu.swap(u2);
    gg.swap(gp2);
    st.sweeps = k;
    if (prev > 0.0 && rel > o.tol) st.contraction = std::max(st.contraction, rel / prev);
    if (rel <= o.tol) {
      st.ok = true;
      break;
    }
    growth = (prev >= 0.0 && rel > prev) ? growth + 1 : 0;
    if (growth >= 2 && rel > 100.0 * o.tol) break;
    prev = rel;
  }
  if (st.ok) {
    u = std::move(uu);
    gp = std::move(gg);
  }
  return st;
}

} // namespace

//---- time grid / data -------------------------------------------------------

TimeGrid::TimeGrid(double T_, int steps_) : T(T_), steps(steps_) {
  if (!(T > 0.0) || steps < 1) fail("invalid input: time grid needs T > 0 and steps >= 1");
}

std::vector<Field> traj_derivative(const std::vector<Field>& traj, double dt,
                                   TimeDiff scheme) {
  if (traj.empty()) fail("trajectory derivative of an empty trajectory");
  if (!(dt > 0.0)) fail("invalid input: dt must be positive");
  std::vector<Field> out;
  out.reserve(traj.size());
  for (int m = 0; m < int(traj.size()); ++m)
    out.push_back(diff_node(traj, m, dt, scheme));
  return out;
}

StokesData::StokesData(const Grid& g_, const TimeGrid& tg_, Field u0_)
    : g(g_), tg(tg_), u0(std::move(u0_)), zero_(g_, g_.n) {}

const Field& StokesData::f_at(int m) const { return f.empty() ? zero_ : f.at(size_t(m)); }
const Field& StokesData::R_at(int m) const { return R.empty() ? zero_ : R.at(size_t(m)); }

Field deformation(const Field& u) {
  const Grid& g = u.grid();
  if (u.comps() != g.n) fail("deformation needs one component per axis");
  const Field gu = gradient(u);
  Field out(g, g.n * g.n);
  const std::int64_t pts = g.points();
  for (int c = 0; c < g.n; ++c)
    for (int a = 0; a < g.n; ++a) {
      cd* o = out.data(c * g.n + a);
      const cd* x = gu.data(c * g.n + a);
      const cd* y = gu.data(a * g.n + c);
      for (std::int64_t i = 0; i < pts; ++i) o[i] = x[i] + y[i];
    }
  return out;
}

//---- norms -------------------------------------------------------------------

double SolutionNorm::total() const {
  return u_sup + dtu_l1 + d2u_l1 + std::max(gp_l1, gp_low_l1);
}

SolutionNorm solution_norm(const Partition& part, double p, const std::vector<Field>& u,
                           const std::vector<Field>& grad_p, double dt,
                           TimeDiff scheme) {
  return reduce_norm(node_values(part, p, u, grad_p, dt, scheme), dt);
}

double solution_distance(const Partition& part, double p, const std::vector<Field>& u1,
                         const std::vector<Field>& gp1, const std::vector<Field>& u2,
                         const std::vector<Field>& gp2, double dt) {
  if (u1.size() != u2.size() || gp1.size() != gp2.size()) fail("trajectory shape mismatch");
  std::vector<Field> du(u1.size()), dg(gp1.size());
  for (size_t m = 0; m < u1.size(); ++m) {
    du[m] = u1[m] - u2[m];
    dg[m] = gp1[m] - gp2[m];
  }
  return solution_norm(part, p, du, dg, dt).total();
}

//---- solvers -------------------------------------------------------------------

StokesSolution constant_stokes_solve(const StokesData& data, double abar, double bbar,
                                     const StokesOptions& opts) {
  check_stokes_data(data, abar, bbar);
  const Partition part(data.g);
  const ConstCore core(data, abar, bbar);
  std::vector<Field> u, gp;
  core.run(nullptr, u, gp);
  StokesSolution sol;
  fill_solution(sol, data, part, opts, std::move(u), std::move(gp));
  sol.theta_path = {0.0};
  return sol;
}

StokesSolution perturbed_stokes_solve(const StokesData& data, double abar, double bbar,
                                      const Phys& c, const StokesOptions& opts) {
  if (c.comps != 1 || c.g != data.g)
    fail("invalid input: perturbation must be a scalar sample field on the same grid");
  double mc = 0;
  for (double x : c.v) mc += x;
  mc /= double(c.v.size());
  Phys ct = c; // mean folded into the constant part
  double cmin = std::numeric_limits<double>::infinity();
  for (double& x : ct.v) {
    x -= mc;
    cmin = std::min(cmin, x);
  }
  const double ab = abar + mc;
  check_stokes_data(data, ab, bbar);
  const Partition part(data.g);
  const double cnorm =
      besov_norm(part, from_phys(ct), double(data.g.n) / opts.p, opts.p, 1.0);
  if (!(ab + cmin > 0.0))
    throw Error(std::string(msg::perturbation_too_large) +
                fmts(" (coefficient norm %.3e, sign loss at min %.3e)", cnorm, ab + cmin));
  const ConstCore core(data, ab, bbar);
  const int M = data.tg.nodes();
  std::vector<Field> u, gp, u2, gp2, extra;
  extra.resize(size_t(M));
  core.run(nullptr, u, gp);
  double prev = -1.0, contraction = 0.0;
  int growth = 0, iters = 0;
  bool done = false;
  for (int k = 1; k <= opts.max_picard; ++k) {
    for (int m = 0; m < M; ++m) {
      // a = ab + ct everywhere: lag  g = ct bbar div D(u) - ct grad P
      Field t = coeff_multiply(ct, divergence(deformation(u[size_t(m)])));
      t *= bbar;
      axpy(-1.0, coeff_multiply(ct, gp[size_t(m)]), t);
      extra[size_t(m)] = std::move(t);
    }
    core.run(&extra, u2, gp2);
    const double dist = solution_distance(part, opts.p, u2, gp2, u, gp, data.tg.dt());
    const double scale =
        std::max(1.0, solution_norm(part, opts.p, u2, gp2, data.tg.dt()).total());
    const double rel = dist / scale;
    u.swap(u2);
    gp.swap(gp2);
    iters = k;
    if (prev > 0.0 && rel > opts.tol) contraction = std::max(contraction, rel / prev);
    if (rel <= opts.tol) {
      done = true;
      break;
    }
    growth = (prev >= 0.0 && rel > prev) ? growth + 1 : 0;
    if (growth >= 2 && rel > 100.0 * opts.tol)
      throw Error(std::string(msg::perturbation_too_large) +
                  fmts(" (coefficient norm %.3e, contraction %.3f)", cnorm,
                       rel / std::max(prev, 1e-300)));
    prev = rel;
  }
  if (!done)
    throw Error(std::string(msg::perturbation_too_large) +
                fmts(" (coefficient norm %.3e, no convergence in %d sweeps)", cnorm,
                     opts.max_picard));
  StokesSolution sol;
  fill_solution(sol, data, part, opts, std::move(u), std::move(gp));
  sol.contraction = contraction;
  sol.iterations = iters;
  sol.theta_path = {0.0};
  return sol;
}

StokesSolution variable_stokes_solve(const StokesData& data, const Coefficient& a,
                                     const Coefficient& b, const StokesOptions& opts) {
  const Grid& g = data.g;
  const double plo = (g.n == 3) ? 6.0 / 5.0 : 1.0;
  if (!(opts.p > plo && opts.p < 4.0))
    fail(fmts("invalid input: Lebesgue index %g outside the admissible range", opts.p));
  if (!(a.lo > 0.0) || !(b.lo > 0.0))
    fail("invalid input: coefficients must be uniformly positive");
  check_stokes_data(data, a.bar, b.bar);
  if (a.phys.g != g || b.phys.g != g) fail("invalid input: coefficient grid mismatch");
  const Partition part(g);
  const ConstCore core(data, a.bar, b.bar);
  std::vector<Field> u, gp;
  core.run(nullptr, u, gp);

  StokesSolution sol;
  sol.theta_path = {0.0};
  int total_sweeps = 0;
  double worst = 0.0;
  const std::int64_t pts = g.points();
  Phys a_th(g, 1), da_th(g, 1), b_th(g, 1);
  auto anchor = [&](double th) {
    for (std::int64_t i = 0; i < pts; ++i) {
      a_th.v[size_t(i)] = a.bar + th * (a.phys.v[size_t(i)] - a.bar);
      da_th.v[size_t(i)] = a.bar - a_th.v[size_t(i)];
      b_th.v[size_t(i)] = b.bar + th * (b.phys.v[size_t(i)] - b.bar);
    }
    const AnchorStats st = picard_anchor(core, part, opts, a_th, da_th, b_th, u, gp);
    total_sweeps += st.sweeps;
    if (st.ok) worst = std::max(worst, st.contraction);
    return st.ok;
  };

  double theta = 0.0;
  if (opts.direct && anchor(1.0)) {
    theta = 1.0;
    sol.theta_path.push_back(1.0);
  }
  double eps = opts.eps0;
  int succ = 0;
  while (theta < 1.0 - 1e-12) {
    const double th2 = std::min(1.0, theta + eps);
    if (anchor(th2)) {
      theta = th2;
      sol.theta_path.push_back(th2);
      if (++succ >= 2) {
        eps = std::min(2.0 * eps, 0.5);
        succ = 0;
      }
    } else {
      eps *= 0.5;
      succ = 0;
      if (eps < 1e-4)
        throw Error(std::string(msg::continuation_failure) +
                    fmts(" (stalled at theta %.4f, step %.2e)", theta, eps));
    }
  }
  fill_solution(sol, data, part, opts, std::move(u), std::move(gp));
  sol.iterations = total_sweeps;
  sol.contraction = worst;

  if (opts.with_split) {
    const SplitReport rep = splitting_diagnostics(part, opts.p, a, b,
                                                  opts.splitting_threshold);
    sol.split_m = rep.m_admissible;
    // route 1: flattened (constant) system; route 2: the correction forcing
    //   G = a div(b D(u1)) - abar bbar div D(u1) + (abar - a) grad P1
    // solved as an honest variable problem from zero data; by linearity the
    // pair recombines to the one-shot solution.
    std::vector<Field> u1, gp1;
    core.run(nullptr, u1, gp1);
    const int M = data.tg.nodes();
    const double nu = a.bar * b.bar;
    Phys da(g, 1);
    for (std::int64_t i = 0; i < pts; ++i)
      da.v[size_t(i)] = a.bar - a.phys.v[size_t(i)];
    StokesData d2(g, data.tg, Field(g, g.n));
    d2.f.resize(size_t(M));
    for (int m = 0; m < M; ++m) {
      const Field D = deformation(u1[size_t(m)]);
      Field t = coeff_multiply(a.phys, divergence(coeff_multiply(b.phys, D)));
      axpy(-nu, divergence(D), t);
      t += coeff_multiply(da, gp1[size_t(m)]);
      d2.f[size_t(m)] = std::move(t);
    }
    StokesOptions o2 = opts;
    o2.with_split = false;
    o2.record_traces = false;
    o2.direct = true;
    const StokesSolution s2 = variable_stokes_solve(d2, a, b, o2);
    std::vector<Field> us, gs;
    us.resize(size_t(M));
    gs.resize(size_t(M));
    for (int m = 0; m < M; ++m) {
      us[size_t(m)] = u1[size_t(m)] + s2.u[size_t(m)];
      gs[size_t(m)] = gp1[size_t(m)] + s2.grad_p[size_t(m)];
    }
    const double d =
        solution_distance(part, opts.p, sol.u, sol.grad_p, us, gs, data.tg.dt());
    sol.split_closure = d / std::max(sol.norm.total(), 1e-300);
    sol.u1 = std::move(u1);
    sol.u2 = s2.u;
    sol.has_split = true;
  }
  return sol;
}

//---- splitting diagnostics -----------------------------------------------------

SplitTerms splitting_terms(const Partition& part, double p, const Coefficient& a,
                           const Coefficient& b, int m) {
  const Grid& g = part.grid();
  const double np = double(g.n) / p;
  const int mc = std::clamp(m, part.jmin(), part.jmax() + 1);
  auto lowm = [&](const Field& f) { return part.low(f, mc); };
  auto him = [&](const Field& f) {
    Field h = f;
    h -= part.low(f, mc);
    return h;
  };

  SplitTerms t;
  t.m = m;
  const Coefficient ra = reciprocal(a);
  const double rnorm = besov_norm(part, ra.fluct, np, p, 1.0);
  const double anorm = besov_norm(part, a.fluct, np, p, 1.0);
  const double bnorm = besov_norm(part, b.fluct, np, p, 1.0);
  const double inv_floor = 1.0 / a.bar + rnorm;
  const double ctilde = inv_floor * (1.0 + anorm / a.lo);

  t.t1 = besov_norm(part, him(a.fluct), np, p, 1.0) * inv_floor;

  const Field grad_a = gradient(a.fluct);
  const double sga = besov_norm(part, lowm(grad_a), np - 0.5, p, 2.0);
  t.t2 = ctilde * (1.0 + sga);

  const Field agb = coeff_multiply(a.phys, gradient(b.fluct));
  const Field bga = coeff_multiply(b.phys, gradient(a.fluct));
  const Field pair = stack2(agb, bga);
  t.t3 = besov_norm(part, lowm(pair), np - 0.5, p, 1.0) +
         ctilde * (1.0 + sga) * (a.bar + anorm) * (b.bar + bnorm);

  Phys abp(g, 1);
  double mab = 0;
  for (size_t i = 0; i < abp.v.size(); ++i) {
    abp.v[i] = a.phys.v[i] * b.phys.v[i];
    mab += abp.v[i];
  }
  mab /= double(abp.v.size());
  const Field fab = from_phys(abp); // shells never see the mean

  t.t4 = besov_norm(part, him(pair), np - 1.0, p, 1.0) +
         besov_norm(part, him(fab), np, p, 1.0);
  t.tv = besov_norm(part, him(bga), np - 1.0, p, 1.0) +
         besov_norm(part, him(agb), np - 1.0, p, 1.0) +
         besov_norm(part, him(fab), np - 1.0, p, 1.0);

  // pointwise floor of the dissipation coefficient after flattening; the
  // constant part of ab rides with the low frequencies
  const Phys lowab = to_phys(lowm(fab));
  double mn = std::numeric_limits<double>::infinity();
  for (double x : lowab.v) mn = std::min(mn, mab + x);
  t.coercivity = mn;
  return t;
}

SplitReport splitting_diagnostics(const Partition& part, double p, const Coefficient& a,
                                  const Coefficient& b, double threshold) {
  SplitReport rep;
  rep.threshold = threshold;
  bool found = false;
  for (int m = part.jmin(); m <= part.jmax(); ++m) {
    const SplitTerms t = splitting_terms(part, p, a, b, m);
    rep.terms.push_back(t);
    if (!found && t.t1 <= threshold && t.t4 <= threshold) {
      found = true;
      rep.m_admissible = m;
    }
  }
  if (!found)
    throw Error(std::string(msg::splitting_unreachable) +
                fmts(" (at m %d still t1 %.3e, t4 %.3e)", part.jmax(),
                     rep.terms.back().t1, rep.terms.back().t4));
  return rep;
}

//---- measured constants ----------------------------------------------------------

GrowthConstant apriori_estimate_check(const Partition& part, const StokesSolution& sol,
                                      const StokesData& data) {
  const double p = sol.p;
  const double dt = data.tg.dt();
  const double s = double(data.g.n) / p - 1.0;
  const NodeVals nv = node_values(part, p, sol.u, sol.grad_p, dt, TimeDiff::centered);
  const int M = data.tg.nodes();
  const double bu0 = besov_norm(part, data.u0, s, p, 1.0);
  std::vector<Field> dtR;
  if (!data.R.empty()) dtR = traj_derivative(data.R, dt);
  auto data_at = [&](int m) {
    double v = 0;
    if (!data.f.empty()) v += besov_norm(part, data.f[size_t(m)], s, p, 1.0);
    if (!data.R.empty()) {
      v += besov_norm(part, dtR[size_t(m)], s, p, 1.0);
      v += besov_norm(part, grad_div(data.R[size_t(m)]), s, p, 1.0);
    }
    return v;
  };
  GrowthConstant out;
  double sup = 0, lint = 0, dint = 0;
  for (int m = 0; m < M; ++m) {
    if (m > 0) {
      lint += (nv.bdt[size_t(m - 1)] + nv.bd2[size_t(m - 1)] + nv.bgp[size_t(m - 1)]) * dt;
      dint += data_at(m - 1) * dt;
    }
    sup = std::max(sup, nv.bu[size_t(m)]);
    const double L = sup + lint;
    const double D = bu0 + dint;
    if (D > 0.0) {
      out.defined = true;
      if (L > 0.0)
        out.C = std::max(out.C, std::max(0.0, std::log(L / D)) / (data.tg.node(m) + 1.0));
    }
  }
  return out;
}

GrowthConstant constant_estimate_constant(const Partition& part,
                                          const StokesSolution& sol,
                                          const StokesData& data, double abar,
                                          double bbar) {
  const double p = sol.p;
  const double dt = data.tg.dt();
  const double s = double(data.g.n) / p - 1.0;
  const NodeVals nv = node_values(part, p, sol.u, sol.grad_p, dt, TimeDiff::centered);
  const int M = data.tg.nodes();
  const double bu0 = besov_norm(part, data.u0, s, p, 1.0);
  std::vector<Field> dtR;
  if (!data.R.empty()) dtR = traj_derivative(data.R, dt);
  auto data_at = [&](int m) {
    double v = 0;
    if (!data.f.empty()) v += besov_norm(part, data.f[size_t(m)], s, p, 1.0);
    if (!data.R.empty()) {
      v += besov_norm(part, dtR[size_t(m)], s, p, 1.0);
      v += abar * bbar * besov_norm(part, grad_div(data.R[size_t(m)]), s, p, 1.0);
    }
    return v;
  };
  GrowthConstant out;
  double sup = 0, lint = 0, dint = 0;
  for (int m = 0; m < M; ++m) {
    if (m > 0) {
      lint += (nv.bdt[size_t(m - 1)] + nv.bd2[size_t(m - 1)] + nv.bgp[size_t(m - 1)]) * dt;
      dint += data_at(m - 1) * dt;
    }
    sup = std::max(sup, nv.bu[size_t(m)]);
    const double L = sup + lint;
    const double D = bu0 + dint;
    if (D > 0.0) {
      out.defined = true;
      out.C = std::max(out.C, L / D);
    }
  }
  return out;
}

std::vector<double> stokes_residual(const StokesData& data, const Coefficient& a,
                                    const Coefficient& b, const StokesSolution& sol) {
  const int M = data.tg.nodes();
  const double dt = data.tg.dt();
  if (int(sol.u.size()) != M) fail("solution/data node count mismatch");
  std::vector<double> out;
  for (int m = 1; m + 1 < M; ++m) {
    Field r = sol.u[size_t(m) + 1];
    r -= sol.u[size_t(m) - 1];
    r *= 1.0 / (2.0 * dt);
    const Field D = deformation(sol.u[size_t(m)]);
    axpy(-1.0, coeff_multiply(a.phys, divergence(coeff_multiply(b.phys, D))), r);
    r += coeff_multiply(a.phys, sol.grad_p[size_t(m)]);
    if (!data.f.empty()) r -= data.f[size_t(m)];
    out.push_back(l2(r));
  }
  return out;
}

double pressure_gain_margin(const Partition& part, double p, const Coefficient& a,
                            const Field& grad_p) {
  const Grid& g = part.grid();
  const double s = double(g.n) / p - 1.0;
  Phys fl(g, 1);
  double amax = 0;
  for (size_t i = 0; i < fl.v.size(); ++i) {
    fl.v[i] = a.phys.v[i] - a.bar;
    amax = std::max(amax, std::abs(fl.v[i]));
  }
  const double measured =
      besov_norm(part, project_solenoidal(coeff_multiply(fl, grad_p)), s, p, 1.0);
  const double bound = amax * besov_norm(part, grad_p, s, p, 1.0);
  if (measured <= 0.0) return std::numeric_limits<double>::infinity();
  return bound / measured;
}

} // namespace lpb
