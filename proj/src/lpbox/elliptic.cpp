#include "elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace lpb {

//------------------------------------------------------------------------------
// Coefficient
//------------------------------------------------------------------------------

Coefficient Coefficient::from_phys(const Phys& samples) {
  if (samples.comps != 1) fail("coefficient must be scalar");
  Coefficient c;
  c.phys = samples;
  Field f = lpb::from_phys(samples);
  c.bar = mean_mode(f).real();
  zero_mean(f);
  c.fluct = f;
  c.lo = *std::min_element(samples.v.begin(), samples.v.end());
  c.hi = *std::max_element(samples.v.begin(), samples.v.end());
  return c;
}

Coefficient Coefficient::from_field(const Field& full_field) {
  return from_phys(to_phys(full_field));
}

Field Coefficient::full() const {
  Field f = fluct;
  f.data(0)[0] = cd(bar, 0);
  return f;
}

Coefficient reciprocal(const Coefficient& a) {
  if (!(a.lo > 0)) fail("coefficient must be positive on the grid");
  Phys r = a.phys;
  for (double& x : r.v) x = 1.0 / x;
  Coefficient out = Coefficient::from_phys(r);
  // keep samples consistent with the truncated spectral content
  out.phys = to_phys(out.full());
  out.lo = *std::min_element(out.phys.v.begin(), out.phys.v.end());
  out.hi = *std::max_element(out.phys.v.begin(), out.phys.v.end());
  return out;
}

//------------------------------------------------------------------------------
// solve_pressure
//------------------------------------------------------------------------------

namespace {

// Leray gradient projection; zero mode dropped (gradients are mean-free)
Field project_q(const Field& u) { return project_gradient(u); }

// full-band product of the mean-free coefficient remainder with a vector field
Field fluct_times(const Coefficient& a, const Field& v) {
  Phys tilde = to_phys(a.fluct);
  return coeff_multiply(tilde, v, /*dealias_result=*/false);
}

double rel_residual(const Coefficient& a, const Field& grad_p, const Field& qf,
                    double qf_norm) {
  // div(a grad P) - div f = div(a grad P - Qf); measure the L2 norm of the
  // divergence directly
  Field flux = coeff_multiply(a.phys, grad_p, /*dealias_result=*/false);
  flux -= qf;
  Field defect = divergence(flux);
  return qf_norm > 0 ? l2(defect) / qf_norm : l2(defect);
}

EllipticResult pcg_fallback(const Coefficient& a, const Field& qf, double qf_div_norm,
                            const EllipticOptions& opt) {
  const Grid& g = qf.grid();
  // potential form: -div(a grad phi) = -div f, phi scalar mean-free;
  // preconditioner: inverse constant-coefficient operator (-abar Lap)^{-1}
  Field b = divergence(qf);
  b *= -1.0;
  auto apply_a = [&](const Field& phi) {
    Field flux = coeff_multiply(a.phys, gradient(phi), /*dealias_result=*/false);
    Field out = divergence(flux);
    out *= -1.0;
    return out;
  };
  auto precond = [&](const Field& r) {
    Field z = inv_laplacian(r);
    z *= -1.0 / a.bar;
    return z;
  };

  Field x(g, 1);
  Field r = b;
  Field z = precond(r);
  Field p = z;
  double rz = inner(r, z);
  EllipticResult res;
  res.method = "pcg";
  for (int it = 0; it < opt.max_iter; ++it) {
    Field ap = apply_a(p);
    double pap = inner(p, ap);
    if (!(pap > 0)) break;
    double alpha = rz / pap;
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    res.iterations = it + 1;
    if (l2(r) <= opt.tol * qf_div_norm) break;
    Field z2 = precond(r);
    double rz2 = inner(r, z2);
    double beta = rz2 / rz;
    rz = rz2;
    p = beta * p + z2;
  }
  res.grad_p = gradient(x);
  res.residual = rel_residual(a, res.grad_p, qf, qf_div_norm);
  return res;
}

} // namespace

EllipticResult solve_pressure(const Coefficient& a, const Field& f, EllipticOptions opt) {
  const Grid& g = f.grid();
  if (f.comps() != g.n) fail("pressure source must be a vector field");
  if (!(a.lo > 0)) fail("coefficient must be positive on the grid");

  Field qf = project_q(f);
  const double qf_div_norm = l2(divergence(qf));
  EllipticResult res;
  if (qf_div_norm == 0) { // nothing to solve
    res.grad_p = Field(g, g.n);
    res.method = "picard";
    return res;
  }

  double omega = 1.0;
  bool relaxed = false;
  Field grad_p = (1.0 / a.bar) * qf;
  double prev_update = 0;
  int total_iters = 0;

  for (int attempt = 0; attempt < 2; ++attempt) {
    res.method = relaxed ? "picard_relaxed" : "picard";
    double worst_contraction = 0;
    int bad_streak = 0;
    for (int it = 0; it < opt.max_iter; ++it) {
      ++total_iters;
      Field rhs = f - fluct_times(a, grad_p);
      Field next = project_q(rhs);
      next *= 1.0 / a.bar;
      if (omega != 1.0) next = (1.0 - omega) * grad_p + omega * next;

      Field delta = next - grad_p;
      double upd = l2(delta);
      grad_p = next;
      if (prev_update > 0) {
        double ratio = upd / prev_update;
        res.contraction = std::max(res.contraction, std::min(ratio, 10.0));
        worst_contraction = std::max(worst_contraction, ratio);
        bad_streak = ratio >= 1.0 ? bad_streak + 1 : 0;
      }
      prev_update = upd;

      double rr = rel_residual(a, grad_p, qf, qf_div_norm);
      if (rr <= opt.tol) {
        res.grad_p = grad_p;
        res.residual = rr;
        res.iterations = total_iters;
        return res;
      }
      if (bad_streak >= 3 || (it > 8 && worst_contraction > opt.divergence_guard)) break;
    }
    if (!relaxed && a.hi > 0) {
      // divergence detected: damp with the coercivity ratio and retry once
      relaxed = true;
      omega = a.lo / a.hi;
      grad_p = (1.0 / a.bar) * qf;
      prev_update = 0;
      continue;
    }
    break;
  }

  // Krylov fallback on the symmetric positive definite potential form
  EllipticResult kr = pcg_fallback(a, qf, qf_div_norm, opt);
  kr.iterations += total_iters;
  kr.contraction = res.contraction;
  if (kr.residual <= opt.tol) return kr;

  char buf[64];
  std::snprintf(buf, sizeof buf, " (relative residual %.3e)", kr.residual);
  fail(std::string(msg::elliptic_stagnation) + buf);
}

double pressure_l2_slack(const Coefficient& a, const Field& f, const Field& grad_p) {
  Field qf = project_q(f);
  double lhs = a.lo * l2(grad_p);
  double rhs = l2(qf);
  return rhs - lhs; // >= -eps expected
}

PressureBesovBound pressure_besov_bound(const Partition& pa, const Coefficient& a,
                                        const Field& f, const Field& grad_p, double s,
                                        double p, double q) {
  PressureBesovBound out;
  const int n = pa.grid().n;
  const double invp = 1.0 / p, invq = 1.0 / q;
  if (invp - invq <= 0.5) out.regime = "low_p";
  else out.regime = "high_p";
  out.admissible = q >= double(n) && (invp - invq <= 0.5 || invp + invq >= 0.5);

  Coefficient inv_a = reciprocal(a);
  double nq = double(n) / q;
  double a_osc = besov_norm(pa, a.fluct, nq, q, 1.0);
  double inva_osc = besov_norm(pa, inv_a.fluct, nq, q, 1.0);
  double factor = (1.0 / a.bar + inva_osc) * (1.0 + a_osc / a.lo);

  Field qf = project_q(f);
  out.lhs = besov_norm(pa, grad_p, s, p, 1.0);
  out.rhs = factor * besov_norm(pa, qf, s, p, 1.0);
  return out;
}

} // namespace lpb
