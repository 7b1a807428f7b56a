#pragma once
// shared test utilities
#include <cmath>
#include <functional>

#include "lpbox/field.hpp"

namespace testutil {

using namespace lpb;

// sample an analytic function on the grid: fn(x, y, z, component)
inline Phys sample(const Grid& g, int comps,
                   const std::function<double(double, double, double, int)>& fn) {
  Phys p(g, comps);
  const double dx = g.dx();
  for (int c = 0; c < comps; ++c) {
    double* out = p.data(c);
    std::int64_t idx = 0;
    if (g.n == 2) {
      for (int i = 0; i < g.N; ++i)
        for (int j = 0; j < g.N; ++j) out[idx++] = fn(i * dx, j * dx, 0.0, c);
    } else {
      for (int i = 0; i < g.N; ++i)
        for (int j = 0; j < g.N; ++j)
          for (int k = 0; k < g.N; ++k) out[idx++] = fn(i * dx, j * dx, k * dx, c);
    }
  }
  return p;
}

// zero all modes with |kappa| > rmax (kappa units), renormalize to unit L^2
inline Field radial_cap(Field u, double rmax) {
  const Grid& g = u.grid();
  for (int c = 0; c < u.comps(); ++c)
    for (std::int64_t i = 0; i < g.points(); ++i)
      if (g.mode_radius(i) > rmax) u.data(c)[i] = cd(0, 0);
  double nrm = l2(u);
  if (nrm > 0) u *= 1.0 / nrm;
  return u;
}

// the dilation x -> 2x realized on the half box: v lives on (n, N/2, L/2) and
// keeps the same integer-mode coefficients, so each physical wavenumber doubles
// and the volume shrinks by 2^n. Requires u band-limited to |k_axis| < N/4.
inline Field dilate_to_half_grid(const Field& u) {
  const Grid& g = u.grid();
  Grid h(g.n, g.N / 2, g.L / 2);
  Field v(h, u.comps());
  for (int c = 0; c < u.comps(); ++c) {
    for (std::int64_t i = 0; i < g.points(); ++i) {
      auto k = g.modes(i);
      std::int64_t target = 0;
      bool keep = true;
      for (int a = 0; a < g.n; ++a) {
        if (std::abs(k[a]) >= h.N / 2) { keep = false; break; }
        target = target * h.N + (k[a] >= 0 ? k[a] : k[a] + h.N);
      }
      if (keep) v.data(c)[target] = u.data(c)[i];
      else if (std::abs(u.data(c)[i]) > 0) fail("dilation input not band-limited");
    }
  }
  return v;
}

} // namespace testutil
