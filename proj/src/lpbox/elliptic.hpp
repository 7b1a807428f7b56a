#pragma once
#include <string>

#include "besov.hpp"

namespace lpb {

//==============================================================================
// Scalar coefficient field a = abar + (a - abar), kept as mean value + mean-free
// remainder + cached samples. Solvers rely on lo > 0 (uniform positivity on the
// grid) and use bar/lo/hi for preconditioning and relaxation choices.
//==============================================================================
struct Coefficient {
  double bar = 0;
  Field fluct;  // spectral, zero mode removed
  Phys phys;    // samples of the full coefficient
  double lo = 0, hi = 0;

  static Coefficient from_field(const Field& full);
  static Coefficient from_phys(const Phys& samples);
  Field full() const; // bar + fluct as a spectral field
};

// reciprocal coefficient 1/a (pointwise, band-truncated)
Coefficient reciprocal(const Coefficient& a);

struct EllipticOptions {
  double tol = 1e-10;     // relative residual target on div(a grad P) = div f
  int max_iter = 10000;
  double divergence_guard = 0.9; // Picard contraction beyond this -> Krylov path
};

struct EllipticResult {
  Field grad_p;        // n components
  double residual = 0; // relative, ||div(a grad P) - div f|| / ||div f||
  int iterations = 0;
  std::string method;  // "picard" | "picard_relaxed" | "pcg"
  double contraction = 0;
};

// div(a grad P) = div f on the box, P mean-free. Picard iteration on the Leray
// projection with optional relaxation, preconditioned CG fallback on the
// potential form. Products with the coefficient are full-band: the discrete
// operator is the exact collocation operator (see tests vs. the dense oracle).
EllipticResult solve_pressure(const Coefficient& a, const Field& f, EllipticOptions opt = {});

// L^2 bound diagnostic: slack of  a_low ||grad P|| <= ||Qf||  (>= 0 up to roundoff)
double pressure_l2_slack(const Coefficient& a, const Field& f, const Field& grad_p);

// Besov bound diagnostic in the exponent regimes
struct PressureBesovBound {
  std::string regime; // "low_p" | "high_p"
  bool admissible;    // q >= n and regime condition
  double lhs, rhs;    // ||grad P||_{B^{s}_{p,1}} vs factor * ||Qf||_{B^{s}_{p,1}}
};
PressureBesovBound pressure_besov_bound(const Partition& pa, const Coefficient& a,
                                        const Field& f, const Field& grad_p, double s,
                                        double p, double q);

} // namespace lpb
