//==========================================================================
// stokes.hpp
//
// Time-dependent Stokes solvers on the periodic box:
//   - constant coefficients: exact exponential integrator + spectral pressure
//   - perturbed pressure coefficient: lagged Picard around the constant core
//   - fully variable coefficients: theta-continuation from the constant state,
//     each anchor solved by Picard around the constant core
// plus the frequency-splitting diagnostics and measured-constant checks that
// certify the solves.
//==========================================================================
#pragma once

#include <string>
#include <vector>

#include "lpbox/besov.hpp"
#include "lpbox/elliptic.hpp"
#include "lpbox/field.hpp"
#include "lpbox/partition.hpp"

namespace lpb {

//---- time sampling -------------------------------------------------------

struct TimeGrid {
  double T = 1.0;
  int steps = 16; // nodes = steps + 1, node m at m*dt
  TimeGrid() = default;
  TimeGrid(double T_, int steps_);
  double dt() const { return T / steps; }
  int nodes() const { return steps + 1; }
  double node(int m) const { return T * double(m) / steps; }
};

// centered differences along a trajectory (one-sided second order at the
// ends); "backward" uses first-order backward differences, node 0 forward
enum class TimeDiff { centered, backward };
std::vector<Field> traj_derivative(const std::vector<Field>& traj, double dt,
                                   TimeDiff scheme = TimeDiff::centered);

//---- problem data --------------------------------------------------------

// momentum  dt(u) - a div(b D(u)) + a grad P = f
// constraint div u = div R,  u(0) = u0 with div u0 = div R(0)
struct StokesData {
  Grid g{2, 16, 2 * pi};
  TimeGrid tg;
  Field u0;             // n comps
  std::vector<Field> f; // per node, n comps; empty = zero forcing
  std::vector<Field> R; // per node; empty = zero constraint
  StokesData() = default;
  StokesData(const Grid& g_, const TimeGrid& tg_, Field u0_);
  const Field& f_at(int m) const;
  const Field& R_at(int m) const;

private:
  Field zero_;
};

// D(u) = grad u + (grad u)^T, stored row-major [c*n + a] = d_a u_c + d_c u_a
Field deformation(const Field& u);

//---- solution container --------------------------------------------------

struct Trace {
  std::string name;
  std::vector<double> v; // one value per time node
};

// solution-space norm at index p:
//   sup_t |u|_{B^{n/p-1}_{p,1}} + int |(dtu, d2u, gp)|_{B^{n/p-1}_{p,1}}
// plus the low-frequency pressure integral int |gp|_{B^{n/p-n/2}_{p,2}};
// the pressure part of the total uses the larger of the two pressure reads
struct SolutionNorm {
  double u_sup = 0;
  double dtu_l1 = 0, d2u_l1 = 0, gp_l1 = 0;
  double gp_low_l1 = 0;
  double total() const;
};

SolutionNorm solution_norm(const Partition& part, double p,
                           const std::vector<Field>& u,
                           const std::vector<Field>& grad_p, double dt,
                           TimeDiff scheme = TimeDiff::centered);

// update metric for the fixed-point loops: norm of the difference trajectory
double solution_distance(const Partition& part, double p,
                         const std::vector<Field>& u1,
                         const std::vector<Field>& gp1,
                         const std::vector<Field>& u2,
                         const std::vector<Field>& gp2, double dt);

struct StokesSolution {
  Grid g{2, 16, 2 * pi};
  TimeGrid tg;
  double p = 2; // index used for norms/traces
  std::vector<Field> u, grad_p;
  std::vector<Trace> traces;
  SolutionNorm norm;
  double contraction = 0; // worst accepted iterate-to-iterate ratio
  int iterations = 0;     // total Picard sweeps
  std::vector<double> theta_path;
  // three-step split route (variable solve, when requested): u = u1 + u2 with
  // u1 the constant-state solve and u2 driven by the correction forcing
  bool has_split = false;
  std::vector<Field> u1, u2;
  double split_closure = 0; // |u - u1 - u2| / |u| in the solution norm
  int split_m = 0;
};

struct StokesOptions {
  double p = 2;
  double tol = 1e-9;
  int max_picard = 80;
  double eps0 = 0.25;                // initial continuation step
  double splitting_threshold = 0.1;  // gate for T^1_m, T^4_m
  bool with_split = false;           // compute the u1+u2 decomposition
  bool direct = false;               // try theta=1 Picard before the ladder
  bool record_traces = true;
};

//---- solvers ---------------------------------------------------------------

StokesSolution constant_stokes_solve(const StokesData& data, double abar,
                                     double bbar,
                                     const StokesOptions& opts = {});

// coefficient perturbed to a = (abar + c) on both the viscosity and pressure
// side, b held at bbar; the c-terms are lagged through a Picard loop around
// the constant core (any mean of c folds into abar)
StokesSolution perturbed_stokes_solve(const StokesData& data, double abar,
                                      double bbar, const Phys& c,
                                      const StokesOptions& opts = {});

StokesSolution variable_stokes_solve(const StokesData& data,
                                     const Coefficient& a,
                                     const Coefficient& b,
                                     const StokesOptions& opts = {});

//---- diagnostics -----------------------------------------------------------

// tail/low-frequency functionals of the coefficient pair at cutoff m:
//   t1 = |(Id-S_m)(a-abar)|_{B^{n/p}_{p,1}} * C(a)-type factor
//   t2 = Ctilde(a) * (1 + |S_m grad a|_{B^{n/p-1/2}_{p,2}})
//   t3 = |(S_m(a grad b), S_m(b grad a))|_{B^{n/p-1/2}_{p,1}} + product floor
//   t4 = |(Id-S_m)(a grad b, b grad a)|_{B^{n/p-1}_{p,1}}
//        + |(Id-S_m)(ab - abar*bbar)|_{B^{n/p}_{p,1}}
// and the velocity-side tail
//   tv = |(Id-S_m)(b grad a)| + |(Id-S_m)(a grad b)| + |(Id-S_m)(ab-abar*bbar)|
//        all in B^{n/p-1}_{p,1}
struct SplitTerms {
  int m = 0;
  double t1 = 0, t2 = 0, t3 = 0, t4 = 0;
  double tv = 0;       // velocity-side tail
  double coercivity = 0; // min over grid of abar*bbar + S_m(ab - abar*bbar)
};

struct SplitReport {
  std::vector<SplitTerms> terms; // one entry per scanned m
  int m_admissible = 0;          // smallest m with t1, t4 <= threshold
  double threshold = 0.1;
};

SplitTerms splitting_terms(const Partition& part, double p,
                           const Coefficient& a, const Coefficient& b, int m);

// scans m over the dyadic range; throws when no admissible m exists
SplitReport splitting_diagnostics(const Partition& part, double p,
                                  const Coefficient& a, const Coefficient& b,
                                  double threshold = 0.1);

// minimal C with  norm(t) <= DATA(t) * exp(C(t+1))  at every stored node;
// DATA = |u0| + |(f, dtR, grad div R)|_{L1_t}; defined=false when DATA = 0
struct GrowthConstant {
  double C = 0;
  bool defined = false;
};
GrowthConstant apriori_estimate_check(const Partition& part,
                                      const StokesSolution& sol,
                                      const StokesData& data);

// linear-form constant of the constant-coefficient estimate:
// max_t LHS(t) / (|u0| + |(f, dtR, abar*bbar*grad div R)|_{L1_t})
GrowthConstant constant_estimate_constant(const Partition& part,
                                          const StokesSolution& sol,
                                          const StokesData& data, double abar,
                                          double bbar);

// L2 defect of  dt(u) - a div(b D(u)) + a grad P - f  at interior nodes
// (centered time differences); one value per interior node
std::vector<double> stokes_residual(const StokesData& data,
                                    const Coefficient& a, const Coefficient& b,
                                    const StokesSolution& sol);

// divergence-part gain of the pressure coefficient: compares
// |P((a-abar) gp)|_{B^{n/p-1}_{p,1}} against the no-structure bound
// |a-abar|_inf * |gp|_{B^{n/p-1}_{p,1}}; returns bound / measured (>1 = gain)
double pressure_gain_margin(const Partition& part, double p,
                            const Coefficient& a, const Field& grad_p);

} // namespace lpb
