#pragma once
#include <complex>
#include <string>
#include <vector>

#include "grid.hpp"

namespace lpb {

using cd = std::complex<double>;

//==============================================================================
// Phys: real samples on the grid (row-major, one block per component).
// Field: spectral coefficients (full complex cube, wrap-around mode order,
//        one block per component). Component stacks encode vectors (comps = n)
//        and matrices (comps = n*n, entry (i,j) at c = i*n + j).
// Fields representing real data keep Hermitian symmetry by construction: they
// originate from real samples or from real-symbol spectral operations.
//==============================================================================

struct Phys {
  Grid g;
  int comps = 0;
  std::vector<double> v;

  Phys() = default;
  Phys(const Grid& g_, int comps_) : g(g_), comps(comps_), v(size_t(comps_) * g_.points(), 0.0) {}
  double* data(int c) { return v.data() + size_t(c) * g.points(); }
  const double* data(int c) const { return v.data() + size_t(c) * g.points(); }
};

class Field {
 public:
  Field() = default;
  Field(const Grid& g, int comps = 1)
      : g_(g), comps_(comps), hat_(size_t(comps) * g.points(), cd(0, 0)) {}

  const Grid& grid() const { return g_; }
  int comps() const { return comps_; }
  std::int64_t points() const { return g_.points(); }
  bool empty() const { return hat_.empty(); }

  cd* data(int c = 0) { return hat_.data() + size_t(c) * g_.points(); }
  const cd* data(int c = 0) const { return hat_.data() + size_t(c) * g_.points(); }
  std::vector<cd>& raw() { return hat_; }
  const std::vector<cd>& raw() const { return hat_; }

  Field component(int c) const;
  void set_component(int c, const Field& s);

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double a);

 private:
  Grid g_;
  int comps_ = 0;
  std::vector<cd> hat_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double a, Field f);
void axpy(double a, const Field& x, Field& y); // y += a*x

// ---- transforms --------------------------------------------------------------
Field from_phys(const Phys& p);
Phys to_phys(const Field& f);
// max |imag part| of the synthesized samples, relative to the max magnitude
double imag_residual(const Field& f);

// ---- spectral calculus --------------------------------------------------------
// odd-order symbols zero the Nyquist mode on the differentiated axis
Field derivative(const Field& f, int axis);
Field gradient(const Field& f);               // comps c -> c*n, [c*n + axis]
Field divergence(const Field& f);             // comps c*n -> c (row-wise divergence)
Field laplacian(const Field& f);
Field inv_laplacian(const Field& f);          // requires zero mode to vanish
Field grad_div(const Field& f);               // n comps -> n comps

void require_mean_free(const Field& f, double tol = 1e-12);

// integer modes as the derivative symbols see them (Nyquist columns -> 0);
// every projection built from symbols must use these to stay consistent
// with divergence/gradient on full-band data
std::array<int, 3> effective_modes(const Grid& g, std::int64_t idx);

// Leray decomposition u = grad part + solenoidal part. The project_* family
// sends the zero mode (and pure-Nyquist corners) to the solenoidal side —
// constants are divergence-free; the leray_* family demands mean-free input
void project_split(const Field& u, Field& grad_part, Field& sol_part);
Field project_gradient(const Field& u);
Field project_solenoidal(const Field& u);
void leray_split(const Field& u, Field& grad_part, Field& sol_part);
Field leray_q(const Field& u);                // gradient part
Field leray_p(const Field& u);                // solenoidal part

// ---- products -----------------------------------------------------------------
int dealias_cut(const Grid& g);               // keep |k_axis| <= N/3
void dealias(Field& f);
// pointwise product in physical space; scalar*stack broadcasts; dealiases by default
Field multiply(const Field& a, const Field& b, bool dealias_result = true);
// multiply spectral field by a real physical coefficient (comps 1 broadcasts)
Field coeff_multiply(const Phys& coeff, const Field& f, bool dealias_result = true);

// ---- masks --------------------------------------------------------------------
void apply_mask(Field& f, const std::vector<double>& mask);
Field masked(const Field& f, const std::vector<double>& mask);

// ---- means and norms ------------------------------------------------------------
cd mean_mode(const Field& f, int c = 0);
void zero_mean(Field& f);
double l2(const Field& f);                    // L^2(box) by Parseval, all comps
double lp_norm(const Field& f, double p);     // trapezoid quadrature; p=inf -> grid max
double lp_norm(const Phys& p, double pexp);
double linf(const Field& f);

// ---- snapshot io (bit-exact payload round trip) --------------------------------
void write_snapshot(const std::string& path, const Phys& p);
Phys read_snapshot(const std::string& path);

} // namespace lpb
