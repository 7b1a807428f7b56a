#pragma once
#include <vector>

#include "field.hpp"

namespace lpb {

//==============================================================================
// Smooth dyadic partition of unity on the resolved spectrum.
//
// A C^inf bump psi(r) = exp(-1/((r - 3/4)(15/8 - r))) on (3/4, 15/8) is
// normalized by Z(r) = sum_{j in Z} psi(2^-j r), giving shell masks
// phi_j(r) = psi(2^-j r)/Z(r) with:
//   * sum_j phi_j(r) = 1 for every r > 0 (exact telescoping),
//   * supports of phi_j and phi_j' disjoint when |j - j'| >= 2,
//   * at most two shells overlap anywhere, so sum_j phi_j^2 in [1/2, 1],
//   * phi_j == 1 on the plateau around r = 2^j (single-coverage zone).
// The resolved range is j in [jmin, jmax]; contributions of all j > jmax are
// folded into the jmax mask so the identities hold up to the corner of the
// spectral cube. Frequencies below the jmin shell would go to a residual
// low-frequency mask chi; on the standard box every nonzero mode is covered
// by the dyadic shells, so chi vanishes identically on-grid.
//==============================================================================
class Partition {
 public:
  explicit Partition(const Grid& g); // throws "insufficient resolution" if < 3 shells

  const Grid& grid() const { return g_; }
  int jmin() const { return jmin_; }
  int jmax() const { return jmax_; }
  int shells() const { return jmax_ - jmin_ + 1; }

  // shell mask phi_j sampled on the grid (zero mode always 0)
  const std::vector<double>& mask(int j) const;
  // low-frequency cutoff mask: sum of phi_j' over j' < j, valid j in [jmin, jmax+1]
  std::vector<double> low_mask(int j) const;
  const std::vector<double>& chi_mask() const { return chi_; }

  Field block(const Field& u, int j) const;       // dyadic block of u
  Field low(const Field& u, int j) const;         // low cutoff S_j u
  Field block_neighborhood(const Field& u, int j) const; // blocks j-1 + j + j+1

  // scalar profile helpers (radial, kappa units)
  static double bump(double r);                   // psi above
  static double shell_value(double r, int j);     // phi_j(r) without top folding
  double mask_value(double r, int j) const;       // with top folding at jmax

 private:
  Grid g_;
  int jmin_ = 0, jmax_ = 0;
  std::vector<std::vector<double>> masks_;
  std::vector<double> chi_;
};

// pinned shell-range formulas
int partition_jmin(const Grid& g);
int partition_jmax(const Grid& g);

} // namespace lpb
