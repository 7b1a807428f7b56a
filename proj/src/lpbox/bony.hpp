#pragma once
#include <vector>

#include "besov.hpp"

namespace lpb {

//==============================================================================
// Paraproduct decomposition of a pointwise product:
//   u v = T_u v + T_v u + R(u, v)
//   T_u v = sum_j S_{j-1}u . block_j v        (low-high)
//   R(u,v) = sum_j block_j u . block'_j v     (block'_j = blocks j-1, j, j+1)
// On mean-free inputs the decomposition telescopes exactly against the
// dealiased product, since dealiasing is a linear projection.
//==============================================================================

Field paraproduct(const Partition& pa, const Field& u, const Field& v);
Field bony_remainder(const Partition& pa, const Field& u, const Field& v);

// || T_u v + T_v u + R(u,v) - dealias(u v) ||_L2 / || dealias(u v) ||_L2
double reconstruction_defect(const Partition& pa, const Field& u, const Field& v);

// [block_j, a] b = block_j(a b) - a block_j(b)
Field block_commutator(const Partition& pa, const Field& a, const Field& b, int j);

// 2^j ||[block_j, a] b||_{L^r} / (||grad a||_{L^p} ||b||_{L^q}),  1/r = 1/p + 1/q
double block_commutator_ratio(const Partition& pa, const Field& a, const Field& b, int j,
                              double p, double q);

// the full sequence over shells (first-order commutator gain diagnostic):
// c_j = 2^j ||[block_j, a] b||_{L^r},  returned with the normalizing product
struct CommutatorProfile {
  std::vector<double> cj;
  double normalizer; // ||grad a||_{L^p} ||b||_{L^q}
};
CommutatorProfile commutator_profile(const Partition& pa, const Field& a, const Field& b,
                                     double p, double q);

// [P(D), a] w for the Leray projector (degree-0 multiplier; constants pass through)
Field leray_commutator(const Field& a, const Field& w);

// product estimate constant:
// ||f g||_{B^{v1+v2-n/p}_{p,r}} / (||f||_{B^{v1}_{p,r}}||g||_{B^{v2}_{p,inf}}
//                                + ||f||_{B^{v1}_{p,inf}}||g||_{B^{v2}_{p,r}})
// exponent gate: v1, v2 >= 0 and v1 + v2 < n/p + min(n/p, n/p'), p' conjugate
struct ProductEstimate {
  bool admissible;
  double measured;
};
ProductEstimate product_estimate_check(const Partition& pa, const Field& f, const Field& g,
                                       double v1, double v2, double p, double r);

} // namespace lpb
