#pragma once
#include <vector>

#include "partition.hpp"

namespace lpb {

// L^2(box) inner product of real fields (spectral, all components)
double inner(const Field& u, const Field& v);

// per-shell L^p profile c_j = ||block_j u||_{L^p}, j = jmin..jmax
std::vector<double> shell_profile(const Partition& pa, const Field& u, double p);

// homogeneous Besov norm ||(2^{js} c_j)_j||_{ell^r} over the resolved shells.
// p == 2 runs a pure spectral fast path (no transforms).
double besov_norm(const Partition& pa, const Field& u, double s, double p, double r);

// true when (s, p, r) indexes a Banach function space on the box:
// s < n/p, or s = n/p with r = 1 (advisory gate; norms still evaluate outside it)
bool besov_banach_gate(const Grid& g, double s, double p, double r);

// low-frequency characterization for s < 0: ell^r of 2^{js}||S_j u||_{L^p},
// j = jmin..jmax+1
double besov_low_norm(const Partition& pa, const Field& u, double s, double p, double r);

// sum_j < block_j u, (block_{j-1}+block_j+block_{j+1}) v >  (exact spectral form)
double duality_pair(const Partition& pa, const Field& u, const Field& v);

// ||u||_{s_theta,p,1} / (||u||_{s0,p,1}^{1-theta} ||u||_{s1,p,1}^theta),
// s_theta = (1-theta) s0 + theta s1; log-convexity puts this at <= 1 + eps
double interpolation_ratio(const Partition& pa, const Field& u, double s0, double s1,
                           double theta, double p);

// left-endpoint Riemann aggregation of per-node values over [0, T]; q = inf -> max
double lq_time_aggregate(const std::vector<double>& values, double dt, double q);

} // namespace lpb
