#include "partition.hpp"

#include <cmath>

namespace lpb {

namespace {
constexpr double kLo = 0.75;    // bump support lower edge
constexpr double kHi = 1.875;   // bump support upper edge (inside the 8/3 annulus)
} // namespace

double Partition::bump(double r) {
  if (r <= kLo || r >= kHi) return 0.0;
  return std::exp(-1.0 / ((r - kLo) * (kHi - r)));
}

// sum over all integer j of psi(2^-j r); at most two terms are nonzero
static double bump_total(double r) {
  double z = 0.0;
  int jc = int(std::floor(std::log2(r)));
  for (int j = jc - 2; j <= jc + 2; ++j) z += Partition::bump(std::ldexp(r, -j));
  return z;
}

double Partition::shell_value(double r, int j) {
  if (r <= 0) return 0.0;
  double p = bump(std::ldexp(r, -j));
  if (p == 0.0) return 0.0;
  return p / bump_total(r);
}

double Partition::mask_value(double r, int j) const {
  if (r <= 0) return 0.0;
  if (j < jmax_) return shell_value(r, j);
  // top shell: fold in everything above the resolved range
  double s = 0.0;
  int jc = int(std::floor(std::log2(r)));
  for (int jj = jmax_; jj <= std::max(jc + 2, jmax_); ++jj) s += bump(std::ldexp(r, -jj));
  return s > 0.0 ? s / bump_total(r) : 0.0;
}

int partition_jmin(const Grid& g) {
  return int(std::ceil(std::log2(2.0 * pi / g.L))) - 1;
}

int partition_jmax(const Grid& g) {
  return int(std::floor(std::log2((g.N / 2.0) * g.kscale() * 3.0 / 8.0)));
}

Partition::Partition(const Grid& g) : g_(g) {
  jmin_ = partition_jmin(g);
  jmax_ = partition_jmax(g);
  if (shells() < 3) fail(msg::insufficient_resolution);

  const std::int64_t m = g.points();
  masks_.assign(size_t(shells()), std::vector<double>(size_t(m), 0.0));
  chi_.assign(size_t(m), 0.0);
  for (std::int64_t i = 0; i < m; ++i) {
    double r = g.mode_radius(i);
    if (r <= 0) continue;
    double covered = 0.0;
    for (int j = jmin_; j <= jmax_; ++j) {
      double v = mask_value(r, j);
      masks_[size_t(j - jmin_)][size_t(i)] = v;
      covered += v;
    }
    double residue = 1.0 - covered; // below-range residue; snap roundoff to zero
    chi_[size_t(i)] = residue > 1e-13 ? residue : 0.0;
  }
}

const std::vector<double>& Partition::mask(int j) const {
  if (j < jmin_ || j > jmax_) fail("shell index out of range");
  return masks_[size_t(j - jmin_)];
}

std::vector<double> Partition::low_mask(int j) const {
  if (j < jmin_ || j > jmax_ + 1) fail("shell index out of range");
  std::vector<double> out(size_t(g_.points()), 0.0);
  for (int jj = jmin_; jj < j; ++jj) {
    const auto& mk = mask(jj);
    for (size_t i = 0; i < out.size(); ++i) out[i] += mk[i];
  }
  return out;
}

Field Partition::block(const Field& u, int j) const { return masked(u, mask(j)); }

Field Partition::low(const Field& u, int j) const { return masked(u, low_mask(j)); }

Field Partition::block_neighborhood(const Field& u, int j) const {
  Field out = block(u, j);
  if (j - 1 >= jmin_) out += block(u, j - 1);
  if (j + 1 <= jmax_) out += block(u, j + 1);
  return out;
}

} // namespace lpb
