#include "rng.hpp"

#include <cmath>

namespace lpb {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
  std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

double Rng::gaussian() {
  if (has_spare_) { has_spare_ = false; return spare_; }
  double u1 = 1.0 - uniform(); // (0, 1], keeps log finite
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

//------------------------------------------------------------------------------
// Band-limited random fields. Each Hermitian mode pair (k, -k) gets one complex
// gaussian draw at its canonical representative (first nonzero wavenumber
// positive); Nyquist planes are excluded so symmetry stays exact.
//------------------------------------------------------------------------------

Field random_field(const Grid& g, int comps, Rng& rng, double decay, int kmax) {
  if (kmax < 0) kmax = dealias_cut(g);
  Field f(g, comps);
  const std::int64_t m = g.points();
  for (int c = 0; c < comps; ++c) {
    cd* h = f.data(c);
    for (std::int64_t i = 0; i < m; ++i) {
      auto k = g.modes(i);
      bool skip = (k[0] == 0 && k[1] == 0 && k[2] == 0);
      for (int a = 0; a < g.n; ++a)
        if (std::abs(k[a]) > kmax || k[a] == -g.N / 2) skip = true;
      if (skip) continue;
      // canonical half-space: first nonzero component positive
      int lead = 0;
      for (int a = 0; a < g.n; ++a)
        if (k[a] != 0) { lead = k[a]; break; }
      if (lead < 0) continue;

      double k2 = 0;
      for (int a = 0; a < g.n; ++a) k2 += double(k[a]) * k[a];
      double amp = std::pow(g.kscale() * std::sqrt(k2), -decay);
      cd z(rng.gaussian(), rng.gaussian());
      h[i] = amp * z;

      // mirror index of -k
      std::int64_t mi = 0;
      for (int a = 0; a < g.n; ++a) {
        int kk = -k[a];
        int idx = kk >= 0 ? kk : kk + g.N;
        mi = mi * g.N + idx;
      }
      h[mi] = std::conj(amp * z);
    }
  }
  double nrm = l2(f);
  if (nrm > 0) f *= 1.0 / nrm;
  return f;
}

Field random_divfree_field(const Grid& g, Rng& rng, double decay, int kmax) {
  Field u = random_field(g, g.n, rng, decay, kmax);
  Field p = leray_p(u);
  double nrm = l2(p);
  if (nrm > 0) p *= 1.0 / nrm;
  return p;
}

} // namespace lpb
