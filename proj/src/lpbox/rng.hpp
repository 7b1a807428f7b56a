#pragma once
#include <cstdint>

#include "field.hpp"

namespace lpb {

//==============================================================================
// Portable deterministic randomness: xoshiro256++ seeded through splitmix64,
// uniforms via the 53-bit mantissa path, gaussians via explicit Box-Muller.
// No <random> distributions anywhere: their value sequences are
// implementation-defined and would break cross-run reproducibility contracts.
//==============================================================================
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();   // [0, 1)
  double gaussian();  // standard normal

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Mean-zero real random field, band-limited to |k_axis| <= kmax (default N/3),
// per-mode amplitude |kappa|^-decay, unit L^2 norm. Modes are visited in a fixed
// storage order so the draw sequence is a pure function of the seed.
Field random_field(const Grid& g, int comps, Rng& rng, double decay = 2.0, int kmax = -1);

// solenoidal variant (Leray projection applied, renormalized)
Field random_divfree_field(const Grid& g, Rng& rng, double decay = 2.0, int kmax = -1);

} // namespace lpb
