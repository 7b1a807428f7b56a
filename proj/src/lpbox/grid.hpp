#pragma once
#include <array>
#include <cmath>
#include <cstdint>

#include "errors.hpp"

namespace lpb {

inline constexpr double pi = 3.14159265358979323846;

//==============================================================================
// Periodic box [0,L)^n sampled on N points per axis (N a power of two).
// Physical and spectral arrays share row-major layout; the spectral axis order
// is wrap-around: storage index i on an axis carries integer wavenumber
// k = i for i < N/2 and k = i - N otherwise (so k in [-N/2, N/2-1]).
//==============================================================================
struct Grid {
  int n = 0;
  int N = 0;
  double L = 2.0 * pi;

  Grid() = default;
  Grid(int n_, int N_, double L_) : n(n_), N(N_), L(L_) {
    if (n < 2 || n > 3) fail("grid dimension must be 2 or 3");
    if (N < 4 || (N & (N - 1)) != 0) fail("grid size must be a power of two >= 4");
    if (!(L > 0.0)) fail("box length must be positive");
  }

  std::int64_t points() const {
    std::int64_t m = 1;
    for (int i = 0; i < n; ++i) m *= N;
    return m;
  }
  double dx() const { return L / N; }
  double cell_volume() const { return std::pow(dx(), n); }
  // lowest nonzero wavenumber magnitude; integer modes scale by this
  double kscale() const { return 2.0 * pi / L; }

  int wavenumber(int i) const { return i < N / 2 ? i : i - N; }

  // decode a linear storage index into integer wavenumbers (unused axes -> 0)
  std::array<int, 3> modes(std::int64_t idx) const {
    std::array<int, 3> k{0, 0, 0};
    for (int a = n - 1; a >= 0; --a) {
      k[a] = wavenumber(static_cast<int>(idx % N));
      idx /= N;
    }
    return k;
  }

  double mode_radius(std::int64_t idx) const {
    auto k = modes(idx);
    double s = 0;
    for (int a = 0; a < n; ++a) s += double(k[a]) * k[a];
    return kscale() * std::sqrt(s);
  }

  bool operator==(const Grid& o) const { return n == o.n && N == o.N && L == o.L; }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

} // namespace lpb
