#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>

#include "lpbox/besov.hpp"
#include "lpbox/partition.hpp"
#include "lpbox/rng.hpp"

using namespace lpb;

namespace {

// analytic sample helper
Phys sample(const Grid& g, int comps, double (*fn)(double, double, double, int)) {
  Phys p(g, comps);
  const double dx = g.dx();
  for (int c = 0; c < comps; ++c) {
    double* out = p.data(c);
    std::int64_t idx = 0;
    if (g.n == 2) {
      for (int i = 0; i < g.N; ++i)
        for (int j = 0; j < g.N; ++j) out[idx++] = fn(i * dx, j * dx, 0.0, c);
    } else {
      for (int i = 0; i < g.N; ++i)
        for (int j = 0; j < g.N; ++j)
          for (int k = 0; k < g.N; ++k) out[idx++] = fn(i * dx, j * dx, k * dx, c);
    }
  }
  return p;
}

} // namespace

TEST_CASE("grid mode bookkeeping") {
  Grid g(2, 8, 2.0 * pi);
  CHECK(g.points() == 64);
  CHECK(g.wavenumber(0) == 0);
  CHECK(g.wavenumber(3) == 3);
  CHECK(g.wavenumber(4) == -4);
  CHECK(g.wavenumber(7) == -1);
  auto k = g.modes(1); // last axis fastest
  CHECK(k[1] == 1);
  CHECK(k[0] == 0);
  CHECK_THROWS(Grid(4, 8, 1.0));
  CHECK_THROWS(Grid(2, 12, 1.0));
}

TEST_CASE("fft round trip and Parseval") {
  for (int n : {2, 3}) {
    Grid g(n, 16, 2.0 * pi);
    Rng rng(7);
    Phys p(g, 1);
    for (auto& x : p.v) x = rng.uniform() - 0.5;
    Field f = from_phys(p);
    Phys back = to_phys(f);
    double worst = 0;
    for (size_t i = 0; i < p.v.size(); ++i) worst = std::max(worst, std::abs(p.v[i] - back.v[i]));
    CHECK(worst < 1e-13);
    // Parseval: spectral L2 equals quadrature L2
    CHECK(l2(f) == doctest::Approx(lp_norm(f, 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("derivatives act mode-wise") {
  Grid g(2, 32, 2.0 * pi);
  Phys p = sample(g, 1, [](double x, double y, double, int) { return std::cos(3 * x + 2 * y); });
  Field f = from_phys(p);
  Field dx = derivative(f, 0);
  Phys want = sample(g, 1, [](double x, double y, double, int) { return -3 * std::sin(3 * x + 2 * y); });
  Phys got = to_phys(dx);
  double worst = 0;
  for (size_t i = 0; i < want.v.size(); ++i) worst = std::max(worst, std::abs(want.v[i] - got.v[i]));
  CHECK(worst < 1e-11);

  // Laplacian eigenvalue
  Field lap = laplacian(f);
  Phys lp = to_phys(lap);
  for (size_t i = 0; i < lp.v.size(); ++i)
    CHECK(lp.v[i] == doctest::Approx(-13.0 * p.v[i]).epsilon(1e-10));

  // inverse Laplacian inverts on mean-free input
  Field back = inv_laplacian(lap);
  Field diff = back - f;
  CHECK(l2(diff) < 1e-11);

  // Nyquist column is annihilated by odd-order symbols
  Phys nyq = sample(g, 1, [](double x, double, double, int) { return std::cos(16.0 * x); });
  Field fn = from_phys(nyq);
  CHECK(l2(derivative(fn, 0)) < 1e-12);
}

TEST_CASE("partition identities on the resolved spectrum") {
  for (int n : {2, 3}) {
    Grid g(n, n == 3 ? 32 : 64, 2.0 * pi);
    Partition pa(g);
    CHECK(pa.jmin() == -1);
    CHECK(pa.jmax() == (g.N == 64 ? 3 : 2));

    const std::int64_t m = g.points();
    double worst_sum = 0, lo_sq = 2, hi_sq = 0, worst_pair = 0;
    for (std::int64_t i = 0; i < m; ++i) {
      if (g.mode_radius(i) <= 0) continue;
      double s = 0, s2 = 0;
      for (int j = pa.jmin(); j <= pa.jmax(); ++j) {
        double v = pa.mask(j)[size_t(i)];
        s += v;
        s2 += v * v;
        for (int jj = pa.jmin(); jj <= j - 2; ++jj)
          worst_pair = std::max(worst_pair, v * pa.mask(jj)[size_t(i)]);
      }
      worst_sum = std::max(worst_sum, std::abs(s - 1.0));
      lo_sq = std::min(lo_sq, s2);
      hi_sq = std::max(hi_sq, s2);
      CHECK(pa.chi_mask()[size_t(i)] == 0.0);
    }
    CHECK(worst_sum < 1e-12);
    CHECK(lo_sq >= 0.5 - 1e-12);
    CHECK(hi_sq <= 1.0 + 1e-12);
    CHECK(worst_pair == 0.0);
  }
}

TEST_CASE("partition shell range and failure mode") {
  Grid small(2, 8, 2.0 * pi);
  CHECK_THROWS_WITH_AS(Partition{small}, "insufficient resolution", Error);
  Grid ok(2, 16, 2.0 * pi);
  Partition pa(ok);
  CHECK(pa.shells() == 3);
}

TEST_CASE("annulus centers sit on the single-coverage plateau") {
  Grid g(2, 64, 2.0 * pi);
  Partition pa(g);
  for (int j = 0; j <= pa.jmax(); ++j) {
    double r = std::ldexp(1.0, j);
    CHECK(pa.mask_value(r, j) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("low cutoff masks telescope exactly") {
  Grid g(2, 64, 2.0 * pi);
  Partition pa(g);
  Rng rng(11);
  Field u = random_field(g, 1, rng);
  // S_{jmax+1} = identity on mean-free input
  Field full = pa.low(u, pa.jmax() + 1);
  Field diff = full - u;
  CHECK(l2(diff) < 1e-12 * l2(u));
  // S_j + sum_{j' >= j} blocks = identity
  Field parts = pa.low(u, 1);
  for (int j = 1; j <= pa.jmax(); ++j) parts += pa.block(u, j);
  diff = parts - u;
  CHECK(l2(diff) < 1e-12 * l2(u));
}

TEST_CASE("derivative-to-scale ratio per shell stays dyadic") {
  for (int n : {2, 3}) {
    Grid g(n, 32, 2.0 * pi);
    Partition pa(g);
    Rng rng(5);
    Field u = random_field(g, 1, rng, 1.0, g.N / 2 - 1);
    for (int j = pa.jmin(); j <= pa.jmax(); ++j) {
      Field b = pa.block(u, j);
      double nb = l2(b);
      if (nb < 1e-14) continue;
      double ratio = l2(gradient(b)) / (std::ldexp(1.0, j) * nb);
      CHECK(ratio > 0.7);
      double cap = j < pa.jmax() ? 2.0 : std::sqrt(double(n)) * (g.N / 2.0) * g.kscale() / std::ldexp(1.0, j);
      CHECK(ratio < cap + 0.01);
    }
  }
}

TEST_CASE("leray split is an orthogonal decomposition") {
  Grid g(3, 16, 2.0 * pi);
  Rng rng(3);
  Field u = random_field(g, 3, rng);
  Field q, p;
  leray_split(u, q, p);
  Field back = q + p;
  back -= u;
  CHECK(l2(back) < 1e-13);
  CHECK(l2(divergence(p)) < 1e-12);
  // gradient part is curl-free
  Field qg = gradient(q); // comps (i*n + a) = d_a q_i
  for (int i = 0; i < 3; ++i)
    for (int a = i + 1; a < 3; ++a) {
      Field c = qg.component(i * 3 + a) - qg.component(a * 3 + i);
      CHECK(l2(c) < 1e-12);
    }
  CHECK(std::abs(inner(q, p)) < 1e-12);

  Field bad = u;
  bad.data(0)[0] = cd(1.0, 0);
  Field q2, p2;
  CHECK_THROWS_WITH_AS(leray_split(bad, q2, p2), "undefined zero mode", Error);
}

TEST_CASE("products are exact for separated modes and dealiased") {
  Grid g(2, 32, 2.0 * pi);
  Phys pu = sample(g, 1, [](double x, double, double, int) { return std::cos(3 * x); });
  Phys pv = sample(g, 1, [](double x, double, double, int) { return std::cos(5 * x); });
  Field u = from_phys(pu), v = from_phys(pv);
  Field w = multiply(u, v);
  // cos(3x) cos(5x) = (cos 8x + cos 2x)/2
  Phys want = sample(g, 1, [](double x, double, double, int) {
    return 0.5 * (std::cos(8 * x) + std::cos(2 * x));
  });
  Phys got = to_phys(w);
  double worst = 0;
  for (size_t i = 0; i < want.v.size(); ++i) worst = std::max(worst, std::abs(want.v[i] - got.v[i]));
  CHECK(worst < 1e-13);

  // modes beyond the dealias cut are removed
  Phys ph = sample(g, 1, [](double x, double, double, int) { return std::cos(7 * x); });
  Field h = from_phys(ph);
  Field hh = multiply(h, h); // would produce k = 14 > 32/3
  for (std::int64_t i = 0; i < g.points(); ++i) {
    auto k = g.modes(i);
    if (std::abs(k[0]) > dealias_cut(g) || std::abs(k[1]) > dealias_cut(g))
      CHECK(std::abs(hh.data(0)[i]) == 0.0);
  }
}

TEST_CASE("snapshot io round trips bit-exactly") {
  Grid g(2, 16, 2.0 * pi);
  Rng rng(23);
  Phys p(g, 2);
  for (auto& x : p.v) x = rng.gaussian();
  const char* path = "snapshot_roundtrip.bnsf";
  write_snapshot(path, p);
  Phys q = read_snapshot(path);
  REQUIRE(q.v.size() == p.v.size());
  CHECK(std::memcmp(q.v.data(), p.v.data(), p.v.size() * sizeof(double)) == 0);
  CHECK(q.g == g);
  write_snapshot(path, q);
  Phys q2 = read_snapshot(path);
  CHECK(std::memcmp(q2.v.data(), p.v.data(), p.v.size() * sizeof(double)) == 0);
  std::remove(path);
}

TEST_CASE("random fields are reproducible, Hermitian, band-limited") {
  Grid g(3, 16, 2.0 * pi);
  Rng r1(42), r2(42), r3(43);
  Field a = random_field(g, 2, r1);
  Field b = random_field(g, 2, r2);
  Field c = random_field(g, 2, r3);
  double same = 0, other = 0;
  for (size_t i = 0; i < a.raw().size(); ++i) {
    same = std::max(same, std::abs(a.raw()[i] - b.raw()[i]));
    other = std::max(other, std::abs(a.raw()[i] - c.raw()[i]));
  }
  CHECK(same == 0.0);
  CHECK(other > 1e-6);
  CHECK(imag_residual(a) < 1e-12);
  CHECK(std::abs(mean_mode(a, 0)) == 0.0);
  CHECK(l2(a) == doctest::Approx(1.0).epsilon(1e-12));
  for (std::int64_t i = 0; i < g.points(); ++i) {
    auto k = g.modes(i);
    for (int ax = 0; ax < g.n; ++ax)
      if (std::abs(k[ax]) > dealias_cut(g)) CHECK(std::abs(a.data(0)[i]) == 0.0);
  }
  Field df = random_divfree_field(g, r1);
  CHECK(l2(divergence(df)) < 1e-12);
}
