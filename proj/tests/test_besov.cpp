#include <doctest.h>

#include <cmath>
#include <limits>

#include "lpbox/besov.hpp"
#include "lpbox/rng.hpp"

using namespace lpb;

#include "helpers.hpp"

namespace {
const double inf = std::numeric_limits<double>::infinity();
} // namespace

TEST_CASE("single-shell norms reduce to weighted Lp") {
  Grid g(2, 64, 2.0 * pi);
  Partition pa(g);
  // |k| = 4 sits on the plateau of shell j = 2
  Phys p(g, 1);
  for (int i = 0; i < g.N; ++i)
    for (int j = 0; j < g.N; ++j) p.v[size_t(i) * g.N + j] = std::cos(4.0 * (i * g.dx()));
  Field u = from_phys(p);
  for (double s : {-1.0, 0.0, 1.5}) {
    double want = std::pow(2.0, 2.0 * s) * lp_norm(u, 2.0);
    CHECK(besov_norm(pa, u, s, 2.0, 1.0) == doctest::Approx(want).epsilon(1e-10));
  }
  // and for p = infinity
  double want = std::pow(2.0, 2.0) * lp_norm(u, inf);
  CHECK(besov_norm(pa, u, 1.0, inf, 1.0) == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("dilation rescales norms by the dyadic factor") {
  for (int n : {2, 3}) {
    Grid g(n, n == 2 ? 64 : 32, 2.0 * pi);
    Partition pa(g);
    Rng rng(17);
    // doubled content must stay clear of the top-shell fold region
    double rmax = 0.74 * std::ldexp(1.0, pa.jmax());
    struct SP { double s, p; };
    for (SP sp : {SP{n / 2.0 - 1.0, 2.0}, SP{n / 2.0, 2.0}, SP{n / 3.0 - 1.0, 3.0}}) {
      for (int trial = 0; trial < 5; ++trial) {
        Field u = testutil::radial_cap(random_field(g, 1, rng, 1.0), rmax);
        Field v = testutil::dilate_to_half_grid(u);
        Partition pv(v.grid());
        double nu = besov_norm(pa, u, sp.s, sp.p, 1.0);
        double nv = besov_norm(pv, v, sp.s, sp.p, 1.0);
        double want = std::pow(2.0, sp.s - n / sp.p) * nu;
        CHECK(std::abs(nv - want) < 0.01 * want);
      }
    }
  }
}

TEST_CASE("ell^r monotonicity and the Banach gate") {
  Grid g(2, 32, 2.0 * pi);
  Partition pa(g);
  Rng rng(9);
  Field u = random_field(g, 1, rng);
  double n1 = besov_norm(pa, u, 0.5, 2.0, 1.0);
  double n2 = besov_norm(pa, u, 0.5, 2.0, 2.0);
  double ni = besov_norm(pa, u, 0.5, 2.0, inf);
  CHECK(n2 <= n1 * (1 + 1e-12));
  CHECK(ni <= n2 * (1 + 1e-12));

  CHECK(besov_banach_gate(g, 0.5, 2.0, 2.0));       // s < n/p
  CHECK(besov_banach_gate(g, 1.0, 2.0, 1.0));       // s = n/p, r = 1
  CHECK_FALSE(besov_banach_gate(g, 1.0, 2.0, 2.0)); // s = n/p, r > 1
  CHECK_FALSE(besov_banach_gate(g, 2.0, 2.0, 1.0));
}

TEST_CASE("low-frequency characterization is equivalent for s < 0") {
  Grid g(2, 64, 2.0 * pi);
  Partition pa(g);
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    Field u = random_field(g, 1, rng, 1.0);
    double direct = besov_norm(pa, u, -0.5, 2.0, 1.0);
    double low = besov_low_norm(pa, u, -0.5, 2.0, 1.0);
    double ratio = low / direct;
    CHECK(ratio > 1.0 / 8.0);
    CHECK(ratio < 8.0);
  }
  CHECK_THROWS(besov_low_norm(pa, Field(g, 1), 0.5, 2.0, 1.0));
}

TEST_CASE("duality pairing: Parseval on the diagonal, bounded off it") {
  Grid g(2, 64, 2.0 * pi);
  Partition pa(g);
  Rng rng(13);
  Field u = random_field(g, 1, rng);
  // sum_j phi_j (phi_{j-1}+phi_j+phi_{j+1}) telescopes to 1 on covered modes
  double pair = duality_pair(pa, u, u);
  double want = l2(u) * l2(u);
  CHECK(pair == doctest::Approx(want).epsilon(1e-10));

  // |<u, v>| <= 3 ||u||_{B^s_{2,r}} ||v||_{B^{-s}_{2,r'}}
  for (int trial = 0; trial < 10; ++trial) {
    Field a = random_field(g, 1, rng);
    Field b = random_field(g, 1, rng);
    double lhs = std::abs(duality_pair(pa, a, b));
    double rhs = besov_norm(pa, a, 0.5, 2.0, 1.0) * besov_norm(pa, b, -0.5, 2.0, inf);
    CHECK(lhs <= 3.0 * rhs * (1 + 1e-12));
  }
}

TEST_CASE("interpolation inequality is log-convex") {
  Grid g(2, 32, 2.0 * pi);
  Partition pa(g);
  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    Field u = random_field(g, 1, rng, 1.5);
    for (double theta : {0.25, 0.5, 0.75}) {
      CHECK(interpolation_ratio(pa, u, -1.0, 1.0, theta, 2.0) <= 1.0 + 1e-10);
      CHECK(interpolation_ratio(pa, u, 0.0, 1.5, theta, 3.0) <= 1.0 + 1e-10);
    }
  }
}

TEST_CASE("embedding into higher integrability costs n(1/p1 - 1/p2)") {
  Grid g(2, 32, 2.0 * pi);
  Partition pa(g);
  Rng rng(5);
  double worst = 0;
  for (int trial = 0; trial < 5; ++trial) {
    Field u = random_field(g, 1, rng);
    double s = 0.5, p1 = 2.0, p2 = 4.0;
    double target = s - g.n * (1.0 / p1 - 1.0 / p2);
    double c = besov_norm(pa, u, target, p2, 1.0) / besov_norm(pa, u, s, p1, 1.0);
    worst = std::max(worst, c);
  }
  CHECK(worst < 5.0);
  CHECK(worst > 0.01);
}

TEST_CASE("time aggregation follows the left-endpoint rule") {
  std::vector<double> v{2.0, 2.0, 2.0, 2.0, 7.0}; // last node never enters finite q
  CHECK(lq_time_aggregate(v, 0.25, 1.0) == doctest::Approx(2.0));
  CHECK(lq_time_aggregate(v, 0.25, 2.0) == doctest::Approx(2.0));
  CHECK(lq_time_aggregate(v, 0.25, inf) == doctest::Approx(7.0));
  CHECK(lq_time_aggregate({}, 0.1, 1.0) == 0.0);
}
