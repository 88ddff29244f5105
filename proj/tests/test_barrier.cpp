// Scalar barrier, smoothstep and support-radius tests. Closed-form values
// are computed independently here; derivatives are checked against central
// finite differences.
#include <catch2/catch_amalgamated.hpp>

#include "gmcp/barrier.hpp"

#include <random>

using namespace gmcp;

TEST_CASE("barrier vanishes at and beyond the support radius") {
  for (const Real eps : {1e-3, 0.37, 2.0}) {
    for (const Real g : {eps, 1.5 * eps, 10 * eps}) {
      const BarrierEval b = barrier(g, eps);
      REQUIRE(b.B == 0.0);
      REQUIRE(b.dB == 0.0);
      REQUIRE(b.ddB == 0.0);
    }
  }
}

TEST_CASE("barrier midpoint value matches the closed form") {
  for (const Real eps : {1e-3, 0.37, 1.0, 42.0}) {
    const Real expected = eps * eps / 4.0 * std::log(2.0);
    REQUIRE(barrier(eps / 2, eps).B == Catch::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("barrier grows monotonically to infinity as the gap closes") {
  const Real eps = 0.01;
  Real prev = barrier(0.99 * eps, eps).B;
  for (Real g = 0.9 * eps; g > 1e-12; g *= 0.5) {
    const Real cur = barrier(g, eps).B;
    REQUIRE(cur > prev);
    prev = cur;
  }
  REQUIRE(barrier(1e-12, eps).B > 10 * eps * eps);  // ~ eps^2 |ln(g/eps)|
  // the force also blows up
  REQUIRE(-barrier(1e-12, eps).dB > 1e8 * eps);
}

TEST_CASE("barrier activates C2-smoothly at the support radius") {
  const Real eps = 0.02;
  for (const Real f : {1.0 - 1e-7, 1.0 - 1e-8}) {
    const BarrierEval b = barrier(f * eps, eps);
    REQUIRE(std::abs(b.B) < 1e-12 * eps * eps);
    REQUIRE(std::abs(b.dB) < 1e-6 * eps);
    REQUIRE(std::abs(b.ddB) < 1e-5);
  }
}

TEST_CASE("barrier derivatives match finite differences") {
  std::mt19937 rng(53);
  std::uniform_real_distribution<Real> ge(0.05, 0.95);
  for (const Real eps : {1e-3, 0.5, 7.0}) {
    for (int i = 0; i < 40; ++i) {
      const Real g = ge(rng) * eps;
      const Real h = 1e-6 * eps;
      const BarrierEval b = barrier(g, eps);
      const Real fd1 = (barrier(g + h, eps).B - barrier(g - h, eps).B) / (2 * h);
      const Real fd2 = (barrier(g + h, eps).dB - barrier(g - h, eps).dB) / (2 * h);
      REQUIRE(fd1 == Catch::Approx(b.dB).epsilon(1e-6).margin(1e-9 * eps));
      REQUIRE(fd2 == Catch::Approx(b.ddB).epsilon(1e-5).margin(1e-7));
    }
  }
}

TEST_CASE("barrier rejects non-positive gaps and radii") {
  REQUIRE_THROWS_AS(barrier(0.0, 1.0), Error);
  REQUIRE_THROWS_AS(barrier(-1.0, 1.0), Error);
  REQUIRE_THROWS_AS(barrier(0.5, 0.0), Error);
}

TEST_CASE("hermite step values and boundaries") {
  for (const Real delta : {0.1, 1.0, 3.5}) {
    REQUIRE(hermite_step(delta / 2, delta) == 0.5);
    REQUIRE(hermite_step(0.0, delta) == 0.0);
    REQUIRE(hermite_step(-1.0, delta) == 0.0);
    REQUIRE(hermite_step(delta, delta) == 1.0);
    REQUIRE(hermite_step(2 * delta, delta) == 1.0);
    REQUIRE(hermite_step(delta / 4, delta) ==
            Catch::Approx(3.0 / 64 * 4 - 2.0 / 64).epsilon(1e-14));  // 3t^2-2t^3 at t=1/4
  }
}

TEST_CASE("hermite step is C1 at both ends") {
  const Real delta = 0.37;
  const Real h = 1e-8;
  // derivative approaches zero from inside at both boundaries
  const Real d_at_0 = (hermite_step(h, delta) - hermite_step(-h, delta)) / (2 * h);
  const Real d_at_delta =
      (hermite_step(delta + h, delta) - hermite_step(delta - h, delta)) / (2 * h);
  REQUIRE(std::abs(d_at_0) <= 1e-6);
  REQUIRE(std::abs(d_at_delta) <= 1e-6);
  // value continuity
  REQUIRE(hermite_step(1e-12, delta) == Catch::Approx(0.0).margin(1e-10));
  REQUIRE(hermite_step(delta - 1e-12, delta) == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("adaptive support radius branches") {
  // cap branch: min(0.9 * 0.002, 0.001) = 0.001, bitwise
  REQUIRE(adaptive_eps(0.002, 0.001) == 0.001);
  // linear branch: exactly the formula value, one ulp from the decimal 0.00045
  REQUIRE(adaptive_eps(0.0005, 0.001) == 0.9 * 0.0005);
  REQUIRE(adaptive_eps(0.0005, 0.001) == Catch::Approx(0.00045).margin(1e-18));
  // both branches coincide at g_ref = eps_max / 0.9
  const Real eps_max = 0.001;
  const Real g = eps_max / 0.9;
  const Real e = adaptive_eps(g, eps_max);
  REQUIRE(e <= eps_max);
  REQUIRE(e >= eps_max * (1.0 - 4e-16));
  REQUIRE_THROWS_AS(adaptive_eps(0.0, 1.0), Error);
  REQUIRE_THROWS_AS(adaptive_eps(-0.1, 1.0), Error);
}

TEST_CASE("feature weights") {
  // face sample at the master centroid: min beta = 1/3 >= delta
  REQUIRE(face_weight(Vec3(1.0 / 3, 1.0 / 3, 1.0 / 3), 0.1) == 1.0);
  // fades to zero at the boundary
  REQUIRE(face_weight(Vec3(0.0, 0.5, 0.5), 0.1) == 0.0);
  REQUIRE(face_weight(Vec3(0.05, 0.45, 0.5), 0.1) == hermite_step(0.05, 0.1));

  // edge sample halfway into the transition zone
  const Real delta_e = 0.1;
  REQUIRE(edge_weight(delta_e / 2, delta_e) == 0.5);
  REQUIRE(edge_weight(0.5, delta_e) == 1.0);
  REQUIRE(edge_weight(0.0, delta_e) == 0.0);
  REQUIRE(edge_weight(1.0, delta_e) == 0.0);
  // symmetric in eta -> 1 - eta
  REQUIRE(edge_weight(0.93, delta_e) == Catch::Approx(edge_weight(0.07, delta_e)).epsilon(1e-14));
}

TEST_CASE("barrier parameter resolution fills derived stiffnesses") {
  BarrierParams p;
  p.kappa_face = 1e6;
  p.eps_max = 1e-3;
  const Real mean_edge = 0.25;
  const BarrierParams r = resolve_barrier_params(p, mean_edge);
  REQUIRE(r.kappa_edge == 1e-3 * 1e6 * mean_edge);
  REQUIRE(r.kappa_point == 1e-3 * 1e6 * mean_edge * mean_edge);
  REQUIRE(r.detection_radius == 10.0 * 1e-3);

  // explicit values survive resolution
  BarrierParams q = p;
  q.kappa_edge = 7.0;
  q.kappa_point = 13.0;
  q.detection_radius = 0.5;
  const BarrierParams rq = resolve_barrier_params(q, mean_edge);
  REQUIRE(rq.kappa_edge == 7.0);
  REQUIRE(rq.kappa_point == 13.0);
  REQUIRE(rq.detection_radius == 0.5);
}

TEST_CASE("barrier parameter validation") {
  BarrierParams p;
  p.kappa_face = -1;
  REQUIRE_THROWS_AS(resolve_barrier_params(p, 0.1), ConfigError);
  p = BarrierParams{};
  p.eps_max = 0;
  REQUIRE_THROWS_AS(resolve_barrier_params(p, 0.1), ConfigError);
  p = BarrierParams{};
  p.delta_face = 0.5;  // must lie in (0, 1/3]
  REQUIRE_THROWS_AS(resolve_barrier_params(p, 0.1), ConfigError);
  p = BarrierParams{};
  p.delta_edge = 0.7;  // must lie in (0, 1/2]
  REQUIRE_THROWS_AS(resolve_barrier_params(p, 0.1), ConfigError);
  p = BarrierParams{};
  p.quad_order_face = 5;
  REQUIRE_THROWS_AS(resolve_barrier_params(p, 0.1), ConfigError);
  p = BarrierParams{};
  p.quad_order_edge = 6;
  REQUIRE_THROWS_AS(resolve_barrier_params(p, 0.1), ConfigError);
  p = BarrierParams{};
  REQUIRE_THROWS_AS(resolve_barrier_params(p, 0.0), ConfigError);
}
