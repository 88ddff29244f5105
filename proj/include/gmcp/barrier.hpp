// Clamped log-barrier, smoothstep feature weights and the adaptive support
// radius. These are the scalar ingredients of the contact potential.
#pragma once

#include "gmcp/core.hpp"

namespace gmcp {

struct BarrierParams {
  Real kappa_face = 1e6;        // Pa/m, face-sample stiffness
  Real kappa_edge = -1;         // Pa; derived from kappa_face when negative
  Real kappa_point = -1;        // N/m; derived from kappa_face when negative
  Real eps_max = 1e-3;          // upper bound of the support radius (m)
  Real delta_face = 0.1;        // face-weight transition width (barycentric)
  Real delta_edge = 0.1;        // edge-weight transition width (edge parameter)
  Real detection_radius = -1;   // broadphase margin (m); derived when negative
  int quad_order_face = 2;
  int quad_order_edge = 2;
};

// Fills derived quantities and validates ranges. mean_slave_edge sets the
// length scale of the per-type stiffness defaults. Edge/point samples act as
// non-penetration guards; their default stiffness is kept small so that face
// samples carry essentially all pressure on surface-surface contact.
inline BarrierParams resolve_barrier_params(BarrierParams p, Real mean_slave_edge) {
  if (!(mean_slave_edge > 0))
    throw ConfigError("barrier params: mean slave edge length must be positive");
  if (!(p.kappa_face > 0)) throw ConfigError("barrier params: kappa_face must be positive");
  if (p.kappa_edge < 0) p.kappa_edge = 1e-3 * p.kappa_face * mean_slave_edge;
  if (p.kappa_point < 0) p.kappa_point = 1e-3 * p.kappa_face * mean_slave_edge * mean_slave_edge;
  if (!(p.kappa_edge > 0) || !(p.kappa_point > 0))
    throw ConfigError("barrier params: per-type stiffnesses must be positive");
  if (!(p.eps_max > 0)) throw ConfigError("barrier params: eps_max must be positive");
  if (!(p.delta_face > 0) || p.delta_face > 1.0 / 3.0)
    throw ConfigError("barrier params: delta_face must lie in (0, 1/3]");
  if (!(p.delta_edge > 0) || p.delta_edge > 0.5)
    throw ConfigError("barrier params: delta_edge must lie in (0, 1/2]");
  if (p.detection_radius < 0) p.detection_radius = 10.0 * p.eps_max;
  if (!(p.detection_radius > 0))
    throw ConfigError("barrier params: detection_radius must be positive");
  if (p.quad_order_face < 1 || p.quad_order_face > 4)
    throw ConfigError("barrier params: quad_order_face must lie in 1..4");
  if (p.quad_order_edge < 1 || p.quad_order_edge > 5)
    throw ConfigError("barrier params: quad_order_edge must lie in 1..5");
  return p;
}

struct BarrierEval {
  Real B = 0, dB = 0, ddB = 0;
};

// B(g, eps) = -(g - eps)^2 * ln(g / eps) on 0 < g < eps, zero beyond the
// support radius. B, B' and B'' all vanish at g = eps, so contact forces
// switch on C2-smoothly.
inline BarrierEval barrier(Real g, Real eps) {
  if (!(g > 0)) throw Error("barrier: non-positive gap");
  if (!(eps > 0)) throw Error("barrier: non-positive support radius");
  BarrierEval r;
  if (g >= eps) return r;
  const Real d = g - eps;
  const Real ln = std::log(g / eps);
  r.B = -d * d * ln;
  r.dB = -2.0 * d * ln - d * d / g;
  r.ddB = -2.0 * ln - 4.0 * d / g + d * d / (g * g);
  return r;
}

// Cubic smoothstep: 0 for x <= 0, 1 for x >= delta, 3t^2 - 2t^3 between.
inline Real hermite_step(Real x, Real delta) {
  if (x <= 0) return 0;
  if (x >= delta) return 1;
  const Real t = x / delta;
  return t * t * (3.0 - 2.0 * t);
}

// Support radius of one sample: strictly below the construction gap so a
// freshly built state exerts no force, capped by eps_max.
inline Real adaptive_eps(Real g_ref, Real eps_max) {
  if (!(g_ref > 0)) throw Error("adaptive_eps: non-positive reference gap");
  return std::min(0.9 * g_ref, eps_max);
}

// Face samples fade out near the master triangle's boundary.
inline Real face_weight(const Vec3& beta_m, Real delta_face) {
  return hermite_step(beta_m.minCoeff(), delta_face);
}

// Edge samples fade out near the master edge's endpoints.
inline Real edge_weight(Real eta, Real delta_edge) {
  return hermite_step(eta, delta_edge) * hermite_step(1.0 - eta, delta_edge);
}

}  // namespace gmcp
