// Barrier energy over a frozen contact sample set, with analytic gradient
// and a Gauss-Newton Hessian. The gap gradient includes the derivative of
// the slave triangle normal, so the sample-level gradient sums to zero over
// all involved vertices and the potential is translation invariant.
#pragma once

#include "gmcp/contact_sampling.hpp"

#include <Eigen/SparseCore>

#include <optional>

namespace gmcp {

// Gap value, normal and per-vertex gap gradient of one sample.
struct SampleKinematics {
  Real g = 0;
  Vec3 n = Vec3::Zero();
  Vec3 xs = Vec3::Zero();
  Vec3 xm = Vec3::Zero();
  int nv = 0;                   // slave vertices first, then master vertices
  std::array<int, 6> ids{};     // global vertex ids
  std::array<Vec3, 6> dg{};     // d g / d x_id
};

inline SampleKinematics sample_kinematics(const ContactSample& s, const VecX& x,
                                          bool with_gradient = true) {
  SampleKinematics k;
  const Vec3 a0 = x.segment<3>(3 * s.slave[0]);
  const Vec3 a1 = x.segment<3>(3 * s.slave[1]);
  const Vec3 a2 = x.segment<3>(3 * s.slave[2]);
  const Vec3 e1 = a1 - a0;
  const Vec3 e2 = a2 - a0;
  const Vec3 c = e1.cross(e2);
  const Real cn = c.norm();
  if (!(cn > 0)) throw MeshError("contact sample on a degenerate slave triangle");
  k.n = c / cn;
  k.xs = s.beta_s[0] * a0 + s.beta_s[1] * a1 + s.beta_s[2] * a2;

  int nm = 0;
  Vec3 wm = Vec3::Zero();  // master interpolation weights
  switch (s.type) {
    case SampleType::Face:
      nm = 3;
      wm = s.beta_m;
      break;
    case SampleType::Edge:
      nm = 2;
      wm = Vec3(1.0 - s.eta, s.eta, 0);
      break;
    case SampleType::Point:
      nm = 1;
      wm = Vec3(1, 0, 0);
      break;
  }
  k.xm = Vec3::Zero();
  for (int j = 0; j < nm; ++j) k.xm += wm[j] * x.segment<3>(3 * s.master[j]);

  const Vec3 d = k.xm - k.xs;
  k.g = k.n.dot(d);
  k.nv = 3 + nm;
  for (int i = 0; i < 3; ++i) k.ids[i] = s.slave[i];
  for (int j = 0; j < nm; ++j) k.ids[3 + j] = s.master[j];
  if (!with_gradient) return k;

  // r carries the normal's dependence on the slave vertices.
  const Vec3 r = (d - k.g * k.n) / cn;
  k.dg[0] = -s.beta_s[0] * k.n + r.cross(e2 - e1);
  k.dg[1] = -s.beta_s[1] * k.n + e2.cross(r);
  k.dg[2] = -s.beta_s[2] * k.n + r.cross(e1);
  for (int j = 0; j < nm; ++j) k.dg[3 + j] = wm[j] * k.n;
  return k;
}

inline Real sample_kappa(SampleType type, const BarrierParams& params) {
  switch (type) {
    case SampleType::Face:
      return params.kappa_face;
    case SampleType::Edge:
      return params.kappa_edge;
    default:
      return params.kappa_point;
  }
}

struct ContactEnergyResult {
  bool feasible = true;  // false when any sample gap is non-positive
  Real energy = 0;
  Real min_gap = std::numeric_limits<Real>::max();
};

// Energy that reports infeasibility instead of throwing; the line search
// uses it to reject steps that cross a contact plane between filter-safe
// iterates.
inline ContactEnergyResult try_contact_energy(const ContactState& state,
                                              const BarrierParams& params, const VecX& x) {
  ContactEnergyResult res;
  for (const auto& s : state.samples) {
    const Real g = sample_gap(s, x);
    res.min_gap = std::min(res.min_gap, g);
    if (!(g > 0)) {
      res.feasible = false;
      return res;
    }
    res.energy += sample_kappa(s.type, params) * s.weight * s.gamma * barrier(g, s.eps).B;
  }
  return res;
}

inline Real contact_energy(const ContactState& state, const BarrierParams& params,
                           const VecX& x) {
  Real energy = 0;
  for (size_t i = 0; i < state.samples.size(); ++i) {
    const auto& s = state.samples[i];
    const Real g = sample_gap(s, x);
    if (!(g > 0))
      throw InfeasibleGapError("contact sample " + std::to_string(i) +
                                   " has non-positive gap " + format_real(g),
                               static_cast<long>(i));
    energy += sample_kappa(s.type, params) * s.weight * s.gamma * barrier(g, s.eps).B;
  }
  return energy;
}

// Adds the contact gradient to grad and returns the contact energy.
inline Real add_contact_gradient(const ContactState& state, const BarrierParams& params,
                                 const VecX& x, VecX& grad) {
  Real energy = 0;
  for (size_t i = 0; i < state.samples.size(); ++i) {
    const auto& s = state.samples[i];
    const SampleKinematics k = sample_kinematics(s, x);
    if (!(k.g > 0))
      throw InfeasibleGapError("contact sample " + std::to_string(i) +
                                   " has non-positive gap " + format_real(k.g),
                               static_cast<long>(i));
    const BarrierEval b = barrier(k.g, s.eps);
    const Real coef = sample_kappa(s.type, params) * s.weight * s.gamma;
    energy += coef * b.B;
    for (int v = 0; v < k.nv; ++v) grad.segment<3>(3 * k.ids[v]) += coef * b.dB * k.dg[v];
  }
  return energy;
}

// Gradient plus the Gauss-Newton Hessian coef * max(B'', 0) * dg dg^T, which
// drops the indefinite normal-curvature term B' * d2g. Returns the energy.
inline Real add_contact_gradient_hessian(const ContactState& state,
                                         const BarrierParams& params, const VecX& x,
                                         VecX& grad, std::vector<Eigen::Triplet<Real>>& H) {
  Real energy = 0;
  for (size_t i = 0; i < state.samples.size(); ++i) {
    const auto& s = state.samples[i];
    const SampleKinematics k = sample_kinematics(s, x);
    if (!(k.g > 0))
      throw InfeasibleGapError("contact sample " + std::to_string(i) +
                                   " has non-positive gap " + format_real(k.g),
                               static_cast<long>(i));
    const BarrierEval b = barrier(k.g, s.eps);
    const Real coef = sample_kappa(s.type, params) * s.weight * s.gamma;
    energy += coef * b.B;
    const Real h = coef * std::max(b.ddB, 0.0);
    for (int v = 0; v < k.nv; ++v) {
      grad.segment<3>(3 * k.ids[v]) += coef * b.dB * k.dg[v];
      if (h == 0) continue;
      // entries formed as h * (dg_v[a] * dg_w[c]) so that the mirror entry is
      // the bitwise-identical product and the assembled matrix is exactly
      // symmetric
      for (int w = 0; w < k.nv; ++w)
        for (int a = 0; a < 3; ++a) {
          const Real va = k.dg[v][a];
          if (va == 0) continue;
          for (int c = 0; c < 3; ++c) {
            const Real entry = h * (va * k.dg[w][c]);
            if (entry != 0) H.emplace_back(3 * k.ids[v] + a, 3 * k.ids[w] + c, entry);
          }
        }
    }
  }
  return energy;
}

// Largest step fraction keeping every sampled gap away from zero: alpha is
// capped at 0.9 * g / (-dg . dx) for each sample whose gap shrinks along dx
// (first-order estimate; the line search still verifies actual feasibility).
inline Real step_filter(const ContactState& state, const VecX& x, const VecX& dx) {
  Real alpha = 1.0;
  for (const auto& s : state.samples) {
    const SampleKinematics k = sample_kinematics(s, x);
    Real dgdx = 0;
    for (int v = 0; v < k.nv; ++v) dgdx += k.dg[v].dot(dx.segment<3>(3 * k.ids[v]));
    if (dgdx < 0) alpha = std::min(alpha, 0.9 * k.g / (-dgdx));
  }
  return alpha;
}

// When any sample is inside its support (g < eps), additionally limit every
// vertex to a displacement of 0.5 * eps_max per step so the sampling pattern
// cannot be outrun between rebuilds.
inline Real displacement_cap(const ContactState& state, const BarrierParams& params,
                             const VecX& x, const VecX& dx) {
  bool active = false;
  for (const auto& s : state.samples) {
    if (sample_gap(s, x) < s.eps) {
      active = true;
      break;
    }
  }
  if (!active) return 1.0;
  Real max_move = 0;
  for (Eigen::Index v = 0; v < dx.size() / 3; ++v)
    max_move = std::max(max_move, dx.segment<3>(3 * v).norm());
  if (max_move <= 0.5 * params.eps_max) return 1.0;
  return 0.5 * params.eps_max / max_move;
}

// Pressure at a face sample: the barrier traction kappa * gamma * (-B'),
// in Pa. Inactive samples report zero so profiles cover the whole overlap.
struct PressureRecord {
  long sample = -1;
  Vec3 position = Vec3::Zero();  // slave-side sample point
  Real radius = 0;               // distance from the z axis
  Real gap = 0;
  Real pressure = 0;
};

inline std::vector<PressureRecord> contact_pressure_field(const ContactState& state,
                                                          const BarrierParams& params,
                                                          const VecX& x) {
  std::vector<PressureRecord> out;
  for (size_t i = 0; i < state.samples.size(); ++i) {
    const auto& s = state.samples[i];
    if (s.type != SampleType::Face) continue;
    const SampleKinematics k = sample_kinematics(s, x, false);
    PressureRecord rec;
    rec.sample = static_cast<long>(i);
    rec.position = k.xs;
    rec.radius = std::hypot(k.xs.x(), k.xs.y());
    rec.gap = k.g;
    rec.pressure = params.kappa_face * s.gamma * (-barrier(k.g, s.eps).dB);
    out.push_back(rec);
  }
  return out;
}

// Net contact force applied to the slave side, split by sample type. The
// master side receives the exact negative.
struct ContactForceSummary {
  Vec3 face = Vec3::Zero();
  Vec3 edge = Vec3::Zero();
  Vec3 point = Vec3::Zero();
  Vec3 total = Vec3::Zero();
};

inline ContactForceSummary contact_force_summary(const ContactState& state,
                                                 const BarrierParams& params, const VecX& x) {
  ContactForceSummary sum;
  for (const auto& s : state.samples) {
    const SampleKinematics k = sample_kinematics(s, x);
    if (!(k.g > 0)) continue;
    const Real coef = sample_kappa(s.type, params) * s.weight * s.gamma;
    Vec3 f = Vec3::Zero();
    for (int v = 0; v < 3; ++v) f -= coef * barrier(k.g, s.eps).dB * k.dg[v];
    switch (s.type) {
      case SampleType::Face:
        sum.face += f;
        break;
      case SampleType::Edge:
        sum.edge += f;
        break;
      case SampleType::Point:
        sum.point += f;
        break;
    }
  }
  sum.total = sum.face + sum.edge + sum.point;
  return sum;
}

}  // namespace gmcp
