// Mortar-style contact sampling. The slave surface hosts integration samples
// and supplies the gap direction; master triangles, edges and vertices are
// projected into each slave triangle's tangent plane and sampled by clipped
// quadrature (faces), clipped 1D quadrature (edges) or direct projection
// (vertices). Samples are frozen snapshots: interpolation data, weights and
// support radii never change after construction.
#pragma once

#include "gmcp/barrier.hpp"
#include "gmcp/bvh.hpp"
#include "gmcp/quadrature.hpp"
#include "gmcp/tet_mesh.hpp"

#include <algorithm>

namespace gmcp {

enum class SampleType { Point = 0, Edge = 1, Face = 2 };

struct ContactSample {
  SampleType type = SampleType::Face;
  std::array<int, 3> slave = {-1, -1, -1};   // global vertex ids of the slave triangle
  std::array<int, 3> master = {-1, -1, -1};  // 3 ids (face), 2 (edge) or 1 (point)
  Vec3 beta_s = Vec3::Zero();                // slave interpolation, >= 0, sums to 1
  Vec3 beta_m = Vec3::Zero();                // face samples: master interpolation
  Real eta = 0;                              // edge samples: edge parameter in [0,1]
  Real weight = 0;                           // m^2 (face), m (edge), 1 (point)
  Real gamma = 1;                            // master-feature transition weight
  Real eps = 0;                              // frozen support radius
  Real g_ref = 0;                            // gap at the reference configuration
};

namespace sampling_detail {

inline Real cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Sutherland-Hodgman clip of a polygon against the CCW triangle (half-plane
// by half-plane). Points exactly on a clip edge count as inside.
inline std::vector<Vec2> clip_polygon_to_triangle(std::vector<Vec2> poly,
                                                  const std::array<Vec2, 3>& tri) {
  for (int e = 0; e < 3; ++e) {
    if (poly.size() < 3) break;
    const Vec2 a = tri[e];
    const Vec2 dir = tri[(e + 1) % 3] - a;
    std::vector<Vec2> out;
    out.reserve(poly.size() + 2);
    for (size_t i = 0; i < poly.size(); ++i) {
      const Vec2& p = poly[i];
      const Vec2& q = poly[(i + 1) % poly.size()];
      const Real dp = cross2(dir, p - a);
      const Real dq = cross2(dir, q - a);
      if (dp >= 0) out.push_back(p);
      if ((dp >= 0) != (dq >= 0)) out.push_back(p + dp / (dp - dq) * (q - p));
    }
    poly = std::move(out);
  }
  return poly;
}

inline void merge_close_vertices(std::vector<Vec2>& poly, Real tol) {
  std::vector<Vec2> out;
  for (const Vec2& p : poly)
    if (out.empty() || (p - out.back()).norm() > tol) out.push_back(p);
  while (out.size() >= 2 && (out.front() - out.back()).norm() <= tol) out.pop_back();
  poly = std::move(out);
}

inline Real polygon_area(const std::vector<Vec2>& poly) {
  Real twice = 0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    twice += cross2(p, q);
  }
  return 0.5 * twice;
}

// Interpolation data must stay inside the simplex; clamp the fp noise that
// clipping introduces at polygon boundaries.
inline Vec3 clamp_bary(Vec3 b) {
  b = b.cwiseMax(0.0);
  return b / (b[0] + b[1] + b[2]);
}

// Mean edge length of one triangle, the local tolerance scale. Clipping
// tolerances scale with the slave triangle itself rather than a mesh-wide
// mean: graded meshes vary element size by orders of magnitude.
inline Real local_scale(const std::array<Vec3, 3>& s) {
  return ((s[1] - s[0]).norm() + (s[2] - s[0]).norm() + (s[2] - s[1]).norm()) / 3.0;
}

}  // namespace sampling_detail

// Face samples: clip the projected master triangle against the slave
// triangle, fan-triangulate the overlap from its first vertex and place a
// 2D quadrature rule on each sub-triangle. Weights sum to the overlap area.
inline std::vector<ContactSample> sample_face(const std::array<Vec3, 3>& s,
                                              const std::array<Vec3, 3>& m,
                                              const BarrierParams& params) {
  using namespace sampling_detail;
  std::vector<ContactSample> out;
  const TangentFrame f = tangent_frame(s[0], s[1], s[2]);
  const std::array<Vec2, 3> s2 = {f.to_plane(s[0]), f.to_plane(s[1]), f.to_plane(s[2])};
  const std::array<Vec2, 3> m2 = {f.to_plane(m[0]), f.to_plane(m[1]), f.to_plane(m[2])};
  const Real scale = local_scale(s);
  const Real merge_tol = 1e-12 * scale;
  const Real area_tol = 1e-14 * scale * scale;

  // Master triangles seen edge-on project to slivers and generate nothing.
  const Real m_area = signed_area_2d(m2[0], m2[1], m2[2]);
  if (std::abs(m_area) <= area_tol) return out;

  std::vector<Vec2> poly = {m2[0], m2[1], m2[2]};
  if (m_area < 0) std::swap(poly[1], poly[2]);  // clip with a CCW subject
  poly = clip_polygon_to_triangle(std::move(poly), s2);
  merge_close_vertices(poly, merge_tol);
  if (poly.size() < 3 || polygon_area(poly) <= area_tol) return out;

  const auto quad = triangle_quadrature(params.quad_order_face);
  for (size_t i = 1; i + 1 < poly.size(); ++i) {
    const Vec2 p0 = poly[0], p1 = poly[i], p2 = poly[i + 1];
    const Real sub_area = signed_area_2d(p0, p1, p2);
    if (sub_area <= area_tol) continue;
    for (const auto& qp : quad) {
      const Vec2 pt = qp.b0 * p0 + qp.b1 * p1 + qp.b2 * p2;
      ContactSample smp;
      smp.type = SampleType::Face;
      smp.beta_s = clamp_bary(barycentric_2d(pt, s2[0], s2[1], s2[2]));
      smp.beta_m = barycentric_2d(pt, m2[0], m2[1], m2[2]);
      smp.weight = qp.w * sub_area;
      smp.gamma = face_weight(smp.beta_m, params.delta_face);
      const Vec3 xs = smp.beta_s[0] * s[0] + smp.beta_s[1] * s[1] + smp.beta_s[2] * s[2];
      const Vec3 xm = smp.beta_m[0] * m[0] + smp.beta_m[1] * m[1] + smp.beta_m[2] * m[2];
      const Real g = f.n.dot(xm - xs);
      smp.g_ref = g;
      smp.eps = g > 0 ? adaptive_eps(g, params.eps_max) : 0.0;
      out.push_back(smp);
    }
  }
  return out;
}

// Edge samples: clip the projected master edge to the parameter interval
// lying inside the slave triangle, then apply 1D Gauss quadrature. Weights
// sum to the clipped 3D edge length.
inline std::vector<ContactSample> sample_edge(const std::array<Vec3, 3>& s,
                                              const std::array<Vec3, 2>& edge,
                                              const BarrierParams& params) {
  using namespace sampling_detail;
  std::vector<ContactSample> out;
  const TangentFrame f = tangent_frame(s[0], s[1], s[2]);
  const std::array<Vec2, 3> s2 = {f.to_plane(s[0]), f.to_plane(s[1]), f.to_plane(s[2])};
  const Real scale = local_scale(s);
  const Vec2 q0 = f.to_plane(edge[0]);
  const Vec2 dq = f.to_plane(edge[1]) - q0;
  if (dq.norm() <= 1e-12 * scale) return out;  // edge projects to a point

  Real t0 = 0, t1 = 1;
  for (int e = 0; e < 3; ++e) {
    const Vec2 a = s2[e];
    const Vec2 dir = s2[(e + 1) % 3] - a;
    // inside requires cross(dir, q(t) - a) = ca + t*dc >= 0
    const Real ca = cross2(dir, q0 - a);
    const Real dc = cross2(dir, dq);
    if (std::abs(dc) <= 1e-14 * scale * scale) {
      if (ca < 0) return out;
    } else if (dc > 0) {
      t0 = std::max(t0, -ca / dc);
    } else {
      t1 = std::min(t1, -ca / dc);
    }
  }
  if (!(t1 - t0 > 1e-12)) return out;

  const Real len3 = (edge[1] - edge[0]).norm() * (t1 - t0);
  for (const auto& qp : segment_quadrature(params.quad_order_edge)) {
    const Real eta = t0 + (t1 - t0) * qp.t;
    ContactSample smp;
    smp.type = SampleType::Edge;
    smp.eta = eta;
    smp.beta_s = clamp_bary(barycentric_2d(Vec2(q0 + eta * dq), s2[0], s2[1], s2[2]));
    smp.weight = qp.w * len3;
    smp.gamma = edge_weight(eta, params.delta_edge);
    const Vec3 xs = smp.beta_s[0] * s[0] + smp.beta_s[1] * s[1] + smp.beta_s[2] * s[2];
    const Vec3 xm = (1.0 - eta) * edge[0] + eta * edge[1];
    const Real g = f.n.dot(xm - xs);
    smp.g_ref = g;
    smp.eps = g > 0 ? adaptive_eps(g, params.eps_max) : 0.0;
    out.push_back(smp);
  }
  return out;
}

// Point sample: one sample when the vertex's tangent-plane projection lands
// inside the closed slave triangle.
inline std::vector<ContactSample> sample_point(const std::array<Vec3, 3>& s, const Vec3& v,
                                               const BarrierParams& params) {
  using namespace sampling_detail;
  std::vector<ContactSample> out;
  const TangentFrame f = tangent_frame(s[0], s[1], s[2]);
  const Vec3 bary =
      barycentric_2d(f.to_plane(v), f.to_plane(s[0]), f.to_plane(s[1]), f.to_plane(s[2]));
  if (bary.minCoeff() < -1e-12) return out;
  ContactSample smp;
  smp.type = SampleType::Point;
  smp.beta_s = clamp_bary(bary);
  smp.weight = 1;
  smp.gamma = 1;
  const Vec3 xs = smp.beta_s[0] * s[0] + smp.beta_s[1] * s[1] + smp.beta_s[2] * s[2];
  const Real g = f.n.dot(v - xs);
  smp.g_ref = g;
  smp.eps = g > 0 ? adaptive_eps(g, params.eps_max) : 0.0;
  out.push_back(smp);
  return out;
}

// One side of a contact pair: surface features addressed by global vertex ids
// into the solver's flat position vector.
struct ContactSurface {
  std::vector<std::array<int, 3>> tris;
  std::vector<std::array<int, 2>> edges;      // lo < hi, unique
  std::vector<std::array<int, 3>> tri_edges;  // per-triangle edge indices
  std::vector<int> verts;                     // ascending unique
};

inline ContactSurface make_contact_surface(const SurfaceMesh& s, int vertex_offset = 0,
                                           const std::vector<int>* tri_subset = nullptr) {
  ContactSurface cs;
  auto global = [&](int sv) { return vertex_offset + s.vertex_map[sv]; };
  auto add_tri = [&](const std::array<int, 3>& tri) {
    cs.tris.push_back({global(tri[0]), global(tri[1]), global(tri[2])});
  };
  if (tri_subset) {
    for (int t : *tri_subset) add_tri(s.triangles[t]);
  } else {
    for (const auto& tri : s.triangles) add_tri(tri);
  }

  std::map<std::pair<int, int>, int> edge_index;
  cs.tri_edges.assign(cs.tris.size(), {-1, -1, -1});
  for (size_t t = 0; t < cs.tris.size(); ++t)
    for (int e = 0; e < 3; ++e) {
      int a = cs.tris[t][e], b = cs.tris[t][(e + 1) % 3];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = edge_index.try_emplace({a, b}, static_cast<int>(cs.edges.size()));
      if (inserted) cs.edges.push_back({a, b});
      cs.tri_edges[t][e] = it->second;
    }

  cs.verts.reserve(3 * cs.tris.size());
  for (const auto& tri : cs.tris) cs.verts.insert(cs.verts.end(), tri.begin(), tri.end());
  std::sort(cs.verts.begin(), cs.verts.end());
  cs.verts.erase(std::unique(cs.verts.begin(), cs.verts.end()), cs.verts.end());
  return cs;
}

inline Real mean_edge_length(const ContactSurface& s, const VecX& x) {
  if (s.edges.empty()) throw ConfigError("contact surface has no edges");
  Real sum = 0;
  for (const auto& e : s.edges)
    sum += (x.segment<3>(3 * e[0]) - x.segment<3>(3 * e[1])).norm();
  return sum / static_cast<Real>(s.edges.size());
}

// Candidate master features per slave triangle, found by inflated-AABB
// overlap. Feature ids index the master surface's tris/edges/verts arrays.
struct CandidateSet {
  std::vector<int> tris, edges, verts;
};

struct ContactPairSet {
  std::vector<CandidateSet> per_slave_tri;

  size_t total_candidates() const {
    size_t n = 0;
    for (const auto& c : per_slave_tri) n += c.tris.size() + c.edges.size() + c.verts.size();
    return n;
  }
};

inline ContactPairSet build_candidate_pairs(const ContactSurface& slave,
                                            const ContactSurface& master, const VecX& x,
                                            Real detection_radius, bool use_tree = true) {
  if (!(detection_radius > 0))
    throw ConfigError("build_candidate_pairs: detection radius must be positive");
  // Shared vertices would make the pair self-contacting.
  {
    std::vector<int> shared;
    std::set_intersection(slave.verts.begin(), slave.verts.end(), master.verts.begin(),
                          master.verts.end(), std::back_inserter(shared));
    if (!shared.empty())
      throw ConfigError("build_candidate_pairs: slave and master share vertices "
                        "(self-contact is not supported)");
  }

  auto tri_box = [&](const ContactSurface& s, size_t t) {
    return triangle_aabb(x.segment<3>(3 * s.tris[t][0]), x.segment<3>(3 * s.tris[t][1]),
                         x.segment<3>(3 * s.tris[t][2]));
  };

  AabbTree tree;
  if (use_tree) {
    std::vector<Aabb> boxes(master.tris.size());
    for (size_t t = 0; t < master.tris.size(); ++t) boxes[t] = tri_box(master, t);
    tree = AabbTree(std::move(boxes));
  }

  // Global vertex id -> index into master.verts (which is sorted).
  auto vert_feature = [&](int gv) {
    const auto it = std::lower_bound(master.verts.begin(), master.verts.end(), gv);
    return static_cast<int>(it - master.verts.begin());
  };

  ContactPairSet pairs;
  pairs.per_slave_tri.resize(slave.tris.size());
  std::vector<int> tri_hits;
  for (size_t st = 0; st < slave.tris.size(); ++st) {
    const Aabb query = tri_box(slave, st).inflated(detection_radius);
    tri_hits.clear();
    if (use_tree) {
      tree.for_each_overlap(query, [&](int mt) { tri_hits.push_back(mt); });
    } else {
      for (size_t mt = 0; mt < master.tris.size(); ++mt)
        if (query.overlaps(tri_box(master, mt))) tri_hits.push_back(static_cast<int>(mt));
    }
    std::sort(tri_hits.begin(), tri_hits.end());

    CandidateSet& cand = pairs.per_slave_tri[st];
    cand.tris = tri_hits;
    for (int mt : tri_hits) {
      for (int e : master.tri_edges[mt]) cand.edges.push_back(e);
      for (int gv : master.tris[mt]) cand.verts.push_back(vert_feature(gv));
    }
    std::sort(cand.edges.begin(), cand.edges.end());
    cand.edges.erase(std::unique(cand.edges.begin(), cand.edges.end()), cand.edges.end());
    std::sort(cand.verts.begin(), cand.verts.end());
    cand.verts.erase(std::unique(cand.verts.begin(), cand.verts.end()), cand.verts.end());
  }
  return pairs;
}

// Frozen sampling of one contact pair.
struct ContactState {
  std::vector<ContactSample> samples;
  VecX reference_positions;  // nodal positions at sampling time
};

// Gap of one sample at arbitrary positions: the slave triangle supplies the
// normal, interpolation stays frozen.
inline Real sample_gap(const ContactSample& s, const VecX& x) {
  const Vec3 a0 = x.segment<3>(3 * s.slave[0]);
  const Vec3 a1 = x.segment<3>(3 * s.slave[1]);
  const Vec3 a2 = x.segment<3>(3 * s.slave[2]);
  const Vec3 n = triangle_normal(a0, a1, a2);
  const Vec3 xs = s.beta_s[0] * a0 + s.beta_s[1] * a1 + s.beta_s[2] * a2;
  Vec3 xm;
  switch (s.type) {
    case SampleType::Face:
      xm = s.beta_m[0] * x.segment<3>(3 * s.master[0]) +
           s.beta_m[1] * x.segment<3>(3 * s.master[1]) +
           s.beta_m[2] * x.segment<3>(3 * s.master[2]);
      break;
    case SampleType::Edge:
      xm = (1.0 - s.eta) * x.segment<3>(3 * s.master[0]) +
           s.eta * x.segment<3>(3 * s.master[1]);
      break;
    case SampleType::Point:
      xm = x.segment<3>(3 * s.master[0]);
      break;
  }
  return n.dot(xm - xs);
}

// Builds the frozen sample set for one pair. Sampling geometry is taken
// from x; samples with non-positive gap at x are rejected (states are only
// built at penetration-free configurations). When eps_reference is given
// (solver rebuilds), reference gaps for the support radii are evaluated at
// those stored positions instead of at x, so re-sampling cannot ratchet the
// support radius of an established contact down to its current gap and
// deactivate it. Samples whose gap at the stored positions is non-positive
// (contacts that did not exist there) fall back to their gap at x.
inline ContactState build_contact_state(const ContactSurface& slave,
                                        const ContactSurface& master,
                                        const ContactPairSet& pairs, const VecX& x,
                                        const BarrierParams& params,
                                        const VecX* eps_reference = nullptr) {
  using namespace sampling_detail;
  if (pairs.per_slave_tri.size() != slave.tris.size())
    throw ConfigError("build_contact_state: pair set does not match slave surface");

  ContactState state;
  state.reference_positions = x;

  auto slave_pts = [&](size_t st) {
    return std::array<Vec3, 3>{x.segment<3>(3 * slave.tris[st][0]),
                               x.segment<3>(3 * slave.tris[st][1]),
                               x.segment<3>(3 * slave.tris[st][2])};
  };

  // Point-sample deduplication: a master vertex projecting onto the boundary
  // of several slave triangles (shared edge or vertex) belongs to the
  // lowest-indexed one; interior projections are kept wherever they occur.
  std::vector<std::vector<int>> verts_by_slave_tri(slave.tris.size());
  {
    std::vector<std::vector<int>> slave_tris_by_vert(master.verts.size());
    for (size_t st = 0; st < slave.tris.size(); ++st)
      for (int mv : pairs.per_slave_tri[st].verts)
        slave_tris_by_vert[mv].push_back(static_cast<int>(st));

    const Real boundary_tol = 1e-9;
    for (size_t mv = 0; mv < master.verts.size(); ++mv) {
      const Vec3 v = x.segment<3>(3 * master.verts[mv]);
      int first_boundary_tri = -1;
      bool any_interior = false;
      std::vector<int> interior_tris;
      for (int st : slave_tris_by_vert[mv]) {
        const auto s = slave_pts(st);
        const TangentFrame f = tangent_frame(s[0], s[1], s[2]);
        const Vec3 bary = barycentric_2d(f.to_plane(v), f.to_plane(s[0]), f.to_plane(s[1]),
                                         f.to_plane(s[2]));
        const Real mn = bary.minCoeff();
        if (mn < -1e-12) continue;  // outside
        if (mn > boundary_tol) {
          any_interior = true;
          interior_tris.push_back(st);
        } else if (first_boundary_tri < 0) {
          first_boundary_tri = st;
        }
      }
      if (any_interior) {
        for (int st : interior_tris) verts_by_slave_tri[st].push_back(static_cast<int>(mv));
      } else if (first_boundary_tri >= 0) {
        verts_by_slave_tri[first_boundary_tri].push_back(static_cast<int>(mv));
      }
    }
  }

  for (size_t st = 0; st < slave.tris.size(); ++st) {
    const auto s = slave_pts(st);
    const CandidateSet& cand = pairs.per_slave_tri[st];

    for (int mt : cand.tris) {
      const std::array<Vec3, 3> m = {x.segment<3>(3 * master.tris[mt][0]),
                                     x.segment<3>(3 * master.tris[mt][1]),
                                     x.segment<3>(3 * master.tris[mt][2])};
      for (ContactSample smp : sample_face(s, m, params)) {
        smp.slave = slave.tris[st];
        smp.master = master.tris[mt];
        state.samples.push_back(smp);
      }
    }
    for (int me : cand.edges) {
      const std::array<Vec3, 2> e = {x.segment<3>(3 * master.edges[me][0]),
                                     x.segment<3>(3 * master.edges[me][1])};
      for (ContactSample smp : sample_edge(s, e, params)) {
        smp.slave = slave.tris[st];
        smp.master = {master.edges[me][0], master.edges[me][1], -1};
        state.samples.push_back(smp);
      }
    }
    for (int mv : verts_by_slave_tri[st]) {
      for (ContactSample smp : sample_point(s, x.segment<3>(3 * master.verts[mv]), params)) {
        smp.slave = slave.tris[st];
        smp.master = {master.verts[mv], -1, -1};
        state.samples.push_back(smp);
      }
    }
  }

  // Freeze support radii; reject anything that is not penetration-free.
  std::vector<ContactSample> kept;
  kept.reserve(state.samples.size());
  for (auto& smp : state.samples) {
    const Real g_now = sample_gap(smp, x);
    if (!(g_now > 0)) continue;
    Real g_ref = g_now;
    if (eps_reference) {
      const Real g_stored = sample_gap(smp, *eps_reference);
      if (g_stored > 0) g_ref = g_stored;
    }
    smp.g_ref = g_ref;
    smp.eps = adaptive_eps(g_ref, params.eps_max);
    kept.push_back(smp);
  }
  state.samples = std::move(kept);
  return state;
}

}  // namespace gmcp
