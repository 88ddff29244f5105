// Barycentric embedding of a detailed surface in a simulated host surface.
// Each embedded vertex binds to its nearest host triangle and stores
// unclamped plane barycentrics plus a signed normal offset, so the rest
// state is reproduced exactly and rigid motions of the host carry the
// embedded surface along exactly.
#pragma once

#include "gmcp/bvh.hpp"
#include "gmcp/geometry.hpp"
#include "gmcp/tet_mesh.hpp"

namespace gmcp {

struct VertexEmbedding {
  int tri = -1;          // host triangle
  Vec3 bary = Vec3::Zero();  // plane barycentrics, unclamped
  Real offset = 0;       // signed distance along the host triangle normal
};

using SurfaceEmbedding = std::vector<VertexEmbedding>;

// Binds each point to the host triangle with the smallest point-triangle
// distance (lowest triangle index on ties). The stored coordinates describe
// the point's projection onto that triangle's plane, not the clamped
// closest point, so the reconstruction below is an identity at rest.
inline SurfaceEmbedding embed_in_surface(const std::vector<Vec3>& points,
                                         const SurfaceMesh& host, bool use_tree = true) {
  if (host.triangles.empty()) throw ConfigError("embedding host has no triangles");
  for (size_t t = 0; t < host.triangles.size(); ++t) {
    const auto& tri = host.triangles[t];
    const Vec3 e1 = host.vertices[tri[1]] - host.vertices[tri[0]];
    const Vec3 e2 = host.vertices[tri[2]] - host.vertices[tri[0]];
    if (!(e1.cross(e2).norm() > 0))
      throw MeshError("embedding host triangle " + std::to_string(t) + " is degenerate");
  }

  auto tri_pts = [&](int t) {
    const auto& tri = host.triangles[t];
    return std::array<Vec3, 3>{host.vertices[tri[0]], host.vertices[tri[1]],
                               host.vertices[tri[2]]};
  };
  auto sq_dist = [&](int t, const Vec3& p) {
    const auto v = tri_pts(t);
    return (closest_point_on_triangle(p, v[0], v[1], v[2]).point - p).squaredNorm();
  };

  AabbTree tree;
  if (use_tree) {
    std::vector<Aabb> boxes(host.triangles.size());
    for (size_t t = 0; t < host.triangles.size(); ++t) {
      const auto v = tri_pts(static_cast<int>(t));
      boxes[t] = triangle_aabb(v[0], v[1], v[2]);
    }
    tree = AabbTree(std::move(boxes));
  }

  SurfaceEmbedding emb(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    const Vec3& p = points[i];
    int best = -1;
    if (use_tree) {
      best = tree.nearest(p, [&](int t) { return sq_dist(t, p); }).first;
    } else {
      Real best_d2 = std::numeric_limits<Real>::max();
      for (size_t t = 0; t < host.triangles.size(); ++t) {
        const Real d2 = sq_dist(static_cast<int>(t), p);
        if (d2 < best_d2) {
          best_d2 = d2;
          best = static_cast<int>(t);
        }
      }
    }

    const auto v = tri_pts(best);
    const Vec3 n = triangle_normal(v[0], v[1], v[2]);
    const Vec3 d = p - v[0];
    const Vec2 vw = solve_barycentric_gram(d, v[1] - v[0], v[2] - v[0]);
    emb[i].tri = best;
    emb[i].bary = Vec3(1.0 - vw[0] - vw[1], vw[0], vw[1]);
    emb[i].offset = n.dot(d);
  }
  return emb;
}

// Reconstructs embedded vertex positions from deformed host positions.
inline std::vector<Vec3> apply_embedding(const SurfaceEmbedding& emb,
                                         const std::vector<std::array<int, 3>>& host_tris,
                                         const std::vector<Vec3>& host_positions) {
  std::vector<Vec3> out(emb.size());
  for (size_t i = 0; i < emb.size(); ++i) {
    const auto& e = emb[i];
    const auto& tri = host_tris[e.tri];
    const Vec3& v0 = host_positions[tri[0]];
    const Vec3& v1 = host_positions[tri[1]];
    const Vec3& v2 = host_positions[tri[2]];
    Vec3 n;
    try {
      n = triangle_normal(v0, v1, v2);
    } catch (const MeshError&) {
      throw MeshError("host triangle " + std::to_string(e.tri) +
                      " is degenerate in the deformed configuration");
    }
    out[i] = e.bary[0] * v0 + e.bary[1] * v1 + e.bary[2] * v2 + e.offset * n;
  }
  return out;
}

}  // namespace gmcp
