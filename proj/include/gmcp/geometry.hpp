// Triangle primitives: normals, barycentric solves, closest-point projection.
#pragma once

#include "gmcp/core.hpp"

namespace gmcp {

inline Real triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

// Unit normal following the winding of (a,b,c). Throws on degenerate input:
// the area cutoff is relative to the triangle's own bounding-box diagonal.
inline Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 cr = (b - a).cross(c - a);
  const Real diag2 = triangle_aabb(a, b, c).diagonal();
  const Real area_eps = 1e-12 * diag2 * diag2;
  if (0.5 * cr.norm() <= area_eps)
    throw MeshError("triangle_normal: degenerate triangle (area below cutoff)");
  return cr.normalized();
}

// Solves the 2x2 Gram system for the in-plane barycentric coordinates (v, w)
// of a displacement d = v*e1 + w*e2 + (out-of-plane part). The out-of-plane
// component of d does not influence the solution.
inline Vec2 solve_barycentric_gram(const Vec3& d, const Vec3& e1, const Vec3& e2) {
  const Real a11 = e1.dot(e1), a12 = e1.dot(e2), a22 = e2.dot(e2);
  const Real b1 = d.dot(e1), b2 = d.dot(e2);
  const Real det = a11 * a22 - a12 * a12;
  const Real gram_eps = 1e-14 * a11 * a22;
  if (!(det > gram_eps))
    throw MeshError("solve_barycentric_gram: near-degenerate edge basis");
  return Vec2((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det);
}

struct ClosestPointResult {
  Vec3 bary;   // barycentric coordinates of the clamped closest point
  Vec3 point;  // closest point on the closed triangle
  Real delta;  // signed offset of p from the triangle plane (along the winding normal)
};

// Closest point on the closed triangle (a,b,c) from p, via Voronoi-region
// classification. bary refers to the clamped point; delta is the plane offset
// of the unclamped projection, so p = plane_projection + delta * n.
inline ClosestPointResult closest_point_on_triangle(const Vec3& p, const Vec3& a,
                                                    const Vec3& b, const Vec3& c) {
  const Vec3 n = triangle_normal(a, b, c);
  ClosestPointResult res;
  res.delta = (p - a).dot(n);

  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const Real d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) {
    res.bary = Vec3(1, 0, 0);
    res.point = a;
    return res;
  }
  const Vec3 bp = p - b;
  const Real d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) {
    res.bary = Vec3(0, 1, 0);
    res.point = b;
    return res;
  }
  const Real vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    const Real v = d1 / (d1 - d3);
    res.bary = Vec3(1 - v, v, 0);
    res.point = a + v * ab;
    return res;
  }
  const Vec3 cp = p - c;
  const Real d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) {
    res.bary = Vec3(0, 0, 1);
    res.point = c;
    return res;
  }
  const Real vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    const Real w = d2 / (d2 - d6);
    res.bary = Vec3(1 - w, 0, w);
    res.point = a + w * ac;
    return res;
  }
  const Real va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    const Real w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    res.bary = Vec3(0, 1 - w, w);
    res.point = b + w * (c - b);
    return res;
  }
  const Real denom = 1.0 / (va + vb + vc);
  const Real v = vb * denom, w = vc * denom;
  res.bary = Vec3(1 - v - w, v, w);
  res.point = a + v * ab + w * ac;
  return res;
}

// 2D signed area of the triangle (a,b,c); positive for counter-clockwise winding.
inline Real signed_area_2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

// Unclamped barycentric coordinates of p with respect to the 2D triangle (a,b,c).
inline Vec3 barycentric_2d(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  const Real area = signed_area_2d(a, b, c);
  const Real diag = std::max({(b - a).norm(), (c - a).norm(), (c - b).norm()});
  if (std::abs(area) <= 1e-14 * diag * diag)
    throw MeshError("barycentric_2d: degenerate 2D triangle");
  const Real u = signed_area_2d(p, b, c) / area;
  const Real v = signed_area_2d(a, p, c) / area;
  return Vec3(u, v, 1.0 - u - v);
}

// Orthonormal in-plane frame of a triangle: origin a, axes t1 (along ab) and
// t2 = n x t1. Projection to this frame preserves the triangle's winding.
struct TangentFrame {
  Vec3 origin;
  Vec3 t1, t2, n;
  Vec2 to_plane(const Vec3& p) const {
    const Vec3 d = p - origin;
    return Vec2(d.dot(t1), d.dot(t2));
  }
};

inline TangentFrame tangent_frame(const Vec3& a, const Vec3& b, const Vec3& c) {
  TangentFrame f;
  f.n = triangle_normal(a, b, c);
  f.origin = a;
  f.t1 = (b - a).normalized();
  f.t2 = f.n.cross(f.t1);
  return f;
}

}  // namespace gmcp
