// Tetrahedral volume meshes, structured block generation and boundary
// surface extraction.
#pragma once

#include "gmcp/geometry.hpp"

#include <algorithm>
#include <map>

namespace gmcp {

struct TetMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;
};

inline Real tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

inline Real tet_signed_volume(const TetMesh& m, int t) {
  const auto& tet = m.tets[t];
  return tet_signed_volume(m.vertices[tet[0]], m.vertices[tet[1]], m.vertices[tet[2]],
                           m.vertices[tet[3]]);
}

// Every tet must end up with positive signed volume; negatively oriented tets
// are repaired by swapping two vertices, degenerate ones are an error.
inline void orient_tets_positive(TetMesh& m) {
  for (size_t t = 0; t < m.tets.size(); ++t) {
    Real vol = tet_signed_volume(m, static_cast<int>(t));
    if (vol < 0) {
      std::swap(m.tets[t][2], m.tets[t][3]);
      vol = -vol;
    }
    if (!(vol > 0))
      throw MeshError("tet " + std::to_string(t) + " is degenerate (zero volume)");
  }
}

inline Real mesh_volume(const TetMesh& m) {
  Real vol = 0;
  for (size_t t = 0; t < m.tets.size(); ++t) vol += tet_signed_volume(m, static_cast<int>(t));
  return vol;
}

inline Aabb mesh_aabb(const TetMesh& m) {
  Aabb box;
  for (const auto& v : m.vertices) box.extend(v);
  return box;
}

// Axis-aligned block of given size split into divisions[d] cells per axis,
// each hexahedral cell subdivided into six tets sharing the cell's main
// diagonal. Neighbouring cells share face diagonals, so the mesh conforms.
inline TetMesh make_block(const Vec3& size, const std::array<int, 3>& divisions,
                          const Vec3& origin = Vec3::Zero()) {
  for (int d = 0; d < 3; ++d) {
    if (divisions[d] < 1) throw ConfigError("make_block: divisions must be >= 1");
    if (!(size[d] > 0)) throw ConfigError("make_block: size must be positive");
  }
  const int nx = divisions[0], ny = divisions[1], nz = divisions[2];
  TetMesh m;
  auto vid = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
  m.vertices.resize((nx + 1) * (ny + 1) * (nz + 1));
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        m.vertices[vid(i, j, k)] =
            origin + Vec3(size.x() * i / nx, size.y() * j / ny, size.z() * k / nz);

  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (const auto& p : perms) {
          std::array<int, 3> at = {i, j, k};
          std::array<int, 4> tet;
          tet[0] = vid(at[0], at[1], at[2]);
          for (int s = 0; s < 3; ++s) {
            ++at[p[s]];
            tet[s + 1] = vid(at[0], at[1], at[2]);
          }
          m.tets.push_back(tet);
        }
  orient_tets_positive(m);
  return m;
}

struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  // Surface vertex -> vertex index of the parent volume mesh. Identity for
  // standalone surfaces (e.g. visual meshes loaded from file).
  std::vector<int> vertex_map;
  std::vector<std::array<int, 2>> edges;      // unique undirected, lo < hi
  std::vector<std::array<int, 3>> tri_edges;  // per-triangle edge ids
};

// Rebuilds the unique undirected edge list and the per-triangle edge ids.
inline void build_surface_edges(SurfaceMesh& s) {
  s.edges.clear();
  s.tri_edges.assign(s.triangles.size(), {-1, -1, -1});
  std::map<std::pair<int, int>, int> index;
  for (size_t t = 0; t < s.triangles.size(); ++t) {
    const auto& tri = s.triangles[t];
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = index.try_emplace({a, b}, static_cast<int>(s.edges.size()));
      if (inserted) s.edges.push_back({a, b});
      s.tri_edges[t][e] = it->second;
    }
  }
}

inline Real surface_area(const SurfaceMesh& s) {
  Real area = 0;
  for (const auto& tri : s.triangles)
    area += triangle_area(s.vertices[tri[0]], s.vertices[tri[1]], s.vertices[tri[2]]);
  return area;
}

// Boundary faces are those used by exactly one tet, wound so normals point
// out of the volume. A face referenced by more than two tets is invalid.
inline SurfaceMesh extract_boundary_surface(const TetMesh& m) {
  struct FaceRef {
    std::array<int, 3> oriented;
    int count = 0;
  };
  std::map<std::array<int, 3>, FaceRef> faces;
  for (const auto& tet : m.tets) {
    // Outward-facing windings of a positively oriented tet.
    const std::array<std::array<int, 3>, 4> f = {{{tet[0], tet[2], tet[1]},
                                                  {tet[0], tet[1], tet[3]},
                                                  {tet[0], tet[3], tet[2]},
                                                  {tet[1], tet[2], tet[3]}}};
    for (const auto& tri : f) {
      std::array<int, 3> key = tri;
      std::sort(key.begin(), key.end());
      auto& ref = faces[key];
      if (ref.count == 0) ref.oriented = tri;
      if (++ref.count > 2)
        throw MeshError("extract_boundary_surface: face shared by more than two tets");
    }
  }

  SurfaceMesh s;
  std::vector<int> vol_to_surf(m.vertices.size(), -1);
  // std::map iteration makes the triangle order independent of tet order.
  for (const auto& [key, ref] : faces) {
    if (ref.count != 1) continue;
    std::array<int, 3> tri;
    for (int i = 0; i < 3; ++i) {
      const int v = ref.oriented[i];
      if (vol_to_surf[v] < 0) {
        vol_to_surf[v] = static_cast<int>(s.vertices.size());
        s.vertices.push_back(m.vertices[v]);
        s.vertex_map.push_back(v);
      }
      tri[i] = vol_to_surf[v];
    }
    s.triangles.push_back(tri);
  }
  build_surface_edges(s);
  return s;
}

}  // namespace gmcp
