// Parametric benchmark geometry: graded structured lattices mapped onto a
// quarter-cylinder sector and a ball octant. Both meshers keep a tensor
// lattice topology (six tets per warped hexahedral cell), so conformity is
// inherited from the lattice; cell positivity is asserted after mapping.
#pragma once

#include "gmcp/tet_mesh.hpp"

namespace gmcp {

// Monotone node sequence 0..length: n_fine uniform cells of width h_fine,
// then n_coarse geometrically growing cells fitted (by bisection on the
// growth ratio) so the last node lands exactly on length.
inline std::vector<Real> graded_axis(Real length, Real h_fine, int n_fine, int n_coarse) {
  if (!(length > 0) || !(h_fine > 0) || n_fine < 1 || n_coarse < 0)
    throw ConfigError("graded_axis: non-positive length, width or cell count");
  const Real fine_len = n_fine * h_fine;
  const Real rest = length - fine_len;
  if (n_coarse == 0) {
    if (std::abs(rest) > 1e-9 * length)
      throw ConfigError("graded_axis: fine cells do not fill the axis");
  } else if (rest < n_coarse * h_fine * (1.0 - 1e-12)) {
    throw ConfigError("graded_axis: remaining length too short for coarse cells");
  }

  std::vector<Real> nodes;
  for (int i = 0; i <= n_fine; ++i) nodes.push_back(i * h_fine);
  if (n_coarse > 0) {
    auto coarse_len = [&](Real g) {
      Real sum = 0, h = h_fine;
      for (int k = 0; k < n_coarse; ++k) {
        h *= g;
        sum += h;
      }
      return sum;
    };
    Real lo = 1.0, hi = 2.0;
    while (coarse_len(hi) < rest) hi *= 2;
    for (int it = 0; it < 200; ++it) {
      const Real mid = 0.5 * (lo + hi);
      (coarse_len(mid) < rest ? lo : hi) = mid;
    }
    const Real g = 0.5 * (lo + hi);
    Real h = h_fine;
    for (int k = 0; k < n_coarse; ++k) {
      h *= g;
      nodes.push_back(nodes.back() + h);
    }
  }
  nodes.back() = length;
  return nodes;
}

// Reverses the grading so the fine cells sit at the far end of the axis.
inline std::vector<Real> mirrored_axis(const std::vector<Real>& nodes) {
  std::vector<Real> out(nodes.size());
  const Real length = nodes.back();
  for (size_t i = 0; i < nodes.size(); ++i) out[i] = length - nodes[nodes.size() - 1 - i];
  out.front() = 0;
  out.back() = length;
  return out;
}

namespace gen_detail {

// Tensor lattice of (n0+1)*(n1+1)*(n2+1) nodes positioned by pos(i,j,k),
// each cell split into the six tets sharing the cell's main diagonal
// (same split as make_block). Positivity is the caller's responsibility to
// guarantee geometrically; it is asserted here without repair.
template <class F>
inline TetMesh make_lattice(int n0, int n1, int n2, F&& pos) {
  TetMesh m;
  auto vid = [&](int i, int j, int k) { return (k * (n1 + 1) + j) * (n0 + 1) + i; };
  m.vertices.resize((n0 + 1) * (n1 + 1) * (n2 + 1));
  for (int k = 0; k <= n2; ++k)
    for (int j = 0; j <= n1; ++j)
      for (int i = 0; i <= n0; ++i) m.vertices[vid(i, j, k)] = pos(i, j, k);

  // Odd axis permutations trace the cell diagonal in mirror orientation;
  // swapping two vertices restores positive orientation independent of the
  // map, so the assert below only fires on genuinely inverted cells.
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  static const bool odd[6] = {false, true, true, false, false, true};
  for (int k = 0; k < n2; ++k)
    for (int j = 0; j < n1; ++j)
      for (int i = 0; i < n0; ++i)
        for (int q = 0; q < 6; ++q) {
          std::array<int, 3> at = {i, j, k};
          std::array<int, 4> tet;
          tet[0] = vid(at[0], at[1], at[2]);
          for (int s = 0; s < 3; ++s) {
            ++at[perms[q][s]];
            tet[s + 1] = vid(at[0], at[1], at[2]);
          }
          if (odd[q]) std::swap(tet[2], tet[3]);
          m.tets.push_back(tet);
        }
  for (size_t t = 0; t < m.tets.size(); ++t)
    if (!(tet_signed_volume(m, static_cast<int>(t)) > 0))
      throw MeshError("make_lattice: mapped cell produced a non-positive tet (index " +
                      std::to_string(t) + ")");
  return m;
}

// Concentric square-to-disk map: square rings max(a,b) = s land on circular
// arcs of radius s. Its gradient kink lies on the square diagonal a = b,
// which the shared main-diagonal split keeps on tet faces whenever both
// axes use the same node sequence.
inline Vec2 square_to_disk(Real a, Real b) {
  const Real mx = std::max(a, b);
  if (mx <= 0) return Vec2::Zero();
  const Real n = std::sqrt(a * a + b * b);
  return Vec2(a, b) * (mx / n);
}

}  // namespace gen_detail

// Quarter-cylinder sector: x, y >= 0, x^2 + y^2 <= radius^2, z in
// [-height, 0]. Both xy axes share radial_nodes (0..radius); z_nodes
// (0..height) place their last node at z = 0, so a fine far end grades the
// mesh toward the top surface.
inline TetMesh make_cylinder_sector(Real radius, Real height,
                                    const std::vector<Real>& radial_nodes,
                                    const std::vector<Real>& z_nodes) {
  if (radial_nodes.size() < 2 || z_nodes.size() < 2)
    throw ConfigError("make_cylinder_sector: node sequences need at least two entries");
  if (!(radius > 0) || !(height > 0))
    throw ConfigError("make_cylinder_sector: radius and height must be positive");
  const int nr = static_cast<int>(radial_nodes.size()) - 1;
  const int nz = static_cast<int>(z_nodes.size()) - 1;
  return gen_detail::make_lattice(nr, nr, nz, [&](int i, int j, int k) {
    const Vec2 xy = gen_detail::square_to_disk(radial_nodes[i], radial_nodes[j]);
    return Vec3(xy.x(), xy.y(), z_nodes[k] - height);
  });
}

// Ball octant: x, y, z >= 0, |q| <= radius, flat faces on the coordinate
// planes, pole at (0, 0, radius). tangential_nodes (0..1) grade the u and v
// axes from the pole outward; radial_nodes (0..1) grade the w axis with its
// far end at the pole, so fine cells of both cluster around the pole.
inline TetMesh make_sphere_octant(Real radius, const std::vector<Real>& tangential_nodes,
                                  const std::vector<Real>& radial_nodes) {
  if (tangential_nodes.size() < 2 || radial_nodes.size() < 2)
    throw ConfigError("make_sphere_octant: node sequences need at least two entries");
  if (!(radius > 0)) throw ConfigError("make_sphere_octant: radius must be positive");
  if (std::abs(tangential_nodes.back() - 1.0) > 1e-12 ||
      std::abs(radial_nodes.back() - 1.0) > 1e-12)
    throw ConfigError("make_sphere_octant: node sequences must end at 1");
  const int nt = static_cast<int>(tangential_nodes.size()) - 1;
  const int nw = static_cast<int>(radial_nodes.size()) - 1;
  // Cube-to-ball map: |q| = max-norm of p times radius. The pole direction
  // (0,0,1) is the w-axis end, so u,v near 0 and w near 1 are the pole zone.
  return gen_detail::make_lattice(nt, nt, nw, [&](int i, int j, int k) {
    const Vec3 p(tangential_nodes[i], tangential_nodes[j], radial_nodes[k]);
    const Real mx = p.cwiseAbs().maxCoeff();
    if (mx <= 0) return Vec3(Vec3::Zero());
    return Vec3(p * (mx / p.norm()) * radius);
  });
}

// In-place affine-free transform of vertex positions.
template <class F>
inline void transform_mesh(TetMesh& m, F&& fn) {
  for (auto& v : m.vertices) v = fn(v);
  orient_tets_positive(m);
}

}  // namespace gmcp
