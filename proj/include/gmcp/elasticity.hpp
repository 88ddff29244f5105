// Small-strain isotropic elasticity on linear tetrahedra: constant
// shape-function gradients, per-element energy/gradient/Hessian, and
// consistent surface pressure loads.
#pragma once

#include "gmcp/tet_mesh.hpp"

#include <Eigen/Sparse>
#include <optional>

namespace gmcp {

using Triplet = Eigen::Triplet<Real>;

struct Material {
  Real E = 0, nu = 0;
  Real lambda = 0, mu = 0;
};

inline Material make_material(Real E, Real nu) {
  if (!(E > 0)) throw ConfigError("material: Young's modulus must be positive");
  // Lame parameters blow up at the incompressible limit.
  if (!(nu > -1.0) || nu >= 0.5 - 1e-6)
    throw ConfigError("material: Poisson ratio must lie in (-1, 0.5 - 1e-6)");
  Material m;
  m.E = E;
  m.nu = nu;
  m.lambda = E * nu / ((1 + nu) * (1 - 2 * nu));
  m.mu = E / (2 * (1 + nu));
  return m;
}

struct ElementOperator {
  std::array<int, 4> verts;              // vertex ids within the parent mesh
  Real volume = 0;                       // rest volume
  Eigen::Matrix<Real, 4, 3> grads;       // rest shape-function gradients, one row per vertex
};

inline std::vector<ElementOperator> build_element_operators(const TetMesh& m) {
  std::vector<ElementOperator> ops(m.tets.size());
  for (size_t t = 0; t < m.tets.size(); ++t) {
    const auto& tet = m.tets[t];
    ElementOperator& op = ops[t];
    op.verts = tet;
    Mat3 D;
    for (int i = 0; i < 3; ++i) D.col(i) = m.vertices[tet[i + 1]] - m.vertices[tet[0]];
    const Real det = D.determinant();
    op.volume = det / 6.0;
    if (!(op.volume > 0))
      throw MeshError("build_element_operators: non-positive tet volume at tet " +
                      std::to_string(t));
    const Mat3 G = D.inverse();
    Vec3 g0 = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
      op.grads.row(i + 1) = G.row(i);
      g0 -= G.row(i).transpose();
    }
    op.grads.row(0) = g0.transpose();
  }
  return ops;
}

// Engineering small-strain tensor of one element from its four displacements.
inline Mat3 element_strain(const ElementOperator& op, const Eigen::Matrix<Real, 4, 3>& u) {
  const Mat3 grad_u = u.transpose() * op.grads;
  return 0.5 * (grad_u + grad_u.transpose());
}

inline Mat3 element_stress(const Material& mat, const Mat3& strain) {
  return mat.lambda * strain.trace() * Mat3::Identity() + 2.0 * mat.mu * strain;
}

namespace elast_detail {

inline Eigen::Matrix<Real, 4, 3> gather_u(const ElementOperator& op, const VecX& x,
                                          const VecX& rest, int vertex_offset) {
  Eigen::Matrix<Real, 4, 3> u;
  for (int i = 0; i < 4; ++i) {
    const int v = 3 * (vertex_offset + op.verts[i]);
    u.row(i) = (x.segment<3>(v) - rest.segment<3>(v)).transpose();
  }
  return u;
}

}  // namespace elast_detail

// Total strain energy of one element set. x and rest are flat 3N position
// vectors; vertex_offset shifts local vertex ids into them.
inline Real elastic_energy(const std::vector<ElementOperator>& ops, const Material& mat,
                           const VecX& x, const VecX& rest, int vertex_offset = 0) {
  const long n = static_cast<long>(ops.size());
  std::vector<Real> per_element(n);
#pragma omp parallel for schedule(static) num_threads(resolve_threads())
  for (long e = 0; e < n; ++e) {
    const Mat3 eps = element_strain(ops[e], elast_detail::gather_u(ops[e], x, rest, vertex_offset));
    const Real tr = eps.trace();
    per_element[e] = ops[e].volume * (mat.mu * eps.squaredNorm() + 0.5 * mat.lambda * tr * tr);
  }
  Real total = 0;  // fixed-order reduction keeps results identical across thread counts
  for (long e = 0; e < n; ++e) total += per_element[e];
  return total;
}

// Accumulates dE/dx into grad.
inline void add_elastic_gradient(const std::vector<ElementOperator>& ops, const Material& mat,
                                 const VecX& x, const VecX& rest, VecX& grad,
                                 int vertex_offset = 0) {
  const long n = static_cast<long>(ops.size());
  std::vector<Eigen::Matrix<Real, 4, 3>> per_element(n);
#pragma omp parallel for schedule(static) num_threads(resolve_threads())
  for (long e = 0; e < n; ++e) {
    const ElementOperator& op = ops[e];
    const Mat3 eps = element_strain(op, elast_detail::gather_u(op, x, rest, vertex_offset));
    const Mat3 sigma = element_stress(mat, eps);
    per_element[e] = op.volume * (op.grads * sigma);  // row i = volume * sigma * grad_i
  }
  for (long e = 0; e < n; ++e)
    for (int i = 0; i < 4; ++i)
      grad.segment<3>(3 * (vertex_offset + ops[e].verts[i])) +=
          per_element[e].row(i).transpose();
}

// Constant element Hessian blocks of the linear material model.
inline void add_elastic_hessian(const std::vector<ElementOperator>& ops, const Material& mat,
                                std::vector<Triplet>& triplets, int vertex_offset = 0) {
  for (const auto& op : ops) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const Vec3 gi = op.grads.row(i).transpose();
        const Vec3 gj = op.grads.row(j).transpose();
        const Mat3 block = op.volume * (mat.lambda * gi * gj.transpose() +
                                        mat.mu * gj * gi.transpose() +
                                        mat.mu * gi.dot(gj) * Mat3::Identity());
        const int bi = 3 * (vertex_offset + op.verts[i]);
        const int bj = 3 * (vertex_offset + op.verts[j]);
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c)
            if (block(r, c) != 0) triplets.emplace_back(bi + r, bj + c, block(r, c));
      }
  }
}

// Consistent nodal forces of a uniform pressure acting on surface triangles.
// With no fixed direction the traction acts along the inward normal (against
// the outward winding of each face). Evaluated on reference positions: loads
// are dead loads.
inline void add_pressure_forces(const std::vector<std::array<int, 3>>& faces,
                                const VecX& rest, Real magnitude,
                                const std::optional<Vec3>& direction, VecX& f) {
  for (const auto& tri : faces) {
    const Vec3 a = rest.segment<3>(3 * tri[0]);
    const Vec3 b = rest.segment<3>(3 * tri[1]);
    const Vec3 c = rest.segment<3>(3 * tri[2]);
    const Vec3 cr = (b - a).cross(c - a);
    const Real area = 0.5 * cr.norm();
    const Vec3 dir = direction ? *direction : Vec3(-cr.normalized());
    const Vec3 node_force = magnitude * area / 3.0 * dir;
    for (int i = 0; i < 3; ++i) f.segment<3>(3 * tri[i]) += node_force;
  }
}

// Constant body force density (N/m^3), lumped by element volume.
inline void add_body_forces(const std::vector<ElementOperator>& ops, const Vec3& density,
                            VecX& f, int vertex_offset = 0) {
  for (const auto& op : ops)
    for (int i = 0; i < 4; ++i)
      f.segment<3>(3 * (vertex_offset + op.verts[i])) += op.volume / 4.0 * density;
}

}  // namespace gmcp
