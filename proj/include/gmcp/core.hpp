// Shared scalar/vector types, axis-aligned boxes and the error hierarchy.
#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gmcp {

using Real = double;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;

// Base class for everything this library throws.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files and scene configs; carries file:line context in the message.
struct ParseError : Error {
  using Error::Error;
};

// Inconsistent or invalid mesh topology/geometry.
struct MeshError : Error {
  using Error::Error;
};

// Semantically invalid configuration (bad material constants, missing bodies, ...).
struct ConfigError : Error {
  using Error::Error;
};

// Newton failures: non-convergence, failed line search, unconstrained rigid modes.
struct SolverError : Error {
  SolverError(const std::string& msg, Real residual_inf = std::numeric_limits<Real>::quiet_NaN())
      : Error(msg), residual(residual_inf) {}
  Real residual;
};

// A contact sample was evaluated at a non-positive gap.
struct InfeasibleGapError : Error {
  InfeasibleGapError(const std::string& msg, long sample) : Error(msg), sample_id(sample) {}
  long sample_id;
};

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<Real>::max());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<Real>::max());

  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool valid() const { return (lo.array() <= hi.array()).all(); }
  bool overlaps(const Aabb& b) const {
    return (lo.array() <= b.hi.array()).all() && (b.lo.array() <= hi.array()).all();
  }
  bool contains(const Vec3& p) const {
    return (lo.array() <= p.array()).all() && (p.array() <= hi.array()).all();
  }
  Aabb inflated(Real r) const {
    Aabb b;
    b.lo = lo.array() - r;
    b.hi = hi.array() + r;
    return b;
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  Real diagonal() const { return valid() ? (hi - lo).norm() : 0.0; }
  // Squared distance from p to the box, zero inside.
  Real sq_dist(const Vec3& p) const {
    Vec3 d = (lo - p).cwiseMax(0.0).cwiseMax(p - hi);
    return d.squaredNorm();
  }
};

inline Aabb triangle_aabb(const Vec3& a, const Vec3& b, const Vec3& c) {
  Aabb box;
  box.extend(a);
  box.extend(b);
  box.extend(c);
  return box;
}

// Worker count used by the data-parallel assembly loops. Reductions are always
// performed in fixed index order, so results are bitwise identical for any value.
inline int& thread_count() {
  static int n = 0;  // 0 = library default (OpenMP decides)
  return n;
}
inline void set_thread_count(int n) { thread_count() = n; }

inline int resolve_threads() {
#ifdef _OPENMP
  return thread_count() > 0 ? thread_count() : omp_get_max_threads();
#else
  return 1;
#endif
}

inline std::string format_real(Real v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace gmcp
