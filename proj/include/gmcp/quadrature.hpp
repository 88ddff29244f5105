// Fixed quadrature tables: symmetric triangle rules (degree 1-4, positive
// weights) and Gauss-Legendre segment rules (1-5 points). Weights sum to one;
// callers scale by the measure of the integration domain.
#pragma once

#include "gmcp/core.hpp"

namespace gmcp {

struct TriQuadPoint {
  Real b0, b1, b2;  // barycentric coordinates
  Real w;
};

struct SegQuadPoint {
  Real t;  // position in [0,1]
  Real w;
};

inline std::vector<TriQuadPoint> triangle_quadrature(int order) {
  switch (order) {
    case 1:
      return {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0}};
    case 2: {
      const Real a = 2.0 / 3.0, b = 1.0 / 6.0, w = 1.0 / 3.0;
      return {{a, b, b, w}, {b, a, b, w}, {b, b, a, w}};
    }
    case 3: {
      // Six-point degree-3 rule with equal positive weights.
      const Real a = 0.659027622374092;
      const Real b = 0.231933368553031;
      const Real c = 0.109039009072877;
      const Real w = 1.0 / 6.0;
      return {{a, b, c, w}, {a, c, b, w}, {b, a, c, w},
              {b, c, a, w}, {c, a, b, w}, {c, b, a, w}};
    }
    case 4: {
      // Two symmetric orbits, degree 4, positive weights.
      const Real a1 = 0.108103018168070, b1 = 0.445948490915965, w1 = 0.223381589678011;
      const Real a2 = 0.816847572980459, b2 = 0.091576213509771, w2 = 0.109951743655322;
      return {{a1, b1, b1, w1}, {b1, a1, b1, w1}, {b1, b1, a1, w1},
              {a2, b2, b2, w2}, {b2, a2, b2, w2}, {b2, b2, a2, w2}};
    }
    default:
      throw ConfigError("triangle_quadrature: unsupported order " + std::to_string(order) +
                        " (supported: 1..4)");
  }
}

inline std::vector<SegQuadPoint> segment_quadrature(int points) {
  auto from_sym = [](std::initializer_list<std::pair<Real, Real>> nodes) {
    // nodes given on [-1,1] as (abscissa, weight); map to [0,1].
    std::vector<SegQuadPoint> q;
    for (const auto& [x, w] : nodes) q.push_back({0.5 * (1.0 + x), 0.5 * w});
    return q;
  };
  switch (points) {
    case 1:
      return {{0.5, 1.0}};
    case 2:
      return from_sym({{-0.5773502691896257, 1.0}, {0.5773502691896257, 1.0}});
    case 3:
      return from_sym({{-0.7745966692414834, 5.0 / 9.0},
                       {0.0, 8.0 / 9.0},
                       {0.7745966692414834, 5.0 / 9.0}});
    case 4:
      return from_sym({{-0.8611363115940526, 0.3478548451374538},
                       {-0.3399810435848563, 0.6521451548625461},
                       {0.3399810435848563, 0.6521451548625461},
                       {0.8611363115940526, 0.3478548451374538}});
    case 5:
      return from_sym({{-0.9061798459386640, 0.2369268850561891},
                       {-0.5384693101056831, 0.4786286704993665},
                       {0.0, 0.5688888888888889},
                       {0.5384693101056831, 0.4786286704993665},
                       {0.9061798459386640, 0.2369268850561891}});
    default:
      throw ConfigError("segment_quadrature: unsupported point count " +
                        std::to_string(points) + " (supported: 1..5)");
  }
}

}  // namespace gmcp
