// Quasi-static solves: incremental loading with a projected-Newton inner
// loop. Each load step minimizes elastic energy plus the contact potential
// minus the work of scaled external loads, over the free coordinates.
// Iterates stay strictly penetration-free: the contact step filter bounds
// the step length and the backtracking line search rejects infeasible
// trials outright.
#pragma once

#include "gmcp/contact_energy.hpp"
#include "gmcp/elasticity.hpp"

#include <Eigen/SparseCholesky>

#include <chrono>
#include <functional>

namespace gmcp {

struct Body {
  Material material;
  std::vector<ElementOperator> ops;  // mesh-local vertex ids
  int vertex_offset = 0;
  int num_vertices = 0;
  SurfaceMesh boundary;  // boundary triangles, mesh-local ids via vertex_map
  std::string name;
};

struct ContactPairRuntime {
  ContactSurface slave;
  ContactSurface master;
  BarrierParams params;  // resolved
  ContactState state;
};

struct SolverSettings {
  int load_steps = 10;
  int max_newton_iters = 200;
  Real newton_tol = -1;  // residual inf-norm (N); derived from loads when negative
  int max_line_search = 40;
  Real regularization = 1e-8;  // fallback shift, relative to the mean Hessian diagonal
  int threads = 0;             // 0 keeps the process-wide setting
};

struct StepStats {
  int step = 0;
  int newton_iters = 0;
  int rebuilds = 0;
  int backtracks = 0;
  Real residual = 0;
  Real energy = 0;
  Real min_gap = std::numeric_limits<Real>::max();  // over accepted iterates
  bool energy_monotone = true;
};

struct RunStats {
  std::vector<StepStats> steps;
  Real newton_tol_used = 0;
  Real wall_seconds = 0;
  int total_newton_iters = 0;
  int total_rebuilds = 0;
};

class System {
 public:
  std::vector<Body> bodies;
  std::vector<ContactPairRuntime> contacts;
  VecX rest;                    // flat rest positions of all bodies
  VecX x;                       // current positions
  VecX f_ext;                   // dead loads at full magnitude
  std::vector<uint8_t> fixed;   // per-dof elimination mask
  VecX dirichlet;               // absolute target positions for fixed dofs

  int add_body(const TetMesh& mesh, const Material& mat, std::string name = "") {
    Body b;
    b.material = mat;
    b.ops = build_element_operators(mesh);
    b.vertex_offset = num_vertices();
    b.num_vertices = static_cast<int>(mesh.vertices.size());
    b.boundary = extract_boundary_surface(mesh);
    b.name = std::move(name);

    const int old = static_cast<int>(rest.size());
    rest.conservativeResize(old + 3 * b.num_vertices);
    for (int v = 0; v < b.num_vertices; ++v) rest.segment<3>(old + 3 * v) = mesh.vertices[v];
    x = rest;
    f_ext = VecX::Zero(rest.size());
    fixed.assign(rest.size(), 0);
    dirichlet = rest;
    bodies.push_back(std::move(b));
    return static_cast<int>(bodies.size()) - 1;
  }

  int num_vertices() const { return static_cast<int>(rest.size()) / 3; }

  // Pins one coordinate of a global vertex to an absolute value. Per-axis
  // elimination supports symmetry planes (only the normal axis is fixed).
  void fix_dof(int gv, int axis, Real target) {
    fixed[3 * gv + axis] = 1;
    dirichlet[3 * gv + axis] = target;
  }

  // Pins all three coordinates of a global vertex to an absolute position.
  void fix_vertex(int gv, const Vec3& target) {
    for (int c = 0; c < 3; ++c) fix_dof(gv, c, target[c]);
  }

  // Registers a contact pair between two whole body boundaries (or subsets
  // of their boundary triangles). Stiffness defaults resolve against the
  // slave surface's rest mean edge length.
  int add_contact_pair(int slave_body, int master_body, BarrierParams params,
                       const std::vector<int>* slave_tris = nullptr,
                       const std::vector<int>* master_tris = nullptr) {
    ContactPairRuntime pair;
    pair.slave = make_contact_surface(bodies[slave_body].boundary,
                                      bodies[slave_body].vertex_offset, slave_tris);
    pair.master = make_contact_surface(bodies[master_body].boundary,
                                       bodies[master_body].vertex_offset, master_tris);
    pair.params = resolve_barrier_params(params, mean_edge_length(pair.slave, rest));
    contacts.push_back(std::move(pair));
    return static_cast<int>(contacts.size()) - 1;
  }

  using StepCallback = std::function<void(const StepStats&, const VecX&)>;

  RunStats solve(const SolverSettings& settings, const StepCallback& on_step = nullptr) {
    validate(settings);
    if (settings.threads > 0) set_thread_count(settings.threads);
    const auto t_start = std::chrono::steady_clock::now();

    RunStats stats;
    stats.newton_tol_used =
        settings.newton_tol > 0 ? settings.newton_tol : derived_newton_tol();

    const std::vector<int> dof_map = build_dof_map();
    const int n_free = static_cast<int>(
        std::count(fixed.begin(), fixed.end(), static_cast<uint8_t>(0)));
    if (n_free == 0) throw ConfigError("solve: no free degrees of freedom");

    for (Eigen::Index d = 0; d < x.size(); ++d)
      if (fixed[d]) x[d] = dirichlet[d];

    // Support radii reference the run-start configuration for the whole
    // ramp. Re-freezing them against each step's equilibrium gap would
    // shrink the support by at least 10% per step and soft barriers would
    // chase a geometrically collapsing gap.
    const VecX eps_ref = x;

    for (int step = 1; step <= settings.load_steps; ++step) {
      const Real lambda = static_cast<Real>(step) / settings.load_steps;
      StepStats ss;
      ss.step = step;

      rebuild_contacts(x, &eps_ref);
      Real energy = total_energy_checked(x, lambda);
      ss.min_gap = std::min(ss.min_gap, current_min_gap(x));

      bool converged = false;
      Real residual = std::numeric_limits<Real>::quiet_NaN();
      for (int it = 0; it < settings.max_newton_iters; ++it) {
        VecX grad = VecX::Zero(x.size());
        std::vector<Triplet> trips;
        assemble(x, lambda, grad, trips);

        residual = 0;
        for (Eigen::Index d = 0; d < grad.size(); ++d)
          if (!fixed[d]) residual = std::max(residual, std::abs(grad[d]));
        if (residual <= stats.newton_tol_used) {
          converged = true;
          break;
        }

        const VecX dx = solve_descent(grad, trips, dof_map, n_free, settings);
        ss.newton_iters += 1;

        Real alpha = 1.0;
        for (auto& pair : contacts) {
          alpha = std::min(alpha, step_filter(pair.state, x, dx));
          alpha = std::min(alpha, displacement_cap(pair.state, pair.params, x, dx));
        }

        bool accepted = false;
        for (int ls = 0; ls < settings.max_line_search; ++ls) {
          const VecX x_try = x + alpha * dx;
          const auto trial = try_total_energy(x_try, lambda);
          if (trial && trial->first < energy) {
            x = x_try;
            energy = trial->first;
            ss.min_gap = std::min(ss.min_gap, trial->second);
            accepted = true;
            break;
          }
          ss.backtracks += 1;
          alpha *= 0.5;
        }
        if (!accepted)
          throw SolverError("load step " + std::to_string(step) +
                                ": line search failed to find a feasible decrease",
                            residual);

        // Re-sample any pair whose vertices have outrun the frozen sampling.
        bool rebuilt = false;
        for (auto& pair : contacts) {
          if (pair_motion(pair, x) > 0.5 * pair.params.eps_max) {
            rebuild_pair(pair, x, &eps_ref);
            rebuilt = true;
            ss.rebuilds += 1;
          }
        }
        if (rebuilt) energy = total_energy_checked(x, lambda);
      }

      if (!converged)
        throw SolverError("load step " + std::to_string(step) + ": Newton exceeded " +
                              std::to_string(settings.max_newton_iters) + " iterations",
                          residual);

      ss.residual = residual;
      ss.energy = energy;
      stats.total_newton_iters += ss.newton_iters;
      stats.total_rebuilds += ss.rebuilds;
      stats.steps.push_back(ss);
      if (on_step) on_step(ss, x);
    }

    stats.wall_seconds =
        std::chrono::duration<Real>(std::chrono::steady_clock::now() - t_start).count();
    return stats;
  }

  // Energy of the current objective at positions xx (loads scaled by
  // lambda); infeasible contact states yield no value.
  std::optional<std::pair<Real, Real>> try_total_energy(const VecX& xx, Real lambda) const {
    Real e = 0;
    for (const auto& b : bodies) e += elastic_energy(b.ops, b.material, xx, rest, b.vertex_offset);
    Real min_gap = std::numeric_limits<Real>::max();
    for (const auto& pair : contacts) {
      const auto r = try_contact_energy(pair.state, pair.params, xx);
      if (!r.feasible) return std::nullopt;
      e += r.energy;
      min_gap = std::min(min_gap, r.min_gap);
    }
    e -= lambda * f_ext.dot(xx - rest);
    return std::make_pair(e, min_gap);
  }

 private:
  void validate(const SolverSettings& s) const {
    if (bodies.empty()) throw ConfigError("solve: no bodies");
    if (s.load_steps < 1) throw ConfigError("solve: load_steps must be >= 1");
    if (s.max_newton_iters < 1) throw ConfigError("solve: max_newton_iters must be >= 1");
    if (s.max_line_search < 1) throw ConfigError("solve: max_line_search must be >= 1");
  }

  // Residual scale when no tolerance is given: the largest nodal load, or a
  // small fraction of the stiffness scale E * h^2 for load-free problems.
  Real derived_newton_tol() const {
    Real scale = f_ext.size() ? f_ext.cwiseAbs().maxCoeff() : 0.0;
    Real vol_sum = 0;
    long n_elem = 0;
    Real e_max = 0;
    for (const auto& b : bodies) {
      for (const auto& op : b.ops) vol_sum += op.volume;
      n_elem += static_cast<long>(b.ops.size());
      e_max = std::max(e_max, b.material.E);
    }
    const Real h = std::cbrt(6.0 * vol_sum / std::max<long>(n_elem, 1));
    scale = std::max(scale, 1e-6 * e_max * h * h);
    return 1e-6 * std::max(scale, 1e-6);
  }

  std::vector<int> build_dof_map() const {
    std::vector<int> map(fixed.size(), -1);
    int k = 0;
    for (size_t d = 0; d < fixed.size(); ++d)
      if (!fixed[d]) map[d] = k++;
    return map;
  }

  Real pair_motion(const ContactPairRuntime& pair, const VecX& xx) const {
    Real m = 0;
    auto scan = [&](const std::vector<int>& verts) {
      for (int v : verts)
        m = std::max(m, (xx.segment<3>(3 * v) -
                         pair.state.reference_positions.segment<3>(3 * v))
                            .norm());
    };
    scan(pair.slave.verts);
    scan(pair.master.verts);
    return m;
  }

  void rebuild_pair(ContactPairRuntime& pair, const VecX& xx, const VecX* eps_ref) {
    const ContactPairSet cands =
        build_candidate_pairs(pair.slave, pair.master, xx, pair.params.detection_radius);
    pair.state = build_contact_state(pair.slave, pair.master, cands, xx, pair.params, eps_ref);
  }

  void rebuild_contacts(const VecX& xx, const VecX* eps_ref) {
    for (auto& pair : contacts) rebuild_pair(pair, xx, eps_ref);
  }

  Real current_min_gap(const VecX& xx) const {
    Real g = std::numeric_limits<Real>::max();
    for (const auto& pair : contacts)
      for (const auto& s : pair.state.samples) g = std::min(g, sample_gap(s, xx));
    return g;
  }

  Real total_energy_checked(const VecX& xx, Real lambda) const {
    const auto e = try_total_energy(xx, lambda);
    if (!e) throw SolverError("solve: configuration with penetrating contact sample");
    return e->first;
  }

  void assemble(const VecX& xx, Real lambda, VecX& grad, std::vector<Triplet>& trips) const {
    for (const auto& b : bodies) {
      add_elastic_gradient(b.ops, b.material, xx, rest, grad, b.vertex_offset);
      add_elastic_hessian(b.ops, b.material, trips, b.vertex_offset);
    }
    for (const auto& pair : contacts)
      add_contact_gradient_hessian(pair.state, pair.params, xx, grad, trips);
    grad -= lambda * f_ext;
  }

  VecX solve_descent(const VecX& grad, const std::vector<Triplet>& trips,
                     const std::vector<int>& dof_map, int n_free,
                     const SolverSettings& settings) const {
    std::vector<Triplet> free_trips;
    free_trips.reserve(trips.size());
    Real diag_sum = 0;
    for (const auto& t : trips) {
      const int r = dof_map[t.row()];
      const int c = dof_map[t.col()];
      if (r < 0 || c < 0) continue;
      free_trips.emplace_back(r, c, t.value());
      if (r == c) diag_sum += t.value();
    }

    VecX rhs(n_free);
    for (size_t d = 0, k = 0; d < fixed.size(); ++d)
      if (!fixed[d]) rhs[k++] = -grad[d];

    Eigen::SparseMatrix<Real> H(n_free, n_free);
    H.setFromTriplets(free_trips.begin(), free_trips.end());

    // A singular factorization can slip through with finite garbage, so the
    // solution is only trusted when it actually solves the system.
    const Real rhs_inf = rhs.cwiseAbs().maxCoeff();
    auto attempt = [&](const Eigen::SparseMatrix<Real>& M) -> std::optional<VecX> {
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<Real>> ldlt(M);
      if (ldlt.info() != Eigen::Success) return std::nullopt;
      VecX s = ldlt.solve(rhs);
      if (!s.allFinite()) return std::nullopt;
      if ((M * s - rhs).cwiseAbs().maxCoeff() > 1e-6 * rhs_inf) return std::nullopt;
      return s;
    };

    std::optional<VecX> sol = attempt(H);
    if (!sol) {
      const Real shift = settings.regularization * diag_sum / n_free;
      for (int k = 0; k < n_free; ++k) free_trips.emplace_back(k, k, shift);
      H.setFromTriplets(free_trips.begin(), free_trips.end());
      sol = attempt(H);
      if (!sol)
        throw SolverError(
            "linear solve failed even with regularization; the system is "
            "insufficiently constrained (unfixed rigid body modes?)",
            grad.cwiseAbs().maxCoeff());
    }

    VecX dx = VecX::Zero(grad.size());
    for (size_t d = 0, k = 0; d < fixed.size(); ++d)
      if (!fixed[d]) dx[d] = (*sol)[k++];
    return dx;
  }
};

}  // namespace gmcp
