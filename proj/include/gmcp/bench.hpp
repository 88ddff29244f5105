// Validation drivers and run orchestration: the two-block patch test with
// its uniform-stress reference, the sphere-on-block indentation problem with
// its closed-form pressure profile, scene execution with per-step file
// output, and the embedding replay tool.
#pragma once

#include "gmcp/embedding.hpp"
#include "gmcp/mesh_gen.hpp"
#include "gmcp/scene.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>

namespace gmcp {

// Per-tet Cauchy stress of one body at positions x.
inline std::vector<Mat3> body_stresses(const Body& body, const VecX& x, const VecX& rest) {
  std::vector<Mat3> out(body.ops.size());
  for (size_t e = 0; e < body.ops.size(); ++e) {
    const auto u = elast_detail::gather_u(body.ops[e], x, rest, body.vertex_offset);
    out[e] = element_stress(body.material, element_strain(body.ops[e], u));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Contact patch test: two stacked blocks with non-matching interface meshes
// under uniform pressure. The exact solution is a uniform uniaxial stress
// sigma_zz = -pressure with every other component zero.

struct PatchReport {
  Real kappa = 0;
  Real sigma_zz_max_rel_err = 0;  // max |sigma_zz + p| / p over all tets
  Real sigma_spur = 0;            // max |other component| over all tets (absolute)
};

struct PatchResult {
  PatchReport report;
  RunStats stats;
  std::vector<StepStats> steps;
};

inline SceneConfig make_patch_scene(Real kappa = 1e6, std::array<int, 3> div_bottom = {5, 5, 2},
                                    std::array<int, 3> div_top = {4, 4, 2}) {
  SceneConfig cfg;
  cfg.path = "<patch-test>";

  BodySpec bottom;
  bottom.name = "bottom";
  bottom.size = Vec3(1, 1, 0.5);
  bottom.divisions = div_bottom;
  bottom.origin = Vec3(0, 0, 0);
  bottom.youngs = 1000;
  bottom.poisson = 0;
  cfg.bodies.push_back(bottom);

  BodySpec top = bottom;
  top.name = "top";
  top.divisions = div_top;
  top.origin = Vec3(0, 0, 0.502);  // initial gap 0.002
  cfg.bodies.push_back(top);

  BcSpec clamp;  // bottom face of the bottom block, fully fixed
  clamp.body = "bottom";
  clamp.box.lo = Vec3(-1, -1, -1);
  clamp.box.hi = Vec3(2, 2, 1e-9);
  clamp.axes[0] = clamp.axes[1] = clamp.axes[2] = true;
  cfg.bcs.push_back(clamp);

  BcSpec lateral;  // the whole top block moves only vertically
  lateral.body = "top";
  lateral.box.lo = Vec3(-1, -1, 0.5);
  lateral.box.hi = Vec3(2, 2, 2);
  lateral.axes[0] = lateral.axes[1] = true;
  cfg.bcs.push_back(lateral);

  LoadSpec load;  // uniform pressure on the top face, straight down
  load.body = "top";
  load.box.lo = Vec3(-1, -1, 1.0019);
  load.box.hi = Vec3(2, 2, 2);
  load.pressure = 10;
  load.direction = Vec3(0, 0, -1);
  cfg.loads.push_back(load);

  ContactSpec contact;
  contact.slave = "top";
  contact.master = "bottom";
  SelectorBox interface;  // bottom face of the top block
  interface.lo = Vec3(-1, -1, 0.5019);
  interface.hi = Vec3(2, 2, 0.5021);
  contact.slave_box = interface;
  contact.params.kappa_face = kappa;
  contact.params.eps_max = 0.001;
  cfg.contacts.push_back(contact);

  cfg.solver.load_steps = 10;
  return cfg;
}

inline PatchReport patch_stress_metrics(const System& sys, Real pressure) {
  PatchReport rep;
  for (const Body& body : sys.bodies)
    for (const Mat3& s : body_stresses(body, sys.x, sys.rest)) {
      rep.sigma_zz_max_rel_err =
          std::max(rep.sigma_zz_max_rel_err, std::abs(s(2, 2) + pressure) / pressure);
      for (const Real c : {s(0, 0), s(1, 1), s(0, 1), s(1, 2), s(0, 2)})
        rep.sigma_spur = std::max(rep.sigma_spur, std::abs(c));
    }
  return rep;
}

inline PatchResult run_patch_test(Real kappa = 1e6, std::array<int, 3> div_bottom = {5, 5, 2},
                                  std::array<int, 3> div_top = {4, 4, 2},
                                  const SolverSettings* settings = nullptr) {
  const SceneConfig cfg = make_patch_scene(kappa, div_bottom, div_top);
  System sys = build_scene(cfg);
  PatchResult res;
  res.stats = sys.solve(settings ? *settings : cfg.solver,
                        [&](const StepStats& s, const VecX&) { res.steps.push_back(s); });
  res.report = patch_stress_metrics(sys, cfg.loads[0].pressure);
  res.report.kappa = kappa;
  return res;
}

// ---------------------------------------------------------------------------
// Sphere-on-block indentation. A one-eighth sphere is pressed into a
// quarter-cylinder block by uniform pressure on its flat top; symmetry
// planes carry the quarter model. The reference is the classical smooth
// frictionless contact solution for a rigid-radius sphere on a half space,
// with the applied pressure converted to a total load P = Q*pi*R^2 (the
// contact literature's q and the applied Q coincide; see the report header).

struct HertzOracle {
  Real Q = 1e7;      // applied pressure (Pa)
  Real R = 0.05;     // sphere radius (m)
  Real E_star = 0;   // effective modulus E / (2 (1 - nu^2))
  Real alpha_H = 0;  // contact radius
  Real p0 = 0;       // peak pressure

  Real pressure(Real r) const {
    if (r >= alpha_H) return 0;
    return p0 * std::sqrt(1 - r * r / (alpha_H * alpha_H));
  }
};

inline HertzOracle make_hertz_oracle(Real Q, Real R, Real E, Real nu) {
  HertzOracle o;
  o.Q = Q;
  o.R = R;
  o.E_star = E / (2 * (1 - nu * nu));
  o.alpha_H = std::cbrt(3.0 * Q * M_PI * R * R * R / (4.0 * o.E_star));
  o.p0 = 3.0 * Q * R * R / (2.0 * o.alpha_H * o.alpha_H);
  return o;
}

struct HertzConfig {
  Real refine = 1;  // scales subdivision counts; cell widths shrink to match
  int load_steps = 10;
  Real Q = 1e7;
  Real R = 0.05;
  Real E = 2.1e11;
  Real nu = 0.3;
  Real block_radius = 0.12;
  Real block_height = 0.06;
  Real initial_gap = 5e-5;
  Real eps_max = 1e-5;
  Real detection_radius = 6e-4;
  Real slave_patch_radius = 0.02;  // slave faces beyond this radius never touch
  Real kappa_face = -1;            // < 0: derived so -B'(eps/2) carries p0
};

// Subdivision counts scale with refine; the fine cell widths shrink by the
// same factor, keeping the fine-zone extents (sized to the contact patch)
// fixed. The ball's surface cells near the pole stay small enough that
// facet sag stays well under the barrier support radius; gap noise from
// faceting is amplified by the barrier stiffness into pressure noise.
inline TetMesh make_hertz_block(const HertzConfig& c) {
  const auto n = [&](int base) { return std::max(1, static_cast<int>(std::lround(base * c.refine))); };
  return make_cylinder_sector(c.block_radius, c.block_height,
                              graded_axis(c.block_radius, 0.0006 / c.refine, n(6), n(6)),
                              mirrored_axis(graded_axis(c.block_height, 0.0007 / c.refine, n(4), n(5))));
}

inline TetMesh make_hertz_ball(const HertzConfig& c) {
  const auto n = [&](int base) { return std::max(1, static_cast<int>(std::lround(base * c.refine))); };
  TetMesh ball = make_sphere_octant(c.R, graded_axis(1.0, 0.0055 / c.refine, n(12), n(3)),
                                    mirrored_axis(graded_axis(1.0, 0.02 / c.refine, n(3), n(3))));
  // rotate the pole downward and seat the flat top above the block
  const Real lift = c.R + c.initial_gap;
  transform_mesh(ball, [&](const Vec3& v) { return Vec3(v.y(), v.x(), -v.z() + lift); });
  return ball;
}

struct HertzResult {
  HertzOracle oracle;
  BarrierParams params;  // resolved barrier parameters actually used
  long block_tets = 0, ball_tets = 0;
  Real applied_force = 0;  // discrete quarter-model load (N)
  Real peak = 0;
  Real contact_radius = 0;  // outermost face sample carrying >= 5% of peak
  Real outside_max = 0;     // largest pressure beyond 1.2 * alpha_H
  Real peak_rel_err = 0, contact_radius_rel_err = 0;
  std::vector<std::array<Real, 3>> profile;  // radius, pressure, analytic pressure
  RunStats stats;
  std::vector<StepStats> steps;
  std::vector<long> active_samples;  // per step: face samples with positive pressure
};

inline HertzResult run_hertz(const HertzConfig& cfg = {},
                             const std::function<void(const StepStats&)>& on_step = nullptr) {
  HertzResult res;
  res.oracle = make_hertz_oracle(cfg.Q, cfg.R, cfg.E, cfg.nu);

  const TetMesh block = make_hertz_block(cfg);
  const TetMesh ball = make_hertz_ball(cfg);
  res.block_tets = static_cast<long>(block.tets.size());
  res.ball_tets = static_cast<long>(ball.tets.size());
  for (const auto& [name, count] : {std::pair<const char*, long>{"block", res.block_tets},
                                    {"ball", res.ball_tets}})
    if (count < 1000)
      throw ConfigError("refine " + format_real(cfg.refine) + " produces only " +
                        std::to_string(count) + " tets for the " + name + "; need >= 1000");

  System sys;
  const Material mat = make_material(cfg.E, cfg.nu);
  const int ib = sys.add_body(block, mat, "block");
  const int ih = sys.add_body(ball, mat, "ball");
  const Body& bb = sys.bodies[ib];
  const Body& bh = sys.bodies[ih];

  for (int v = 0; v < bb.num_vertices; ++v) {
    const Vec3& p = block.vertices[v];
    if (std::abs(p.z() + cfg.block_height) < 1e-9) sys.fix_dof(v, 2, p.z());
    if (std::abs(p.x()) < 1e-12) sys.fix_dof(v, 0, 0.0);
    if (std::abs(p.y()) < 1e-12) sys.fix_dof(v, 1, 0.0);
  }
  for (int v = 0; v < bh.num_vertices; ++v) {
    const Vec3& p = ball.vertices[v];
    if (std::abs(p.x()) < 1e-12) sys.fix_dof(bh.vertex_offset + v, 0, 0.0);
    if (std::abs(p.y()) < 1e-12) sys.fix_dof(bh.vertex_offset + v, 1, 0.0);
  }

  const Real lift = cfg.R + cfg.initial_gap;
  std::vector<std::array<int, 3>> top_faces;
  for (const auto& tri : bh.boundary.triangles) {
    bool flat = true;
    std::array<int, 3> gtri;
    for (int k = 0; k < 3; ++k) {
      gtri[k] = bh.vertex_offset + bh.boundary.vertex_map[tri[k]];
      if (std::abs(ball.vertices[bh.boundary.vertex_map[tri[k]]].z() - lift) > 1e-9) flat = false;
    }
    if (flat) top_faces.push_back(gtri);
  }
  add_pressure_forces(top_faces, sys.rest, cfg.Q, Vec3(0, 0, -1), sys.f_ext);
  for (int v = 0; v < sys.num_vertices(); ++v) res.applied_force -= sys.f_ext[3 * v + 2];

  std::vector<int> slave_tris;
  for (size_t t = 0; t < bb.boundary.triangles.size(); ++t) {
    bool inside = true;
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = block.vertices[bb.boundary.vertex_map[bb.boundary.triangles[t][k]]];
      if (std::abs(p.z()) > 1e-9 || std::hypot(p.x(), p.y()) > cfg.slave_patch_radius)
        inside = false;
    }
    if (inside) slave_tris.push_back(static_cast<int>(t));
  }

  BarrierParams bp;
  bp.eps_max = cfg.eps_max;
  bp.kappa_face =
      cfg.kappa_face > 0 ? cfg.kappa_face : res.oracle.p0 / (cfg.eps_max * (std::log(2.0) + 0.5));
  bp.detection_radius = cfg.detection_radius;
  sys.add_contact_pair(ib, ih, bp, &slave_tris, nullptr);
  res.params = sys.contacts[0].params;

  SolverSettings settings;
  settings.load_steps = cfg.load_steps;
  res.stats = sys.solve(settings, [&](const StepStats& s, const VecX& x) {
    res.steps.push_back(s);
    long active = 0;
    for (const auto& rec : contact_pressure_field(sys.contacts[0].state, sys.contacts[0].params, x))
      if (rec.pressure > 0) ++active;
    res.active_samples.push_back(active);
    if (on_step) on_step(s);
  });

  const auto field = contact_pressure_field(sys.contacts[0].state, sys.contacts[0].params, sys.x);
  res.profile.reserve(field.size());
  for (const auto& rec : field) {
    res.peak = std::max(res.peak, rec.pressure);
    res.profile.push_back({rec.radius, rec.pressure, res.oracle.pressure(rec.radius)});
  }
  std::stable_sort(res.profile.begin(), res.profile.end(),
                   [](const auto& a, const auto& b) { return a[0] < b[0]; });
  for (const auto& row : res.profile) {
    if (row[1] >= 0.05 * res.peak) res.contact_radius = std::max(res.contact_radius, row[0]);
    if (row[0] > 1.2 * res.oracle.alpha_H) res.outside_max = std::max(res.outside_max, row[1]);
  }
  res.peak_rel_err = std::abs(res.peak - res.oracle.p0) / res.oracle.p0;
  res.contact_radius_rel_err = std::abs(res.contact_radius - res.oracle.alpha_H) / res.oracle.alpha_H;
  return res;
}

// ---------------------------------------------------------------------------
// Scene execution with per-step file output.

namespace bench_detail {

inline void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError(dir + ": cannot create output directory (" + ec.message() + ")");
}

inline std::string step_name(int step, const char* what, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "step_%02d_%s.%s", step, what, ext);
  return buf;
}

inline void write_step_outputs(const System& sys, const SceneConfig& cfg, const VecX& x, int step) {
  namespace fs = std::filesystem;
  const fs::path dir = cfg.output.directory;

  std::vector<Vec3> points(sys.num_vertices());
  for (int v = 0; v < sys.num_vertices(); ++v) points[v] = x.segment<3>(3 * v);

  if (cfg.output.volume_meshes) {
    std::vector<std::array<int, 4>> cells;
    GridField stress{"cauchy_stress", 9, {}};
    for (const Body& body : sys.bodies) {
      const auto sigmas = body_stresses(body, x, sys.rest);
      for (size_t e = 0; e < body.ops.size(); ++e) {
        const auto& vv = body.ops[e].verts;
        cells.push_back({body.vertex_offset + vv[0], body.vertex_offset + vv[1],
                         body.vertex_offset + vv[2], body.vertex_offset + vv[3]});
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) stress.data.push_back(sigmas[e](r, c));
      }
    }
    GridField disp{"displacement", 3, {}};
    disp.data.resize(3 * points.size());
    for (int i = 0; i < static_cast<int>(points.size()); ++i)
      Eigen::Map<Vec3>(&disp.data[3 * i]) = x.segment<3>(3 * i) - sys.rest.segment<3>(3 * i);
    save_vtk_tets((dir / step_name(step, "volume", "vtk")).string(), points, cells, {disp},
                  {stress});
  }

  if (cfg.output.surface_meshes) {
    std::vector<std::array<int, 3>> tris;
    for (const Body& body : sys.bodies)
      for (const auto& tri : body.boundary.triangles)
        tris.push_back({body.vertex_offset + body.boundary.vertex_map[tri[0]],
                        body.vertex_offset + body.boundary.vertex_map[tri[1]],
                        body.vertex_offset + body.boundary.vertex_map[tri[2]]});
    save_vtk_tris((dir / step_name(step, "surface", "vtk")).string(), points, tris);
  }

  if (cfg.output.pressure_csv && !sys.contacts.empty()) {
    std::vector<std::vector<Real>> rows;
    for (size_t ci = 0; ci < sys.contacts.size(); ++ci) {
      const auto& pair = sys.contacts[ci];
      for (const auto& rec : contact_pressure_field(pair.state, pair.params, x))
        rows.push_back({static_cast<Real>(ci), static_cast<Real>(rec.sample),
                        rec.position.x(), rec.position.y(), rec.position.z(), rec.gap,
                        rec.pressure});
    }
    save_csv((dir / step_name(step, "pressure", "csv")).string(),
             {"pair", "sample", "x", "y", "z", "gap", "pressure"}, rows);
  }
}

}  // namespace bench_detail

// Builds, echoes and runs a scene. Wall-clock time is left out of the report
// in sequential mode so repeated runs produce byte-identical files.
inline Report run_scene(SceneConfig cfg, const std::string& out_override = "",
                        bool sequential = false, bool dry_run = false) {
  if (!out_override.empty()) cfg.output.directory = out_override;

  System sys = build_scene(cfg);
  Report rep;
  echo_scene(cfg, &sys, rep);
  rep.set("threads", static_cast<long>(sequential ? 1 : resolve_threads()));
  if (dry_run) {
    rep.set("dry_run", "true");
    return rep;
  }

  bench_detail::ensure_directory(cfg.output.directory);
  const RunStats stats = sys.solve(cfg.solver, [&](const StepStats& s, const VecX& x) {
    bench_detail::write_step_outputs(sys, cfg, x, s.step);
    const std::string k = "step." + std::to_string(s.step) + ".";
    rep.set(k + "newton_iters", static_cast<long>(s.newton_iters));
    rep.set(k + "rebuilds", static_cast<long>(s.rebuilds));
    rep.set(k + "backtracks", static_cast<long>(s.backtracks));
    rep.set(k + "residual", s.residual);
    rep.set(k + "energy", s.energy);
    rep.set(k + "min_gap", s.min_gap);
  });
  rep.set("total_newton_iters", static_cast<long>(stats.total_newton_iters));
  rep.set("total_rebuilds", static_cast<long>(stats.total_rebuilds));
  rep.set("newton_tol_used", stats.newton_tol_used);
  if (!sequential) rep.set("wall_seconds", stats.wall_seconds);
  rep.save((std::filesystem::path(cfg.output.directory) / "report.txt").string());
  return rep;
}

// ---------------------------------------------------------------------------
// Embedding replay: bind a visual mesh to a simulation surface once, then
// reconstruct it for every deformed frame.

struct EmbedResult {
  size_t visual_vertices = 0;
  size_t host_triangles = 0;
  Real rest_error = 0;  // max |reconstructed - original| over visual vertices (m)
  std::vector<std::string> outputs;
};

inline EmbedResult run_embed(const std::string& rest_path, const std::string& visual_path,
                             const std::vector<std::string>& frame_paths,
                             const std::string& out_dir) {
  const SurfaceMesh rest = load_surface_obj(rest_path);
  const SurfaceMesh visual = load_surface_obj(visual_path);

  const SurfaceEmbedding emb = embed_in_surface(visual.vertices, rest);
  EmbedResult res;
  res.visual_vertices = visual.vertices.size();
  res.host_triangles = rest.triangles.size();

  const auto rebuilt = apply_embedding(emb, rest.triangles, rest.vertices);
  for (size_t i = 0; i < rebuilt.size(); ++i)
    res.rest_error = std::max(res.rest_error, (rebuilt[i] - visual.vertices[i]).norm());

  bench_detail::ensure_directory(out_dir);
  for (const std::string& path : frame_paths) {
    const SurfaceMesh frame = load_surface_obj(path);
    if (frame.vertices.size() != rest.vertices.size() || frame.triangles != rest.triangles)
      throw ConfigError(path + ": topology differs from the rest surface");
    SurfaceMesh out;
    out.vertices = apply_embedding(emb, frame.triangles, frame.vertices);
    out.triangles = visual.triangles;
    const std::string name =
        (std::filesystem::path(out_dir) /
         (std::filesystem::path(path).stem().string() + "_visual.obj")).string();
    save_surface_obj(out, name);
    res.outputs.push_back(name);
  }
  return res;
}

}  // namespace gmcp
