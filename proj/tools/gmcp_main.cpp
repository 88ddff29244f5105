// Command-line driver: scene runs, the two validation benchmarks, and the
// embedding replay tool. Exit codes: 0 success, 1 solver failure, 2 I/O or
// configuration error.
#include "CLI11.hpp"
#include "gmcp/bench.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

using namespace gmcp;

struct CommonOpts {
  std::string out_dir = "out";
  bool sequential = false;
  bool dry_run = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
  cmd->add_flag("--seq", opts.sequential,
                "Deterministic sequential mode: one thread, no timing in reports");
  cmd->add_flag("--dry-run", opts.dry_run, "Validate and print the resolved configuration only");
}

std::array<int, 3> parse_divisions(const std::string& text, const std::string& flag) {
  std::array<int, 3> d;
  char tail;
  if (std::sscanf(text.c_str(), "%d,%d,%d%c", &d[0], &d[1], &d[2], &tail) != 3 ||
      d[0] < 1 || d[1] < 1 || d[2] < 1)
    throw ConfigError(flag + ": expected three positive integers a,b,c (got '" + text + "')");
  return d;
}

void print_report(const Report& rep) {
  for (const auto& e : rep.entries) std::cout << e.first << "=" << e.second << "\n";
}

void save_and_announce(const Report& rep, const std::string& out_dir) {
  bench_detail::ensure_directory(out_dir);
  const std::string path = (std::filesystem::path(out_dir) / "report.txt").string();
  rep.save(path);
  std::cout << "report: " << path << "\n";
}

int cmd_run(const std::string& scene_path, const CommonOpts& opts) {
  const SceneConfig cfg = parse_scene(scene_path);
  const Report rep = run_scene(cfg, opts.out_dir, opts.sequential, opts.dry_run);
  if (opts.dry_run) {
    print_report(rep);
    return 0;
  }
  std::cout << "scene " << scene_path << ": " << *rep.find("solver.load_steps") << " steps, "
            << *rep.find("total_newton_iters") << " Newton iterations\n";
  std::cout << "report: " << (std::filesystem::path(opts.out_dir) / "report.txt").string() << "\n";
  return 0;
}

int cmd_patch(Real kappa, const std::string& div_bottom, const std::string& div_top,
              const CommonOpts& opts) {
  const auto db = parse_divisions(div_bottom, "--div-bottom");
  const auto dt = parse_divisions(div_top, "--div-top");
  const SceneConfig cfg = make_patch_scene(kappa, db, dt);
  System sys = build_scene(cfg);

  Report rep;
  echo_scene(cfg, &sys, rep);
  rep.set("threads", static_cast<long>(opts.sequential ? 1 : resolve_threads()));
  if (opts.dry_run) {
    rep.set("dry_run", "true");
    print_report(rep);
    return 0;
  }

  const RunStats stats = sys.solve(cfg.solver, [&](const StepStats& s, const VecX&) {
    const std::string k = "step." + std::to_string(s.step) + ".";
    rep.set(k + "newton_iters", static_cast<long>(s.newton_iters));
    rep.set(k + "residual", s.residual);
    rep.set(k + "min_gap", s.min_gap);
  });
  const PatchReport metrics = patch_stress_metrics(sys, cfg.loads[0].pressure);
  rep.set("total_newton_iters", static_cast<long>(stats.total_newton_iters));
  rep.set("newton_tol_used", stats.newton_tol_used);
  rep.set("sigma_zz_max_rel_err", metrics.sigma_zz_max_rel_err);
  rep.set("sigma_spur", metrics.sigma_spur);
  if (!opts.sequential) rep.set("wall_seconds", stats.wall_seconds);

  std::cout << "patch test kappa=" << format_real(kappa)
            << ": sigma_zz_max_rel_err=" << format_real(metrics.sigma_zz_max_rel_err)
            << " sigma_spur=" << format_real(metrics.sigma_spur) << "\n";
  save_and_announce(rep, opts.out_dir);
  return 0;
}

int cmd_hertz(Real refine, int load_steps, const CommonOpts& opts) {
  HertzConfig cfg;
  cfg.refine = refine;
  cfg.load_steps = load_steps;

  Report rep;
  rep.set("oracle.load_convention", "total load P = Q*pi*R^2 (pressure symbol q equals Q)");
  const HertzOracle oracle = make_hertz_oracle(cfg.Q, cfg.R, cfg.E, cfg.nu);
  rep.set("oracle.Q", oracle.Q);
  rep.set("oracle.R", oracle.R);
  rep.set("oracle.E", cfg.E);
  rep.set("oracle.nu", cfg.nu);
  rep.set("oracle.E_star", oracle.E_star);
  rep.set("oracle.alpha_H", oracle.alpha_H);
  rep.set("oracle.p0", oracle.p0);
  rep.set("refine", cfg.refine);
  rep.set("load_steps", cfg.load_steps);
  rep.set("block_radius", cfg.block_radius);
  rep.set("block_height", cfg.block_height);
  rep.set("initial_gap", cfg.initial_gap);
  rep.set("eps_max", cfg.eps_max);
  rep.set("detection_radius", cfg.detection_radius);
  rep.set("slave_patch_radius", cfg.slave_patch_radius);
  rep.set("threads", static_cast<long>(opts.sequential ? 1 : resolve_threads()));

  if (opts.dry_run) {
    const TetMesh block = make_hertz_block(cfg);
    const TetMesh ball = make_hertz_ball(cfg);
    rep.set("block_tets", static_cast<long>(block.tets.size()));
    rep.set("ball_tets", static_cast<long>(ball.tets.size()));
    rep.set("kappa_face", oracle.p0 / (cfg.eps_max * (std::log(2.0) + 0.5)));
    rep.set("dry_run", "true");
    print_report(rep);
    return 0;
  }

  const HertzResult res = run_hertz(cfg, [](const StepStats& s) {
    std::cout << "  step " << s.step << ": " << s.newton_iters
              << " Newton iterations, residual " << format_real(s.residual) << "\n";
  });
  rep.set("block_tets", res.block_tets);
  rep.set("ball_tets", res.ball_tets);
  rep.set("kappa_face", res.params.kappa_face);
  rep.set("kappa_edge", res.params.kappa_edge);
  rep.set("kappa_point", res.params.kappa_point);
  rep.set("applied_force", res.applied_force);
  for (size_t i = 0; i < res.steps.size(); ++i) {
    const std::string k = "step." + std::to_string(res.steps[i].step) + ".";
    rep.set(k + "newton_iters", static_cast<long>(res.steps[i].newton_iters));
    rep.set(k + "residual", res.steps[i].residual);
    rep.set(k + "min_gap", res.steps[i].min_gap);
    rep.set(k + "active_samples", res.active_samples[i]);
  }
  rep.set("total_newton_iters", static_cast<long>(res.stats.total_newton_iters));
  rep.set("newton_tol_used", res.stats.newton_tol_used);
  rep.set("peak_pressure", res.peak);
  rep.set("peak_pressure_rel_err", res.peak_rel_err);
  rep.set("contact_radius", res.contact_radius);
  rep.set("contact_radius_rel_err", res.contact_radius_rel_err);
  rep.set("outside_max_pressure", res.outside_max);
  if (!opts.sequential) rep.set("wall_seconds", res.stats.wall_seconds);

  bench_detail::ensure_directory(opts.out_dir);
  std::vector<std::vector<Real>> rows;
  rows.reserve(res.profile.size());
  for (const auto& row : res.profile) rows.push_back({row[0], row[1], row[2]});
  const std::string csv = (std::filesystem::path(opts.out_dir) / "pressure.csv").string();
  save_csv(csv, {"radius", "pressure", "analytic_pressure"}, rows);

  std::cout << "peak pressure " << format_real(res.peak) << " (analytic "
            << format_real(oracle.p0) << ", rel err " << format_real(res.peak_rel_err) << ")\n"
            << "contact radius " << format_real(res.contact_radius) << " (analytic "
            << format_real(oracle.alpha_H) << ", rel err "
            << format_real(res.contact_radius_rel_err) << ")\n"
            << "pressure csv: " << csv << "\n";
  save_and_announce(rep, opts.out_dir);
  return 0;
}

int cmd_embed(const std::string& rest, const std::string& visual,
              const std::vector<std::string>& frames, const CommonOpts& opts) {
  Report rep;
  rep.set("rest_surface", rest);
  rep.set("visual_mesh", visual);
  rep.set("frames", static_cast<long>(frames.size()));

  if (opts.dry_run) {
    const SurfaceMesh host = load_surface_obj(rest);
    const SurfaceMesh vis = load_surface_obj(visual);
    rep.set("host_triangles", static_cast<long>(host.triangles.size()));
    rep.set("visual_vertices", static_cast<long>(vis.vertices.size()));
    rep.set("dry_run", "true");
    print_report(rep);
    return 0;
  }

  const EmbedResult res = run_embed(rest, visual, frames, opts.out_dir);
  rep.set("host_triangles", static_cast<long>(res.host_triangles));
  rep.set("visual_vertices", static_cast<long>(res.visual_vertices));
  rep.set("rest_reproduction_error", res.rest_error);
  for (size_t i = 0; i < res.outputs.size(); ++i)
    rep.set("output." + std::to_string(i), res.outputs[i]);

  std::cout << "embedded " << res.visual_vertices << " vertices in " << res.host_triangles
            << " host triangles; rest reproduction error " << format_real(res.rest_error) << "\n";
  save_and_announce(rep, opts.out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-static contact simulation: mortar-sampled barrier contact on "
               "tetrahedral linear-elastic bodies"};
  app.require_subcommand(1);

  CommonOpts opts;

  std::string scene_path;
  CLI::App* run = app.add_subcommand("run", "Run a scene file");
  run->add_option("scene", scene_path, "Scene configuration file")->required();
  add_common(run, opts);

  double kappa = 1e6;
  std::string div_bottom = "5,5,2", div_top = "4,4,2";
  CLI::App* patch = app.add_subcommand("patch-test", "Two-block contact patch test");
  patch->add_option("--kappa", kappa, "Face barrier stiffness")->capture_default_str();
  patch->add_option("--div-bottom", div_bottom, "Bottom block divisions a,b,c")
      ->capture_default_str();
  patch->add_option("--div-top", div_top, "Top block divisions a,b,c")->capture_default_str();
  add_common(patch, opts);

  double refine = 1.0;
  int load_steps = 10;
  CLI::App* hertz = app.add_subcommand("hertz", "Sphere-on-block indentation benchmark");
  hertz->add_option("--refine", refine, "Mesh refinement scale factor")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  hertz->add_option("--load-steps", load_steps, "Number of load steps")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_common(hertz, opts);

  std::string rest_path, visual_path;
  std::vector<std::string> frame_paths;
  CLI::App* embed = app.add_subcommand("embed", "Bind a visual mesh to a simulation surface "
                                                "and replay deformed frames");
  embed->add_option("rest", rest_path, "Rest simulation surface (OBJ)")->required();
  embed->add_option("visual", visual_path, "Visual mesh (OBJ)")->required();
  embed->add_option("frames", frame_paths, "Deformed surface frames (OBJ)")->required();
  add_common(embed, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (opts.sequential) set_thread_count(1);
    if (*run) return cmd_run(scene_path, opts);
    if (*patch) return cmd_patch(kappa, div_bottom, div_top, opts);
    if (*hertz) return cmd_hertz(refine, load_steps, opts);
    if (*embed) return cmd_embed(rest_path, visual_path, frame_paths, opts);
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 1;
  } catch (const InfeasibleGapError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
