#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "gmcp/bench.hpp"
#include "gmcp/scene.hpp"

using namespace gmcp;

namespace {

namespace fs = std::filesystem;

// parse_scene reads from disk, so every fixture goes through a real file.
std::string write_scene(const std::string& name, const std::string& text) {
  const fs::path dir = fs::temp_directory_path() / "gmcp_scene_tests";
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream out(path);
  out << text;
  return path.string();
}

// Parse failures must name the file and line and say what is wrong; the
// message format is stable, so compare the whole string.
void expect_parse_error(const std::string& text, long line, const std::string& what) {
  const std::string path = write_scene("bad.scene", text);
  try {
    parse_scene(path);
    FAIL("expected a parse error: " + what);
  } catch (const ParseError& e) {
    REQUIRE(std::string(e.what()) == path + ":" + std::to_string(line) + ": " + what);
  }
}

}  // namespace

TEST_CASE("a minimal scene parses with documented defaults") {
  const std::string path = write_scene("minimal.scene",
                                       "[body]\n"
                                       "name = solo\n"
                                       "youngs = 250\n");
  const SceneConfig cfg = parse_scene(path);

  REQUIRE(cfg.path == path);
  REQUIRE(cfg.bodies.size() == 1);
  const BodySpec& b = cfg.bodies[0];
  REQUIRE(b.name == "solo");
  REQUIRE(b.generator == "block");
  REQUIRE(b.size == Vec3(1, 1, 1));
  REQUIRE(b.divisions == std::array<int, 3>{1, 1, 1});
  REQUIRE(b.origin == Vec3(0, 0, 0));
  REQUIRE(b.youngs == 250.0);
  REQUIRE(b.poisson == 0.0);
  REQUIRE(b.line == 1);

  REQUIRE(cfg.bcs.empty());
  REQUIRE(cfg.loads.empty());
  REQUIRE(cfg.contacts.empty());
  REQUIRE(!cfg.body_force);
  REQUIRE(cfg.solver.load_steps == 10);
  REQUIRE(cfg.solver.max_newton_iters == 200);
  REQUIRE(cfg.output.directory == "out");
  REQUIRE(cfg.output.volume_meshes);
  REQUIRE(cfg.output.surface_meshes);
  REQUIRE(cfg.output.pressure_csv);
}

TEST_CASE("comments, blank lines, and load directions parse as written") {
  const std::string path = write_scene("loads.scene",
                                       "# leading comment\n"
                                       "\n"
                                       "[body]\n"
                                       "name = a  # trailing comment\n"
                                       "youngs = 10\n"
                                       "\n"
                                       "[bc]\n"
                                       "body = a\n"
                                       "axes = zx\n"
                                       "value = 0 0 -0.25\n"
                                       "\n"
                                       "[load]\n"
                                       "body = a\n"
                                       "pressure = 3.5\n"
                                       "\n"
                                       "[load]\n"
                                       "body = a\n"
                                       "pressure = 1\n"
                                       "direction = 0 0 -2\n"
                                       "\n"
                                       "[body_force]\n"
                                       "force = 0 0 -9.8\n");
  const SceneConfig cfg = parse_scene(path);

  REQUIRE(cfg.bodies[0].name == "a");
  REQUIRE(cfg.bcs.size() == 1);
  REQUIRE(cfg.bcs[0].axes[0]);
  REQUIRE(!cfg.bcs[0].axes[1]);
  REQUIRE(cfg.bcs[0].axes[2]);
  REQUIRE(cfg.bcs[0].value == Vec3(0, 0, -0.25));

  REQUIRE(cfg.loads.size() == 2);
  REQUIRE(!cfg.loads[0].direction);  // default: inward normal
  REQUIRE(cfg.loads[0].pressure == 3.5);
  REQUIRE(cfg.loads[1].direction);
  REQUIRE(*cfg.loads[1].direction == Vec3(0, 0, -1));  // normalized on parse

  REQUIRE(cfg.body_force);
  REQUIRE(*cfg.body_force == Vec3(0, 0, -9.8));
}

TEST_CASE("parse failures carry the file, the line, and the reason") {
  expect_parse_error("[body\n", 1, "unterminated section header");
  expect_parse_error("[frobnicate]\n", 1, "unknown section [frobnicate]");
  expect_parse_error("name = x\n", 1, "key 'name' outside any section");
  expect_parse_error("[body]\njust some text\n", 2, "expected key = value");
  expect_parse_error("[body]\n= 3\n", 2, "empty key");
  expect_parse_error("[body]\nyoungs =\n", 2, "key 'youngs' has no value");
  expect_parse_error("[body]\nname = a\nyoungs = 1\nwobble = 3\n", 4,
                     "unknown key 'wobble' in [body]");
  expect_parse_error("[body]\nname = a\nsize = 1 2\n", 3, "key 'size' expects 3 number(s)");
  expect_parse_error("[body]\nname = a\nsize = 1 2 3 4\n", 3, "key 'size' expects 3 number(s)");
  expect_parse_error("[solver]\nload_steps = 2.5\n", 2, "key 'load_steps' expects an integer");
  expect_parse_error("[output]\nvolume_meshes = maybe\n", 2,
                     "key 'volume_meshes' expects true or false");
  expect_parse_error("[body]\nname = a\ndivisions = 0 2 2\n", 3,
                     "divisions must be positive integers");
  expect_parse_error("[body]\nname = a\ngenerator = tets\n", 3,
                     "generator must be 'block' or 'mesh'");
  expect_parse_error("[bc]\naxes = xq\n", 2, "axes must be a subset of xyz");
  expect_parse_error("[bc]\nbox = 0 0 0 -1 1 1\n", 2, "key 'box' has min > max");
}

TEST_CASE("validation failures point at the offending section header") {
  expect_parse_error("[body]\nyoungs = 5\n", 1, "[body] requires a name");
  expect_parse_error("[body]\nname = a\n", 1, "body 'a': youngs must be positive");
  expect_parse_error("[body]\nname = a\nyoungs = 5\npoisson = 0.5\n", 1,
                     "body 'a': poisson must lie in (-1, 0.5)");
  expect_parse_error("[body]\nname = a\nyoungs = 5\nsize = 1 0 1\n", 1,
                     "body 'a': size must be positive");
  expect_parse_error("[body]\nname = a\nyoungs = 5\ngenerator = mesh\n", 1,
                     "body 'a': mesh generator requires node and ele paths");
  expect_parse_error(
      "[body]\nname = a\nyoungs = 5\n\n[body]\nname = a\nyoungs = 5\n", 5,
      "duplicate body name 'a'");

  const std::string one_body = "[body]\nname = a\nyoungs = 5\n\n";  // lines 1-4
  expect_parse_error(one_body + "[bc]\nbody = ghost\naxes = z\n", 5,
                     "[bc] key 'body' references absent body 'ghost'");
  expect_parse_error(one_body + "[bc]\nbody = a\n", 5, "[bc] constrains no axes");
  expect_parse_error(one_body + "[bc]\nbody = a\naxes = z\n\n[load]\nbody = ghost\n", 9,
                     "[load] key 'body' references absent body 'ghost'");
  expect_parse_error(one_body + "[contact]\nslave = ghost\nmaster = a\n", 5,
                     "[contact] key 'slave' references absent body 'ghost'");
  expect_parse_error(one_body + "[contact]\nslave = a\nmaster = ghost\n", 5,
                     "[contact] key 'master' references absent body 'ghost'");
  expect_parse_error(one_body + "[contact]\nslave = a\nmaster = a\nkappa_face = -1\n", 5,
                     "[contact] kappa_face must be positive");
  expect_parse_error(one_body + "[contact]\nslave = a\nmaster = a\neps_max = 0\n", 5,
                     "[contact] eps_max must be positive");
}

TEST_CASE("loads without any boundary condition are rejected") {
  const std::string path = write_scene("floating.scene",
                                       "[body]\n"
                                       "name = a\n"
                                       "youngs = 5\n"
                                       "\n"
                                       "[load]\n"
                                       "body = a\n"
                                       "pressure = 1\n");
  try {
    parse_scene(path);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    REQUIRE(std::string(e.what()).find("loads require at least one boundary condition") !=
            std::string::npos);
  }

  // A pure body force can also push an unconstrained body around.
  const std::string path2 = write_scene("floating2.scene",
                                        "[body]\n"
                                        "name = a\n"
                                        "youngs = 5\n"
                                        "\n"
                                        "[body_force]\n"
                                        "force = 0 0 -1\n");
  REQUIRE_THROWS_AS(parse_scene(path2), ConfigError);
}

TEST_CASE("selector boxes that miss the mesh fail at build time") {
  const std::string bc_miss = write_scene("bc_miss.scene",
                                          "[body]\n"
                                          "name = a\n"
                                          "youngs = 10\n"
                                          "\n"
                                          "[bc]\n"
                                          "body = a\n"
                                          "box = 5 5 5 6 6 6\n"
                                          "axes = xyz\n");
  try {
    build_scene(parse_scene(bc_miss));
    FAIL("expected an empty-selection error");
  } catch (const ParseError& e) {
    REQUIRE(std::string(e.what()) == bc_miss + ":5: [bc] box selects no vertices");
  }

  const std::string load_miss = write_scene("load_miss.scene",
                                            "[body]\n"
                                            "name = a\n"
                                            "youngs = 10\n"
                                            "\n"
                                            "[bc]\n"
                                            "body = a\n"
                                            "box = -1 -1 -1 2 2 1e-9\n"
                                            "axes = xyz\n"
                                            "\n"
                                            "[load]\n"
                                            "body = a\n"
                                            "box = 4 4 4 5 5 5\n"
                                            "pressure = 1\n");
  try {
    build_scene(parse_scene(load_miss));
    FAIL("expected an empty-selection error");
  } catch (const ParseError& e) {
    REQUIRE(std::string(e.what()) == load_miss + ":10: [load] box selects no boundary faces");
  }

  const std::string contact_miss = write_scene("contact_miss.scene",
                                               "[body]\n"
                                               "name = a\n"
                                               "youngs = 10\n"
                                               "\n"
                                               "[body]\n"
                                               "name = b\n"
                                               "youngs = 10\n"
                                               "origin = 0 0 2\n"
                                               "\n"
                                               "[bc]\n"
                                               "body = a\n"
                                               "box = -1 -1 -1 2 2 1e-9\n"
                                               "axes = xyz\n"
                                               "\n"
                                               "[contact]\n"
                                               "slave = b\n"
                                               "master = a\n"
                                               "slave_box = 9 9 9 10 10 10\n");
  try {
    build_scene(parse_scene(contact_miss));
    FAIL("expected an empty-selection error");
  } catch (const ParseError& e) {
    REQUIRE(std::string(e.what()) == contact_miss + ":15: [contact] slave_box selects no faces");
  }
}

TEST_CASE("the stacked-block scene file matches the built-in configuration") {
  const fs::path scene_path =
      fs::path(__FILE__).parent_path().parent_path() / "scenes" / "patch_test.scene";
  REQUIRE(fs::exists(scene_path));

  const SceneConfig file_cfg = parse_scene(scene_path.string());
  const SceneConfig code_cfg = make_patch_scene();

  REQUIRE(file_cfg.bodies.size() == code_cfg.bodies.size());
  for (size_t i = 0; i < code_cfg.bodies.size(); ++i) {
    REQUIRE(file_cfg.bodies[i].name == code_cfg.bodies[i].name);
    REQUIRE(file_cfg.bodies[i].size == code_cfg.bodies[i].size);
    REQUIRE(file_cfg.bodies[i].divisions == code_cfg.bodies[i].divisions);
    REQUIRE(file_cfg.bodies[i].origin == code_cfg.bodies[i].origin);
    REQUIRE(file_cfg.bodies[i].youngs == code_cfg.bodies[i].youngs);
    REQUIRE(file_cfg.bodies[i].poisson == code_cfg.bodies[i].poisson);
  }
  REQUIRE(file_cfg.loads.size() == 1);
  REQUIRE(file_cfg.loads[0].pressure == code_cfg.loads[0].pressure);
  REQUIRE(file_cfg.contacts.size() == 1);
  REQUIRE(file_cfg.contacts[0].slave == code_cfg.contacts[0].slave);
  REQUIRE(file_cfg.contacts[0].master == code_cfg.contacts[0].master);
  REQUIRE(file_cfg.contacts[0].params.kappa_face == code_cfg.contacts[0].params.kappa_face);
  REQUIRE(file_cfg.contacts[0].params.eps_max == code_cfg.contacts[0].params.eps_max);
  REQUIRE(file_cfg.solver.load_steps == code_cfg.solver.load_steps);

  // The built systems must agree dof for dof: same meshes, same constraint
  // targets, same dead loads, same resolved contact stiffnesses.
  const System sys_f = build_scene(file_cfg);
  const System sys_c = build_scene(code_cfg);
  REQUIRE(sys_f.rest.size() == sys_c.rest.size());
  for (long d = 0; d < sys_f.rest.size(); ++d) {
    REQUIRE(sys_f.rest[d] == sys_c.rest[d]);
    REQUIRE(sys_f.f_ext[d] == sys_c.f_ext[d]);
    REQUIRE(sys_f.fixed[d] == sys_c.fixed[d]);
    if (sys_f.fixed[d]) REQUIRE(sys_f.dirichlet[d] == sys_c.dirichlet[d]);
  }
  REQUIRE(sys_f.contacts.size() == 1);
  REQUIRE(sys_f.contacts[0].slave.tris.size() == sys_c.contacts[0].slave.tris.size());
  REQUIRE(sys_f.contacts[0].params.kappa_edge == sys_c.contacts[0].params.kappa_edge);
  REQUIRE(sys_f.contacts[0].params.kappa_point == sys_c.contacts[0].params.kappa_point);
  REQUIRE(sys_f.contacts[0].params.detection_radius ==
          sys_c.contacts[0].params.detection_radius);
}

TEST_CASE("removing the load leaves the stacked blocks exactly at rest") {
  SceneConfig cfg = make_patch_scene();
  cfg.loads.clear();
  cfg.solver.threads = 1;
  System sys = build_scene(cfg);
  const RunStats stats = sys.solve(cfg.solver);

  REQUIRE(stats.steps.size() == 10);
  for (const StepStats& ss : stats.steps) REQUIRE(ss.newton_iters == 0);
  for (long d = 0; d < sys.x.size(); ++d) REQUIRE(sys.x[d] == sys.rest[d]);
}

TEST_CASE("dry runs echo the resolved configuration without touching disk") {
  const fs::path out_dir = fs::temp_directory_path() / "gmcp_scene_dry_run_out";
  fs::remove_all(out_dir);

  const SceneConfig cfg = make_patch_scene();
  const Report rep = run_scene(cfg, out_dir.string(), /*sequential=*/true, /*dry_run=*/true);

  REQUIRE(!fs::exists(out_dir));
  const std::string* dry = rep.find("dry_run");
  REQUIRE(dry);
  REQUIRE(*dry == "true");
  const std::string* bodies = rep.find("scene.bodies");
  REQUIRE(bodies);
  REQUIRE(*bodies == "2");
  const std::string* youngs = rep.find("body.top.youngs");
  REQUIRE(youngs);
  REQUIRE(*youngs == "1000");

  // Contact stiffnesses are echoed in resolved form, not as the -1 sentinel.
  const std::string* kappa_edge = rep.find("contact.0.kappa_edge");
  REQUIRE(kappa_edge);
  REQUIRE(std::stod(*kappa_edge) > 0.0);
  const std::string* threads = rep.find("threads");
  REQUIRE(threads);
  REQUIRE(*threads == "1");
  REQUIRE(rep.find("wall_seconds") == nullptr);
}
