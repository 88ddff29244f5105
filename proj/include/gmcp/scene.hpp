// Declarative scene description: bodies (generated blocks or mesh files),
// box-selected boundary conditions, pressure loads, contact pairs, solver and
// output settings. The text format is line oriented: [section] headers start
// a new entry, key = value lines fill it, '#' starts a comment. Every parse
// or validation failure reports the offending line number.
#pragma once

#include "gmcp/mesh_io.hpp"
#include "gmcp/solver.hpp"
#include "gmcp/vtk_io.hpp"

#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace gmcp {

// Axis-aligned selector over rest positions; bounds are inclusive.
struct SelectorBox {
  Vec3 lo = Vec3::Constant(-1e30);
  Vec3 hi = Vec3::Constant(1e30);

  bool contains(const Vec3& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y() &&
           p.z() >= lo.z() && p.z() <= hi.z();
  }
  std::string describe() const {
    std::string s;
    for (int k = 0; k < 3; ++k) s += format_real(lo[k]) + " ";
    for (int k = 0; k < 3; ++k) s += format_real(hi[k]) + (k < 2 ? " " : "");
    return s;
  }
};

struct BodySpec {
  std::string name;
  std::string generator = "block";  // block | mesh
  Vec3 size = Vec3(1, 1, 1);
  std::array<int, 3> divisions = {1, 1, 1};
  Vec3 origin = Vec3(0, 0, 0);
  std::string node_path, ele_path;  // generator == mesh
  Real youngs = -1;
  Real poisson = 0;
  Vec3 translate = Vec3(0, 0, 0);
  long line = 0;
};

struct BcSpec {
  std::string body;
  SelectorBox box;
  bool axes[3] = {false, false, false};
  Vec3 value = Vec3(0, 0, 0);  // target displacement on constrained axes
  long line = 0;
};

struct LoadSpec {
  std::string body;
  SelectorBox box;  // selects boundary faces with all three vertices inside
  Real pressure = 0;
  std::optional<Vec3> direction;  // unit traction direction; default inward normal
  long line = 0;
};

struct ContactSpec {
  std::string slave, master;
  std::optional<SelectorBox> slave_box;  // restricts slave faces; default whole boundary
  BarrierParams params;
  long line = 0;
};

struct OutputSpec {
  std::string directory = "out";
  bool volume_meshes = true;
  bool surface_meshes = true;
  bool pressure_csv = true;
};

struct SceneConfig {
  std::string path = "<builtin>";
  std::vector<BodySpec> bodies;
  std::vector<BcSpec> bcs;
  std::vector<LoadSpec> loads;
  std::optional<Vec3> body_force;  // per unit volume, applied to every body
  std::vector<ContactSpec> contacts;
  SolverSettings solver;
  OutputSpec output;
};

namespace scene_detail {

[[noreturn]] inline void fail(const std::string& path, long line, const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<Real> parse_reals(const std::string& path, long line, const std::string& key,
                                     const std::string& value, size_t n) {
  std::istringstream in(value);
  std::vector<Real> out(n);
  for (size_t i = 0; i < n; ++i)
    if (!(in >> out[i]))
      fail(path, line, "key '" + key + "' expects " + std::to_string(n) + " number(s)");
  std::string rest;
  if (in >> rest) fail(path, line, "key '" + key + "' expects " + std::to_string(n) + " number(s)");
  return out;
}

inline Real parse_real(const std::string& path, long line, const std::string& key,
                       const std::string& value) {
  return parse_reals(path, line, key, value, 1)[0];
}

inline long parse_int(const std::string& path, long line, const std::string& key,
                      const std::string& value) {
  const Real r = parse_real(path, line, key, value);
  const long i = static_cast<long>(r);
  if (static_cast<Real>(i) != r) fail(path, line, "key '" + key + "' expects an integer");
  return i;
}

inline bool parse_bool(const std::string& path, long line, const std::string& key,
                       const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail(path, line, "key '" + key + "' expects true or false");
}

inline Vec3 parse_vec3(const std::string& path, long line, const std::string& key,
                       const std::string& value) {
  const auto v = parse_reals(path, line, key, value, 3);
  return Vec3(v[0], v[1], v[2]);
}

inline SelectorBox parse_box(const std::string& path, long line, const std::string& key,
                             const std::string& value) {
  const auto v = parse_reals(path, line, key, value, 6);
  SelectorBox box;
  box.lo = Vec3(v[0], v[1], v[2]);
  box.hi = Vec3(v[3], v[4], v[5]);
  for (int k = 0; k < 3; ++k)
    if (box.lo[k] > box.hi[k]) fail(path, line, "key '" + key + "' has min > max");
  return box;
}

}  // namespace scene_detail

inline void validate_scene(const SceneConfig& cfg);

inline SceneConfig parse_scene(const std::string& path) {
  using namespace scene_detail;
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");

  SceneConfig cfg;
  cfg.path = path;
  std::string section;
  std::string raw;
  long line = 0;
  // body_force is keyed like a section but holds a single optional vector
  long body_force_line = 0;

  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') fail(path, line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section == "body")
        cfg.bodies.emplace_back().line = line;
      else if (section == "bc")
        cfg.bcs.emplace_back().line = line;
      else if (section == "load")
        cfg.loads.emplace_back().line = line;
      else if (section == "contact")
        cfg.contacts.emplace_back().line = line;
      else if (section == "body_force")
        body_force_line = line;
      else if (section != "solver" && section != "output")
        fail(path, line, "unknown section [" + section + "]");
      continue;
    }

    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(path, line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail(path, line, "empty key");
    if (value.empty()) fail(path, line, "key '" + key + "' has no value");
    if (section.empty()) fail(path, line, "key '" + key + "' outside any section");

    if (section == "body") {
      BodySpec& b = cfg.bodies.back();
      if (key == "name")
        b.name = value;
      else if (key == "generator") {
        if (value != "block" && value != "mesh")
          fail(path, line, "generator must be 'block' or 'mesh'");
        b.generator = value;
      } else if (key == "size")
        b.size = parse_vec3(path, line, key, value);
      else if (key == "divisions") {
        const auto v = parse_reals(path, line, key, value, 3);
        for (int k = 0; k < 3; ++k) {
          b.divisions[k] = static_cast<int>(v[k]);
          if (static_cast<Real>(b.divisions[k]) != v[k] || b.divisions[k] < 1)
            fail(path, line, "divisions must be positive integers");
        }
      } else if (key == "origin")
        b.origin = parse_vec3(path, line, key, value);
      else if (key == "node")
        b.node_path = value;
      else if (key == "ele")
        b.ele_path = value;
      else if (key == "youngs")
        b.youngs = parse_real(path, line, key, value);
      else if (key == "poisson")
        b.poisson = parse_real(path, line, key, value);
      else if (key == "translate")
        b.translate = parse_vec3(path, line, key, value);
      else
        fail(path, line, "unknown key '" + key + "' in [body]");
    } else if (section == "bc") {
      BcSpec& bc = cfg.bcs.back();
      if (key == "body")
        bc.body = value;
      else if (key == "box")
        bc.box = parse_box(path, line, key, value);
      else if (key == "axes") {
        bc.axes[0] = bc.axes[1] = bc.axes[2] = false;
        for (char c : value) {
          if (c == 'x')
            bc.axes[0] = true;
          else if (c == 'y')
            bc.axes[1] = true;
          else if (c == 'z')
            bc.axes[2] = true;
          else
            fail(path, line, "axes must be a subset of xyz");
        }
      } else if (key == "value")
        bc.value = parse_vec3(path, line, key, value);
      else
        fail(path, line, "unknown key '" + key + "' in [bc]");
    } else if (section == "load") {
      LoadSpec& ld = cfg.loads.back();
      if (key == "body")
        ld.body = value;
      else if (key == "box")
        ld.box = parse_box(path, line, key, value);
      else if (key == "pressure")
        ld.pressure = parse_real(path, line, key, value);
      else if (key == "direction")
        ld.direction = parse_vec3(path, line, key, value).normalized();
      else
        fail(path, line, "unknown key '" + key + "' in [load]");
    } else if (section == "body_force") {
      if (key == "force")
        cfg.body_force = parse_vec3(path, line, key, value);
      else
        fail(path, line, "unknown key '" + key + "' in [body_force]");
    } else if (section == "contact") {
      ContactSpec& c = cfg.contacts.back();
      BarrierParams& p = c.params;
      if (key == "slave")
        c.slave = value;
      else if (key == "master")
        c.master = value;
      else if (key == "slave_box")
        c.slave_box = parse_box(path, line, key, value);
      else if (key == "kappa_face")
        p.kappa_face = parse_real(path, line, key, value);
      else if (key == "kappa_edge")
        p.kappa_edge = parse_real(path, line, key, value);
      else if (key == "kappa_point")
        p.kappa_point = parse_real(path, line, key, value);
      else if (key == "eps_max")
        p.eps_max = parse_real(path, line, key, value);
      else if (key == "delta_face")
        p.delta_face = parse_real(path, line, key, value);
      else if (key == "delta_edge")
        p.delta_edge = parse_real(path, line, key, value);
      else if (key == "detection_radius")
        p.detection_radius = parse_real(path, line, key, value);
      else if (key == "quad_order_face")
        p.quad_order_face = static_cast<int>(parse_int(path, line, key, value));
      else if (key == "quad_order_edge")
        p.quad_order_edge = static_cast<int>(parse_int(path, line, key, value));
      else
        fail(path, line, "unknown key '" + key + "' in [contact]");
    } else if (section == "solver") {
      SolverSettings& s2 = cfg.solver;
      if (key == "load_steps")
        s2.load_steps = static_cast<int>(parse_int(path, line, key, value));
      else if (key == "max_newton_iters")
        s2.max_newton_iters = static_cast<int>(parse_int(path, line, key, value));
      else if (key == "newton_tol")
        s2.newton_tol = parse_real(path, line, key, value);
      else if (key == "max_line_search")
        s2.max_line_search = static_cast<int>(parse_int(path, line, key, value));
      else
        fail(path, line, "unknown key '" + key + "' in [solver]");
    } else if (section == "output") {
      OutputSpec& o = cfg.output;
      if (key == "directory")
        o.directory = value;
      else if (key == "volume_meshes")
        o.volume_meshes = parse_bool(path, line, key, value);
      else if (key == "surface_meshes")
        o.surface_meshes = parse_bool(path, line, key, value);
      else if (key == "pressure_csv")
        o.pressure_csv = parse_bool(path, line, key, value);
      else
        fail(path, line, "unknown key '" + key + "' in [output]");
    }
  }
  (void)body_force_line;
  validate_scene(cfg);
  return cfg;
}

inline int find_body(const SceneConfig& cfg, const std::string& name) {
  for (size_t i = 0; i < cfg.bodies.size(); ++i)
    if (cfg.bodies[i].name == name) return static_cast<int>(i);
  return -1;
}

inline void validate_scene(const SceneConfig& cfg) {
  using scene_detail::fail;
  const std::string& path = cfg.path;
  for (size_t i = 0; i < cfg.bodies.size(); ++i) {
    const BodySpec& b = cfg.bodies[i];
    if (b.name.empty()) fail(path, b.line, "[body] requires a name");
    for (size_t j = 0; j < i; ++j)
      if (cfg.bodies[j].name == b.name) fail(path, b.line, "duplicate body name '" + b.name + "'");
    if (b.youngs <= 0) fail(path, b.line, "body '" + b.name + "': youngs must be positive");
    if (b.poisson <= -1 || b.poisson >= 0.5)
      fail(path, b.line, "body '" + b.name + "': poisson must lie in (-1, 0.5)");
    if (b.generator == "block") {
      if (!(b.size.minCoeff() > 0)) fail(path, b.line, "body '" + b.name + "': size must be positive");
    } else {
      if (b.node_path.empty() || b.ele_path.empty())
        fail(path, b.line, "body '" + b.name + "': mesh generator requires node and ele paths");
    }
  }
  for (const BcSpec& bc : cfg.bcs) {
    if (find_body(cfg, bc.body) < 0)
      fail(path, bc.line, "[bc] key 'body' references absent body '" + bc.body + "'");
    if (!bc.axes[0] && !bc.axes[1] && !bc.axes[2]) fail(path, bc.line, "[bc] constrains no axes");
  }
  for (const LoadSpec& ld : cfg.loads) {
    if (find_body(cfg, ld.body) < 0)
      fail(path, ld.line, "[load] key 'body' references absent body '" + ld.body + "'");
  }
  for (const ContactSpec& c : cfg.contacts) {
    if (find_body(cfg, c.slave) < 0)
      fail(path, c.line, "[contact] key 'slave' references absent body '" + c.slave + "'");
    if (find_body(cfg, c.master) < 0)
      fail(path, c.line, "[contact] key 'master' references absent body '" + c.master + "'");
    const BarrierParams& p = c.params;
    if (p.kappa_face <= 0) fail(path, c.line, "[contact] kappa_face must be positive");
    if (p.eps_max <= 0) fail(path, c.line, "[contact] eps_max must be positive");
  }
  if ((!cfg.loads.empty() || cfg.body_force) && cfg.bcs.empty())
    throw ConfigError(path + ": loads require at least one boundary condition");
  if (cfg.solver.load_steps < 1) throw ConfigError(path + ": load_steps must be >= 1");
}

// Instantiates the configured system. Selector errors (empty selections)
// surface here because they depend on the generated meshes.
inline System build_scene(const SceneConfig& cfg) {
  using scene_detail::fail;
  System sys;
  for (const BodySpec& b : cfg.bodies) {
    TetMesh mesh = b.generator == "block"
                       ? make_block(b.size, b.divisions, b.origin)
                       : load_tet_mesh(b.node_path, b.ele_path);
    if (b.translate != Vec3(0, 0, 0))
      for (auto& v : mesh.vertices) v += b.translate;
    sys.add_body(mesh, make_material(b.youngs, b.poisson), b.name);
  }

  for (const BcSpec& bc : cfg.bcs) {
    const Body& body = sys.bodies[find_body(cfg, bc.body)];
    int selected = 0;
    for (int v = 0; v < body.num_vertices; ++v) {
      const int gv = body.vertex_offset + v;
      const Vec3 p = sys.rest.segment<3>(3 * gv);
      if (!bc.box.contains(p)) continue;
      ++selected;
      for (int k = 0; k < 3; ++k)
        if (bc.axes[k]) sys.fix_dof(gv, k, p[k] + bc.value[k]);
    }
    if (selected == 0) fail(cfg.path, bc.line, "[bc] box selects no vertices");
  }

  for (const LoadSpec& ld : cfg.loads) {
    const Body& body = sys.bodies[find_body(cfg, ld.body)];
    std::vector<std::array<int, 3>> faces;
    for (const auto& tri : body.boundary.triangles) {
      bool inside = true;
      std::array<int, 3> gtri;
      for (int k = 0; k < 3; ++k) {
        gtri[k] = body.vertex_offset + body.boundary.vertex_map[tri[k]];
        if (!ld.box.contains(sys.rest.segment<3>(3 * gtri[k]))) inside = false;
      }
      if (inside) faces.push_back(gtri);
    }
    if (faces.empty()) fail(cfg.path, ld.line, "[load] box selects no boundary faces");
    add_pressure_forces(faces, sys.rest, ld.pressure, ld.direction, sys.f_ext);
  }

  if (cfg.body_force)
    for (size_t bi = 0; bi < sys.bodies.size(); ++bi)
      add_body_forces(sys.bodies[bi].ops, *cfg.body_force, sys.f_ext,
                      sys.bodies[bi].vertex_offset);

  for (const ContactSpec& c : cfg.contacts) {
    const int si = find_body(cfg, c.slave);
    const int mi = find_body(cfg, c.master);
    std::vector<int> slave_tris;
    const std::vector<int>* subset = nullptr;
    if (c.slave_box) {
      const Body& body = sys.bodies[si];
      for (size_t t = 0; t < body.boundary.triangles.size(); ++t) {
        bool inside = true;
        for (int k = 0; k < 3; ++k) {
          const int gv = body.vertex_offset + body.boundary.vertex_map[body.boundary.triangles[t][k]];
          if (!c.slave_box->contains(sys.rest.segment<3>(3 * gv))) inside = false;
        }
        if (inside) slave_tris.push_back(static_cast<int>(t));
      }
      if (slave_tris.empty()) fail(cfg.path, c.line, "[contact] slave_box selects no faces");
      subset = &slave_tris;
    }
    sys.add_contact_pair(si, mi, c.params, subset, nullptr);
  }
  return sys;
}

// Every value that influences the run, defaults included, keyed for the
// report. Resolved contact parameters are echoed from the built system since
// the derived scales depend on the slave mesh.
inline void echo_scene(const SceneConfig& cfg, const System* sys, Report& rep) {
  rep.set("scene.path", cfg.path);
  rep.set("scene.bodies", static_cast<long>(cfg.bodies.size()));
  for (const BodySpec& b : cfg.bodies) {
    const std::string k = "body." + b.name + ".";
    rep.set(k + "generator", b.generator);
    if (b.generator == "block") {
      rep.set(k + "size", format_real(b.size.x()) + " " + format_real(b.size.y()) + " " +
                              format_real(b.size.z()));
      rep.set(k + "divisions", std::to_string(b.divisions[0]) + " " + std::to_string(b.divisions[1]) +
                                   " " + std::to_string(b.divisions[2]));
      rep.set(k + "origin", format_real(b.origin.x()) + " " + format_real(b.origin.y()) + " " +
                                format_real(b.origin.z()));
    } else {
      rep.set(k + "node", b.node_path);
      rep.set(k + "ele", b.ele_path);
    }
    rep.set(k + "youngs", b.youngs);
    rep.set(k + "poisson", b.poisson);
    rep.set(k + "translate", format_real(b.translate.x()) + " " + format_real(b.translate.y()) +
                                 " " + format_real(b.translate.z()));
  }
  for (size_t i = 0; i < cfg.bcs.size(); ++i) {
    const BcSpec& bc = cfg.bcs[i];
    const std::string k = "bc." + std::to_string(i) + ".";
    rep.set(k + "body", bc.body);
    rep.set(k + "box", bc.box.describe());
    std::string axes;
    if (bc.axes[0]) axes += 'x';
    if (bc.axes[1]) axes += 'y';
    if (bc.axes[2]) axes += 'z';
    rep.set(k + "axes", axes);
    rep.set(k + "value", format_real(bc.value.x()) + " " + format_real(bc.value.y()) + " " +
                             format_real(bc.value.z()));
  }
  for (size_t i = 0; i < cfg.loads.size(); ++i) {
    const LoadSpec& ld = cfg.loads[i];
    const std::string k = "load." + std::to_string(i) + ".";
    rep.set(k + "body", ld.body);
    rep.set(k + "box", ld.box.describe());
    rep.set(k + "pressure", ld.pressure);
    rep.set(k + "direction", ld.direction ? format_real(ld.direction->x()) + " " +
                                                format_real(ld.direction->y()) + " " +
                                                format_real(ld.direction->z())
                                          : std::string("inward_normal"));
  }
  if (cfg.body_force)
    rep.set("body_force", format_real(cfg.body_force->x()) + " " + format_real(cfg.body_force->y()) +
                              " " + format_real(cfg.body_force->z()));
  for (size_t i = 0; i < cfg.contacts.size(); ++i) {
    const ContactSpec& c = cfg.contacts[i];
    const std::string k = "contact." + std::to_string(i) + ".";
    rep.set(k + "slave", c.slave);
    rep.set(k + "master", c.master);
    if (c.slave_box) rep.set(k + "slave_box", c.slave_box->describe());
    // resolved values when a built system is available, raw config otherwise
    const BarrierParams& p = sys ? sys->contacts[i].params : c.params;
    rep.set(k + "kappa_face", p.kappa_face);
    rep.set(k + "kappa_edge", p.kappa_edge);
    rep.set(k + "kappa_point", p.kappa_point);
    rep.set(k + "eps_max", p.eps_max);
    rep.set(k + "delta_face", p.delta_face);
    rep.set(k + "delta_edge", p.delta_edge);
    rep.set(k + "detection_radius", p.detection_radius);
    rep.set(k + "quad_order_face", p.quad_order_face);
    rep.set(k + "quad_order_edge", p.quad_order_edge);
  }
  rep.set("solver.load_steps", cfg.solver.load_steps);
  rep.set("solver.max_newton_iters", cfg.solver.max_newton_iters);
  rep.set("solver.max_line_search", cfg.solver.max_line_search);
  rep.set("solver.newton_tol", cfg.solver.newton_tol < 0 ? std::string("derived")
                                                         : format_real(cfg.solver.newton_tol));
  rep.set("output.directory", cfg.output.directory);
  rep.set("output.volume_meshes", cfg.output.volume_meshes ? "true" : "false");
  rep.set("output.surface_meshes", cfg.output.surface_meshes ? "true" : "false");
  rep.set("output.pressure_csv", cfg.output.pressure_csv ? "true" : "false");
}

}  // namespace gmcp
