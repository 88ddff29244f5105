// Surface embedding: binding, reconstruction accuracy, rigid equivariance,
// and the convergence of the reconstruction under host refinement.
#include <catch2/catch_amalgamated.hpp>

#include "gmcp/bench.hpp"
#include "gmcp/embedding.hpp"
#include "gmcp/mesh_io.hpp"

#include <filesystem>
#include <random>

using namespace gmcp;

namespace {

SurfaceMesh single_triangle(const Vec3& a, const Vec3& b, const Vec3& c) {
  SurfaceMesh s;
  s.vertices = {a, b, c};
  s.triangles = {{0, 1, 2}};
  return s;
}

// Flat triangulated n x n grid over the unit square at z = 0.
SurfaceMesh flat_grid(int n) {
  SurfaceMesh s;
  const Real h = 1.0 / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) s.vertices.push_back(Vec3(i * h, j * h, 0));
  auto id = [&](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      s.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      s.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return s;
}

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "gmcp_embed_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

Mat3 random_rotation(std::mt19937& rng) {
  std::normal_distribution<Real> n(0.0, 1.0);
  Eigen::Quaternion<Real> q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

}  // namespace

TEST_CASE("signed normal offsets are recovered for points off a triangle") {
  const SurfaceMesh host =
      single_triangle(Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 2, 0));
  const Vec3 centroid(2.0 / 3, 2.0 / 3, 0);
  const std::vector<Vec3> pts = {centroid + Vec3(0, 0, 0.3), centroid - Vec3(0, 0, 0.3)};
  const SurfaceEmbedding emb = embed_in_surface(pts, host);
  REQUIRE(emb[0].tri == 0);
  REQUIRE(emb[0].offset == Catch::Approx(0.3).epsilon(1e-12));
  REQUIRE(emb[1].offset == Catch::Approx(-0.3).epsilon(1e-12));
  REQUIRE((emb[0].bary - Vec3(1.0 / 3, 1.0 / 3, 1.0 / 3)).norm() < 1e-12);

  // projections beyond the triangle stay unclamped
  const std::vector<Vec3> outside = {Vec3(3, 3, 0.1)};
  const SurfaceEmbedding eo = embed_in_surface(outside, host);
  REQUIRE(eo[0].bary.minCoeff() < 0.0);
  const auto rec = apply_embedding(eo, host.triangles, host.vertices);
  REQUIRE((rec[0] - outside[0]).norm() < 1e-12);
}

TEST_CASE("rest reconstruction is exact to solver precision over a block surface") {
  const TetMesh block = make_block(Vec3(1, 1, 0.5), {3, 3, 2});
  const SurfaceMesh host = extract_boundary_surface(block);

  std::mt19937 rng(211);
  std::uniform_real_distribution<Real> d(-0.2, 1.2);
  std::vector<Vec3> pts;
  for (int i = 0; i < 200; ++i) pts.push_back(Vec3(d(rng), d(rng), 0.5 * d(rng)));
  // include points exactly on the surface as well
  for (int i = 0; i < 8; ++i) pts.push_back(host.vertices[i % host.vertices.size()]);

  const SurfaceEmbedding emb = embed_in_surface(pts, host);
  const auto rec = apply_embedding(emb, host.triangles, host.vertices);
  const Real diag = mesh_aabb(block).diagonal();
  for (size_t i = 0; i < pts.size(); ++i)
    REQUIRE((rec[i] - pts[i]).norm() <= 1e-12 * diag);
}

TEST_CASE("equidistant triangles resolve to the lowest index, tree or not") {
  SurfaceMesh host;
  host.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, 1, 0), Vec3(0.5, -1, 0)};
  host.triangles = {{0, 1, 2}, {0, 3, 1}};
  const std::vector<Vec3> pts = {Vec3(0.5, 0, 0.25)};
  const SurfaceEmbedding with_tree = embed_in_surface(pts, host, true);
  const SurfaceEmbedding brute = embed_in_surface(pts, host, false);
  REQUIRE(with_tree[0].tri == 0);
  REQUIRE(brute[0].tri == 0);
}

TEST_CASE("tree and brute-force binding agree everywhere") {
  const TetMesh block = make_block(Vec3(1, 1, 0.5), {4, 4, 2});
  const SurfaceMesh host = extract_boundary_surface(block);
  std::mt19937 rng(223);
  std::uniform_real_distribution<Real> d(-0.5, 1.5);
  std::vector<Vec3> pts;
  for (int i = 0; i < 300; ++i) pts.push_back(Vec3(d(rng), d(rng), d(rng)));
  const SurfaceEmbedding a = embed_in_surface(pts, host, true);
  const SurfaceEmbedding b = embed_in_surface(pts, host, false);
  for (size_t i = 0; i < pts.size(); ++i) {
    REQUIRE(a[i].tri == b[i].tri);
    REQUIRE(a[i].bary == b[i].bary);
    REQUIRE(a[i].offset == b[i].offset);
  }
}

TEST_CASE("rigid host motion carries embedded points along rigidly") {
  const TetMesh block = make_block(Vec3(1, 1, 0.5), {3, 3, 2});
  const SurfaceMesh host = extract_boundary_surface(block);
  std::mt19937 rng(227);
  std::uniform_real_distribution<Real> d(-0.1, 1.1);
  std::vector<Vec3> pts;
  for (int i = 0; i < 100; ++i) pts.push_back(Vec3(d(rng), d(rng), 0.5 * d(rng)));
  const SurfaceEmbedding emb = embed_in_surface(pts, host);

  for (int trial = 0; trial < 5; ++trial) {
    const Mat3 R = random_rotation(rng);
    const Vec3 t(d(rng), d(rng), d(rng));
    std::vector<Vec3> moved(host.vertices.size());
    for (size_t v = 0; v < host.vertices.size(); ++v) moved[v] = R * host.vertices[v] + t;
    const auto rec = apply_embedding(emb, host.triangles, moved);
    for (size_t i = 0; i < pts.size(); ++i)
      REQUIRE((rec[i] - (R * pts[i] + t)).norm() <= 1e-10);
  }
}

TEST_CASE("surface-bound points follow affine host deformations exactly") {
  const SurfaceMesh host = flat_grid(4);
  std::mt19937 rng(229);
  std::uniform_real_distribution<Real> d(0.05, 0.95);
  std::uniform_real_distribution<Real> c(-0.3, 0.3);

  std::vector<Vec3> pts;
  for (int i = 0; i < 60; ++i) pts.push_back(Vec3(d(rng), d(rng), 0));  // on the surface
  const SurfaceEmbedding emb = embed_in_surface(pts, host);

  Mat3 A;
  A << 1 + c(rng), c(rng), c(rng), c(rng), 1 + c(rng), c(rng), c(rng), c(rng), 1 + c(rng);
  const Vec3 t(0.4, -0.2, 0.7);
  std::vector<Vec3> moved(host.vertices.size());
  for (size_t v = 0; v < host.vertices.size(); ++v) moved[v] = A * host.vertices[v] + t;
  const auto rec = apply_embedding(emb, host.triangles, moved);
  for (size_t i = 0; i < pts.size(); ++i)
    REQUIRE((rec[i] - (A * pts[i] + t)).norm() <= 1e-12);
}

TEST_CASE("reconstruction error shrinks at least threefold per host refinement") {
  const Real a = 0.1;
  auto bend = [&](const Vec3& p) {
    return Vec3(p.x(), p.y(), a * std::sin(M_PI * p.x()) * std::sin(M_PI * p.y()));
  };
  auto true_normal = [&](Real x, Real y) {
    const Real sx = a * M_PI * std::cos(M_PI * x) * std::sin(M_PI * y);
    const Real sy = a * M_PI * std::sin(M_PI * x) * std::cos(M_PI * y);
    return Vec3(-sx, -sy, 1).normalized();
  };

  std::mt19937 rng(233);
  std::uniform_real_distribution<Real> d(0.2, 0.8);
  std::uniform_real_distribution<Real> od(5e-4, 2e-3);
  std::vector<Vec3> queries;
  std::vector<Real> q_offsets;
  for (int i = 0; i < 150; ++i) {
    const Real x = d(rng), y = d(rng), delta = od(rng);
    queries.push_back(Vec3(x, y, delta));  // flat rest surface: offset along +z
    q_offsets.push_back(delta);
  }

  auto max_error = [&](int n) {
    const SurfaceMesh host = flat_grid(n);
    const SurfaceEmbedding emb = embed_in_surface(queries, host);
    std::vector<Vec3> deformed(host.vertices.size());
    for (size_t v = 0; v < host.vertices.size(); ++v) deformed[v] = bend(host.vertices[v]);
    const auto rec = apply_embedding(emb, host.triangles, deformed);
    Real err = 0;
    for (size_t i = 0; i < queries.size(); ++i) {
      const Real x = queries[i].x(), y = queries[i].y();
      const Vec3 exact = bend(Vec3(x, y, 0)) + q_offsets[i] * true_normal(x, y);
      err = std::max(err, (rec[i] - exact).norm());
    }
    return err;
  };

  const Real coarse = max_error(8);
  const Real fine = max_error(16);
  REQUIRE(coarse > 0.0);
  REQUIRE(coarse / fine >= 3.0);
}

TEST_CASE("degenerate host triangles are reported by index") {
  SurfaceMesh host;
  host.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(2, 0, 0)};
  host.triangles = {{0, 1, 2}, {0, 1, 3}};  // second triangle collinear
  try {
    embed_in_surface({Vec3(0.1, 0.1, 0.1)}, host);
    FAIL("expected a degenerate-triangle error");
  } catch (const MeshError& e) {
    REQUIRE(std::string(e.what()).find("triangle 1") != std::string::npos);
  }

  SurfaceMesh empty;
  REQUIRE_THROWS_AS(embed_in_surface({Vec3(0, 0, 0)}, empty), ConfigError);
}

TEST_CASE("a host triangle collapsing during deformation is reported by index") {
  const SurfaceMesh host = single_triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
  const SurfaceEmbedding emb = embed_in_surface({Vec3(0.2, 0.2, 0.5)}, host);
  const std::vector<Vec3> collapsed = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)};
  try {
    apply_embedding(emb, host.triangles, collapsed);
    FAIL("expected a degenerate-triangle error");
  } catch (const MeshError& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find("triangle 0") != std::string::npos);
    REQUIRE(msg.find("deformed") != std::string::npos);
  }
}

TEST_CASE("embedding replay round trips through mesh files") {
  namespace fs = std::filesystem;
  const fs::path dir = temp_dir();

  // host: the boundary of a small block; visual: points floating above it
  const TetMesh block = make_block(Vec3(1, 1, 0.5), {2, 2, 1});
  const SurfaceMesh host = extract_boundary_surface(block);
  save_surface_obj(host, (dir / "rest.obj").string());

  SurfaceMesh visual;
  visual.vertices = {Vec3(0.3, 0.3, 0.55), Vec3(0.7, 0.3, 0.52), Vec3(0.5, 0.7, 0.6)};
  visual.triangles = {{0, 1, 2}};
  save_surface_obj(visual, (dir / "visual.obj").string());

  // frame 0: the rest pose itself; frame 1: a pure translation
  save_surface_obj(host, (dir / "frame_rest.obj").string());
  SurfaceMesh shifted = host;
  for (auto& v : shifted.vertices) v += Vec3(0.25, -0.5, 1.0);
  save_surface_obj(shifted, (dir / "frame_shift.obj").string());

  const EmbedResult res =
      run_embed((dir / "rest.obj").string(), (dir / "visual.obj").string(),
                {(dir / "frame_rest.obj").string(), (dir / "frame_shift.obj").string()},
                (dir / "out").string());
  REQUIRE(res.visual_vertices == 3);
  REQUIRE(res.host_triangles == host.triangles.size());
  REQUIRE(res.rest_error <= 1e-12);
  REQUIRE(res.outputs.size() == 2);

  const SurfaceMesh rebuilt = load_surface_obj(res.outputs[0]);
  REQUIRE(rebuilt.vertices.size() == 3);
  for (int i = 0; i < 3; ++i)
    REQUIRE((rebuilt.vertices[i] - visual.vertices[i]).norm() <= 1e-12);
  REQUIRE(rebuilt.triangles == visual.triangles);

  const SurfaceMesh moved = load_surface_obj(res.outputs[1]);
  for (int i = 0; i < 3; ++i)
    REQUIRE((moved.vertices[i] - (visual.vertices[i] + Vec3(0.25, -0.5, 1.0))).norm() <=
            1e-12);

  // frames must share the rest surface's topology
  SurfaceMesh retopo = host;
  std::swap(retopo.triangles[0][0], retopo.triangles[0][1]);
  save_surface_obj(retopo, (dir / "frame_bad.obj").string());
  REQUIRE_THROWS_AS(run_embed((dir / "rest.obj").string(), (dir / "visual.obj").string(),
                              {(dir / "frame_bad.obj").string()}, (dir / "out").string()),
                    ConfigError);
}
