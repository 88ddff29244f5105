// Text mesh formats: node/ele tetrahedral meshes and OBJ triangle surfaces.
#pragma once

#include "gmcp/tet_mesh.hpp"

#include <fstream>
#include <sstream>

namespace gmcp {

namespace io_detail {

// Returns the next line that contains data, stripping '#' comments.
inline bool next_data_line(std::istream& in, std::string& line, long& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
  }
  return false;
}

[[noreturn]] inline void fail(const std::string& path, long lineno, const std::string& what) {
  throw ParseError(path + ":" + std::to_string(lineno) + ": " + what);
}

}  // namespace io_detail

// node format: "<N> <dim> <attrs> <markers>" header, then one "<idx> x y z"
// line per vertex. Indices may start at 0 or 1; the first vertex line decides.
inline TetMesh load_tet_mesh(const std::string& node_path, const std::string& ele_path) {
  using io_detail::fail;
  using io_detail::next_data_line;

  TetMesh m;
  long base = -1;
  {
    std::ifstream in(node_path);
    if (!in) throw ParseError(node_path + ": cannot open");
    std::string line;
    long lineno = 0;
    if (!next_data_line(in, line, lineno)) fail(node_path, lineno, "missing header");
    long n = 0;
    int dim = 0;
    {
      std::istringstream ss(line);
      if (!(ss >> n >> dim)) fail(node_path, lineno, "malformed header");
      if (dim != 3) fail(node_path, lineno, "expected dimension 3");
      if (n < 0) fail(node_path, lineno, "negative vertex count");
    }
    m.vertices.reserve(n);
    for (long i = 0; i < n; ++i) {
      if (!next_data_line(in, line, lineno)) fail(node_path, lineno, "unexpected end of file");
      std::istringstream ss(line);
      long idx;
      Real x, y, z;
      if (!(ss >> idx >> x >> y >> z)) fail(node_path, lineno, "malformed vertex line");
      if (i == 0) {
        if (idx != 0 && idx != 1)
          fail(node_path, lineno, "first vertex index must be 0 or 1");
        base = idx;
      }
      if (idx != base + i) fail(node_path, lineno, "non-consecutive vertex index");
      m.vertices.emplace_back(x, y, z);
    }
  }
  {
    std::ifstream in(ele_path);
    if (!in) throw ParseError(ele_path + ": cannot open");
    std::string line;
    long lineno = 0;
    if (!next_data_line(in, line, lineno)) fail(ele_path, lineno, "missing header");
    long n = 0;
    int npt = 0;
    {
      std::istringstream ss(line);
      if (!(ss >> n >> npt)) fail(ele_path, lineno, "malformed header");
      if (npt != 4) fail(ele_path, lineno, "expected 4 nodes per tet");
      if (n < 0) fail(ele_path, lineno, "negative tet count");
    }
    const long nv = static_cast<long>(m.vertices.size());
    m.tets.reserve(n);
    for (long i = 0; i < n; ++i) {
      if (!next_data_line(in, line, lineno)) fail(ele_path, lineno, "unexpected end of file");
      std::istringstream ss(line);
      long idx;
      std::array<long, 4> v;
      if (!(ss >> idx >> v[0] >> v[1] >> v[2] >> v[3]))
        fail(ele_path, lineno, "malformed tet line");
      std::array<int, 4> tet;
      for (int k = 0; k < 4; ++k) {
        const long ref = v[k] - base;
        if (ref < 0 || ref >= nv)
          fail(ele_path, lineno,
               "element " + std::to_string(i) + ": vertex reference out of range: " +
                   std::to_string(v[k]));
        tet[k] = static_cast<int>(ref);
      }
      m.tets.push_back(tet);
    }
  }
  orient_tets_positive(m);  // repairs inverted tets silently
  return m;
}

inline void save_tet_mesh(const TetMesh& m, const std::string& node_path,
                          const std::string& ele_path) {
  std::ofstream node(node_path);
  if (!node) throw ParseError(node_path + ": cannot open for writing");
  node << m.vertices.size() << " 3 0 0\n";
  for (size_t i = 0; i < m.vertices.size(); ++i)
    node << (i + 1) << " " << format_real(m.vertices[i].x()) << " "
         << format_real(m.vertices[i].y()) << " " << format_real(m.vertices[i].z()) << "\n";

  std::ofstream ele(ele_path);
  if (!ele) throw ParseError(ele_path + ": cannot open for writing");
  ele << m.tets.size() << " 4 0\n";
  for (size_t t = 0; t < m.tets.size(); ++t)
    ele << (t + 1) << " " << m.tets[t][0] + 1 << " " << m.tets[t][1] + 1 << " "
        << m.tets[t][2] + 1 << " " << m.tets[t][3] + 1 << "\n";
}

// Minimal OBJ subset: 'v' and triangular 'f' records, 1-based indices,
// vertex order preserved. Other record types are ignored.
inline SurfaceMesh load_surface_obj(const std::string& path) {
  using io_detail::fail;
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  SurfaceMesh s;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Real x, y, z;
      if (!(ss >> x >> y >> z)) fail(path, lineno, "malformed vertex");
      s.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::array<int, 3> tri;
      std::string tok;
      int count = 0;
      while (ss >> tok) {
        if (count >= 3) fail(path, lineno, "only triangular faces are supported");
        // accept v, v/t, v/t/n, v//n references
        const long v = std::stol(tok.substr(0, tok.find('/')));
        const long idx = v > 0 ? v - 1 : static_cast<long>(s.vertices.size()) + v;
        if (idx < 0 || idx >= static_cast<long>(s.vertices.size()))
          fail(path, lineno, "face references undefined vertex");
        tri[count++] = static_cast<int>(idx);
      }
      if (count != 3) fail(path, lineno, "only triangular faces are supported");
      s.triangles.push_back(tri);
    }
  }
  s.vertex_map.resize(s.vertices.size());
  for (size_t i = 0; i < s.vertices.size(); ++i) s.vertex_map[i] = static_cast<int>(i);
  build_surface_edges(s);
  return s;
}

inline void save_surface_obj(const SurfaceMesh& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  for (const auto& v : s.vertices)
    out << "v " << format_real(v.x()) << " " << format_real(v.y()) << " "
        << format_real(v.z()) << "\n";
  for (const auto& t : s.triangles)
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

}  // namespace gmcp
