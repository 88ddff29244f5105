// Run outputs: legacy-ASCII unstructured-grid files (loadable by common
// visualization tools), CSV tables, and key=value run reports. All floating
// point output round-trips through format_real.
#pragma once

#include "gmcp/tet_mesh.hpp"

#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace gmcp {

// Attached data array: components is 1 (scalar), 3 (vector) or 9 (tensor,
// row-major); data holds components * count values.
struct GridField {
  std::string name;
  int components = 1;
  std::vector<Real> data;
};

namespace vtk_detail {

inline void write_fields(std::ofstream& out, const std::vector<GridField>& fields, size_t count,
                         const std::string& path) {
  for (const auto& f : fields) {
    if (f.data.size() != count * static_cast<size_t>(f.components))
      throw ParseError(path + ": field '" + f.name + "' size mismatch");
    if (f.components == 1) {
      out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (size_t i = 0; i < count; ++i) out << format_real(f.data[i]) << "\n";
    } else if (f.components == 3) {
      out << "VECTORS " << f.name << " double\n";
      for (size_t i = 0; i < count; ++i)
        out << format_real(f.data[3 * i]) << " " << format_real(f.data[3 * i + 1]) << " "
            << format_real(f.data[3 * i + 2]) << "\n";
    } else if (f.components == 9) {
      out << "TENSORS " << f.name << " double\n";
      for (size_t i = 0; i < count; ++i) {
        for (int r = 0; r < 3; ++r)
          out << format_real(f.data[9 * i + 3 * r]) << " " << format_real(f.data[9 * i + 3 * r + 1])
              << " " << format_real(f.data[9 * i + 3 * r + 2]) << "\n";
        out << "\n";
      }
    } else {
      throw ParseError(path + ": field '" + f.name + "' has unsupported component count");
    }
  }
}

template <size_t N>
inline void write_grid(const std::string& path, const std::vector<Vec3>& points,
                       const std::vector<std::array<int, N>>& cells, int vtk_cell_type,
                       const std::vector<GridField>& point_fields,
                       const std::vector<GridField>& cell_fields) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << "# vtk DataFile Version 3.0\ngmcp output\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << points.size() << " double\n";
  for (const auto& p : points)
    out << format_real(p.x()) << " " << format_real(p.y()) << " " << format_real(p.z()) << "\n";
  out << "CELLS " << cells.size() << " " << cells.size() * (N + 1) << "\n";
  for (const auto& c : cells) {
    out << N;
    for (size_t k = 0; k < N; ++k) out << " " << c[k];
    out << "\n";
  }
  out << "CELL_TYPES " << cells.size() << "\n";
  for (size_t i = 0; i < cells.size(); ++i) out << vtk_cell_type << "\n";
  if (!point_fields.empty()) {
    out << "POINT_DATA " << points.size() << "\n";
    write_fields(out, point_fields, points.size(), path);
  }
  if (!cell_fields.empty()) {
    out << "CELL_DATA " << cells.size() << "\n";
    write_fields(out, cell_fields, cells.size(), path);
  }
  if (!out) throw ParseError(path + ": write failed");
}

}  // namespace vtk_detail

inline void save_vtk_tets(const std::string& path, const std::vector<Vec3>& points,
                          const std::vector<std::array<int, 4>>& tets,
                          const std::vector<GridField>& point_fields = {},
                          const std::vector<GridField>& cell_fields = {}) {
  vtk_detail::write_grid<4>(path, points, tets, 10, point_fields, cell_fields);
}

inline void save_vtk_tris(const std::string& path, const std::vector<Vec3>& points,
                          const std::vector<std::array<int, 3>>& tris,
                          const std::vector<GridField>& point_fields = {},
                          const std::vector<GridField>& cell_fields = {}) {
  vtk_detail::write_grid<3>(path, points, tris, 5, point_fields, cell_fields);
}

// Header row plus numeric rows, comma separated, full double precision.
inline void save_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<Real>>& rows) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw ParseError(path + ": row width does not match header");
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_real(row[i]);
    out << "\n";
  }
  if (!out) throw ParseError(path + ": write failed");
}

// Ordered key=value report. Insertion order is preserved so reruns of the
// same command produce byte-identical files.
struct Report {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(const std::string& key, const std::string& value) {
    for (auto& e : entries)
      if (e.first == key) {
        e.second = value;
        return;
      }
    entries.emplace_back(key, value);
  }
  void set(const std::string& key, Real value) { set(key, format_real(value)); }
  void set(const std::string& key, long value) { set(key, std::to_string(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }

  const std::string* find(const std::string& key) const {
    for (const auto& e : entries)
      if (e.first == key) return &e.second;
    return nullptr;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open for writing");
    for (const auto& e : entries) out << e.first << "=" << e.second << "\n";
    if (!out) throw ParseError(path + ": write failed");
  }
};

}  // namespace gmcp
