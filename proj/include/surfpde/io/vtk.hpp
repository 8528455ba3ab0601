#pragma once

#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "surfpde/errors.hpp"
#include "surfpde/io/format.hpp"
#include "surfpde/surface_mesh.hpp"
#include "surfpde/vec3.hpp"

namespace surfpde {

/// One named per-vertex scalar field for VTK output.
struct NamedField {
  std::string name;
  std::span<const double> values;
};

/// Writes a legacy-VTK ASCII POLYDATA file: POINTS as float64, triangle
/// POLYGONS, then one SCALARS block per field in declaration order. Output
/// bytes are a deterministic function of the input.
inline void write_vtk_frame(const std::string& path, std::span<const Vec3> vertices,
                            std::span<const Tri> triangles,
                            std::span<const NamedField> fields = {}) {
  for (const NamedField& f : fields) {
    if (f.values.size() != vertices.size())
      throw ValidationError("vtk write: field '" + f.name + "' has " +
                            std::to_string(f.values.size()) + " values for " +
                            std::to_string(vertices.size()) + " vertices");
    if (f.name.empty() || f.name.find(' ') != std::string::npos)
      throw ValidationError("vtk write: field name '" + f.name +
                            "' must be non-empty and contain no spaces");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open file for writing");
  out << "# vtk DataFile Version 3.0\n";
  out << "surface frame\n";
  out << "ASCII\n";
  out << "DATASET POLYDATA\n";
  out << "POINTS " << vertices.size() << " double\n";
  for (const Vec3& v : vertices)
    out << format_double(v.x) << ' ' << format_double(v.y) << ' ' << format_double(v.z) << '\n';
  out << "POLYGONS " << triangles.size() << ' ' << triangles.size() * 4 << '\n';
  for (const Tri& t : triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  if (!fields.empty()) {
    out << "POINT_DATA " << vertices.size() << '\n';
    for (const NamedField& f : fields) {
      out << "SCALARS " << f.name << " double 1\n";
      out << "LOOKUP_TABLE default\n";
      for (double v : f.values) out << format_double(v) << '\n';
    }
  }
  if (!out) throw IoError(path + ": write failed");
}

inline void write_vtk_frame(const std::string& path, const SurfaceMesh& mesh,
                            std::span<const NamedField> fields = {}) {
  write_vtk_frame(path, mesh.vertices, mesh.triangles, fields);
}

} // namespace surfpde
