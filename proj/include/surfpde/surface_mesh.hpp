#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "surfpde/errors.hpp"
#include "surfpde/vec3.hpp"

namespace surfpde {

/// Vertex-index triple of one triangle, consistently oriented.
using Tri = std::array<int, 3>;

/// One triangulated closed surface frame. Coordinates are in mesh length
/// units (micrometres by convention, see the manifest unit_scale field);
/// frame_time is in seconds. Treated as immutable once built.
struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<Tri> triangles;
  double frame_time = 0.0;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t triangle_count() const { return triangles.size(); }
};

/// Relative tolerance used to flag degenerate triangles:
/// area <= kDegenerateAreaTol * (bounding-box diagonal)^2.
inline constexpr double kDegenerateAreaTol = 1e-12;

/// Diagonal of the axis-aligned bounding box; the length scale used for
/// degeneracy tolerances so they are unit-independent.
inline double bounding_box_diagonal(std::span<const Vec3> vertices) {
  if (vertices.empty()) return 0.0;
  Vec3 lo = vertices[0], hi = vertices[0];
  for (const Vec3& v : vertices) {
    lo.x = std::min(lo.x, v.x);
    lo.y = std::min(lo.y, v.y);
    lo.z = std::min(lo.z, v.z);
    hi.x = std::max(hi.x, v.x);
    hi.y = std::max(hi.y, v.y);
    hi.z = std::max(hi.z, v.z);
  }
  return (hi - lo).norm();
}

inline Vec3 vertex_centroid(std::span<const Vec3> vertices) {
  Vec3 c{};
  for (const Vec3& v : vertices) c += v;
  return vertices.empty() ? c : c / static_cast<double>(vertices.size());
}

/// Radius of the bounding sphere centred at the vertex centroid. Used as the
/// "radius of the cell" when deriving default ROI sizes.
inline double bounding_sphere_radius(std::span<const Vec3> vertices) {
  Vec3 c = vertex_centroid(vertices);
  double r2 = 0.0;
  for (const Vec3& v : vertices) r2 = std::max(r2, (v - c).squared_norm());
  return std::sqrt(r2);
}

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * cross(b - a, c - a).norm();
}

/// Longest edge of the triangle (a, b, c).
inline double triangle_diameter(const Vec3& a, const Vec3& b, const Vec3& c) {
  return std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
}

/// Longest edge of triangle t.
inline double triangle_diameter(std::span<const Vec3> verts, const Tri& t) {
  return triangle_diameter(verts[t[0]], verts[t[1]], verts[t[2]]);
}

/// Mesh size h: the diameter (longest edge) of the largest triangle.
inline double max_element_diameter(std::span<const Vec3> verts, std::span<const Tri> tris) {
  double h = 0.0;
  for (const Tri& t : tris) h = std::max(h, triangle_diameter(verts, t));
  return h;
}

inline double max_element_diameter(const SurfaceMesh& mesh) {
  return max_element_diameter(mesh.vertices, mesh.triangles);
}

inline double total_area(std::span<const Vec3> verts, std::span<const Tri> tris) {
  double a = 0.0;
  for (const Tri& t : tris) a += triangle_area(verts[t[0]], verts[t[1]], verts[t[2]]);
  return a;
}

inline double total_area(const SurfaceMesh& mesh) {
  return total_area(mesh.vertices, mesh.triangles);
}

/// Signed enclosed volume (positive for consistently outward orientation).
inline double signed_volume(std::span<const Vec3> verts, std::span<const Tri> tris) {
  double v = 0.0;
  for (const Tri& t : tris) {
    const Vec3& a = verts[t[0]];
    const Vec3& b = verts[t[1]];
    const Vec3& c = verts[t[2]];
    v += a.dot(cross(b, c));
  }
  return v / 6.0;
}

/// Structural diagnosis of one surface frame.
struct ValidationReport {
  std::size_t vertex_count = 0;
  std::size_t edge_count = 0;
  std::size_t triangle_count = 0;
  long long euler_characteristic = 0;
  std::size_t boundary_edges = 0;       // undirected edges with exactly one incident triangle
  std::size_t non_manifold_edges = 0;   // undirected edges with more than two
  std::size_t orientation_conflicts = 0; // shared edges traversed twice in the same direction
  std::size_t out_of_range_indices = 0;
  std::vector<int> degenerate_triangles;
  double signed_volume = 0.0;
  bool accepted = false;
  std::string first_violation; // empty when accepted

  std::string summary() const {
    std::ostringstream os;
    os << "V=" << vertex_count << " E=" << edge_count << " F=" << triangle_count
       << " chi=" << euler_characteristic;
    if (accepted) {
      os << " (accepted)";
    } else {
      os << " (rejected: " << first_violation << ")";
    }
    return os.str();
  }
};

/// Checks the closed-surface invariants: every edge shared by exactly two
/// triangles with opposite traversal, Euler characteristic 2 (genus zero),
/// and no degenerate triangles. Accepts iff all hold.
inline ValidationReport validate_mesh(const SurfaceMesh& mesh) {
  ValidationReport rep;
  rep.vertex_count = mesh.vertices.size();
  rep.triangle_count = mesh.triangles.size();

  auto violate = [&rep](const std::string& what) {
    if (rep.first_violation.empty()) rep.first_violation = what;
  };

  const auto nv = static_cast<long long>(mesh.vertices.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int idx = mesh.triangles[t][k];
      if (idx < 0 || idx >= nv) ++rep.out_of_range_indices;
    }
  }
  if (rep.out_of_range_indices > 0) {
    violate("vertex index out of range");
    return rep;
  }

  // Undirected edge bookkeeping: total incidence and how often the edge is
  // traversed in its (min,max) direction. A consistently oriented interior
  // edge is seen exactly twice, once per direction.
  struct EdgeUse {
    std::uint8_t count = 0;
    std::uint8_t forward = 0;
  };
  std::unordered_map<std::uint64_t, EdgeUse> edges;
  edges.reserve(mesh.triangles.size() * 2);
  for (const Tri& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = t[k];
      int b = t[(k + 1) % 3];
      if (a == b) {
        // repeated vertex, counts as degenerate below; skip the edge
        continue;
      }
      std::uint64_t lo = static_cast<std::uint64_t>(std::min(a, b));
      std::uint64_t hi = static_cast<std::uint64_t>(std::max(a, b));
      EdgeUse& use = edges[(lo << 32) | hi];
      if (use.count < 255) ++use.count;
      if (a < b && use.forward < 255) ++use.forward;
    }
  }
  rep.edge_count = edges.size();
  for (const auto& [key, use] : edges) {
    (void)key;
    if (use.count == 1) {
      ++rep.boundary_edges;
    } else if (use.count > 2) {
      ++rep.non_manifold_edges;
    } else if (use.forward != 1) {
      ++rep.orientation_conflicts;
    }
  }

  rep.euler_characteristic = nv - static_cast<long long>(rep.edge_count) +
                             static_cast<long long>(mesh.triangles.size());

  const double diag = bounding_box_diagonal(mesh.vertices);
  const double area_tol = kDegenerateAreaTol * diag * diag;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Tri& tri = mesh.triangles[t];
    bool repeated = tri[0] == tri[1] || tri[1] == tri[2] || tri[2] == tri[0];
    double area =
        triangle_area(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    if (repeated || area <= area_tol) rep.degenerate_triangles.push_back(static_cast<int>(t));
  }

  rep.signed_volume = signed_volume(mesh.vertices, mesh.triangles);

  if (rep.boundary_edges > 0) violate("open surface: boundary edges present");
  if (rep.non_manifold_edges > 0) violate("non-manifold edges present");
  if (rep.orientation_conflicts > 0) violate("inconsistent triangle orientation");
  if (!rep.degenerate_triangles.empty()) violate("degenerate triangles present");
  if (rep.euler_characteristic != 2) violate("Euler characteristic != 2 (not genus zero)");

  rep.accepted = rep.first_violation.empty();
  return rep;
}

/// validate_mesh that throws a ValidationError when the mesh is rejected.
inline ValidationReport require_valid_mesh(const SurfaceMesh& mesh,
                                           const std::string& context = "mesh") {
  ValidationReport rep = validate_mesh(mesh);
  if (!rep.accepted) throw ValidationError(context + " rejected: " + rep.summary());
  return rep;
}

} // namespace surfpde
