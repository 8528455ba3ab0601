#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "surfpde/errors.hpp"
#include "surfpde/parallel.hpp"
#include "surfpde/surface_mesh.hpp"
#include "surfpde/vec3.hpp"

namespace surfpde {

/// Per-triangle geometry of one frame: piecewise constant unit normal,
/// area, and the (tangential) gradients of the three P1 nodal basis
/// functions restricted to the triangle.
struct ElementGeometry {
  std::vector<Vec3> normals;
  std::vector<double> areas;
  std::vector<std::array<Vec3, 3>> basis_gradients;

  std::size_t size() const { return areas.size(); }
};

/// Computes per-element geometry. On a flat triangle the surface gradient of
/// the P1 basis at vertex i is (normal x opposite_edge) / (2 area), which is
/// in-plane and satisfies grad_0 + grad_1 + grad_2 = 0.
/// Throws ValidationError naming the first degenerate triangle.
inline ElementGeometry element_geometry(std::span<const Vec3> verts, std::span<const Tri> tris) {
  ElementGeometry geom;
  const std::size_t n = tris.size();
  geom.normals.resize(n);
  geom.areas.resize(n);
  geom.basis_gradients.resize(n);

  const double diag = bounding_box_diagonal(verts);
  const double area_tol = kDegenerateAreaTol * diag * diag;

  std::vector<int> degenerate(n, 0);
  parallel_for(n, [&](std::size_t t) {
    const Tri& tri = tris[t];
    const Vec3& p0 = verts[tri[0]];
    const Vec3& p1 = verts[tri[1]];
    const Vec3& p2 = verts[tri[2]];
    Vec3 cr = cross(p1 - p0, p2 - p0);
    double two_area = cr.norm();
    double area = 0.5 * two_area;
    if (!(area > area_tol)) {
      degenerate[t] = 1;
      return;
    }
    Vec3 nu = cr / two_area;
    geom.normals[t] = nu;
    geom.areas[t] = area;
    // Edge opposite vertex i, traversed in triangle orientation.
    const Vec3 e0 = p2 - p1;
    const Vec3 e1 = p0 - p2;
    const Vec3 e2 = p1 - p0;
    geom.basis_gradients[t] = {cross(nu, e0) / two_area, cross(nu, e1) / two_area,
                               cross(nu, e2) / two_area};
  });

  for (std::size_t t = 0; t < n; ++t) {
    if (degenerate[t]) {
      throw ValidationError("degenerate triangle " + std::to_string(t) +
                            ": area below tolerance");
    }
  }
  return geom;
}

inline ElementGeometry element_geometry(const SurfaceMesh& mesh) {
  return element_geometry(mesh.vertices, mesh.triangles);
}

/// Barycenter of triangle t.
inline Vec3 triangle_barycenter(std::span<const Vec3> verts, const Tri& t) {
  return (verts[t[0]] + verts[t[1]] + verts[t[2]]) / 3.0;
}

} // namespace surfpde
