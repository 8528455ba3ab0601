#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "surfpde/element_geometry.hpp"
#include "surfpde/errors.hpp"
#include "surfpde/sparse.hpp"
#include "surfpde/surface_mesh.hpp"
#include "surfpde/vec3.hpp"

namespace surfpde {

/// Symbolic structure shared by every matrix assembled on one connectivity:
/// the vertex-adjacency CSR skeleton plus, for each triangle, the nine value
/// slots its 3x3 element matrix scatters into. Building it once lets
/// per-frame assemblies run without index searches.
class FemPattern {
public:
  static FemPattern build(int vertex_count, std::span<const Tri> triangles) {
    FemPattern p;
    std::vector<std::vector<int>> cols(vertex_count);
    for (const Tri& t : triangles)
      for (int a : t) {
        if (a < 0 || a >= vertex_count)
          throw ValidationError("fem pattern: vertex index out of range");
        for (int b : t) cols[a].push_back(b);
      }
    for (int i = 0; i < vertex_count; ++i) cols[i].push_back(i);
    p.skeleton_ = SparseMatrix::from_pattern(vertex_count, vertex_count, std::move(cols));
    p.scatter_.resize(triangles.size());
    for (std::size_t t = 0; t < triangles.size(); ++t)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          p.scatter_[t][i * 3 + j] = p.skeleton_.require(triangles[t][i], triangles[t][j]);
    return p;
  }

  static FemPattern build(const SurfaceMesh& mesh) {
    return build(static_cast<int>(mesh.vertices.size()), mesh.triangles);
  }

  int vertex_count() const { return skeleton_.rows(); }
  std::size_t triangle_count() const { return scatter_.size(); }

  /// Fresh matrix with this pattern and all-zero values.
  SparseMatrix make_matrix() const { return skeleton_; }

  /// Value-array index for local entry (i, j) of triangle t.
  int slot(std::size_t t, int i, int j) const { return scatter_[t][i * 3 + j]; }

  const SparseMatrix& skeleton() const { return skeleton_; }

private:
  SparseMatrix skeleton_; // values kept at zero
  std::vector<std::array<int, 9>> scatter_;
};

/// Accumulates scale * (mass matrix) into `out`. Element entries are
/// area/12 * (1 + delta_ij), the exact integrals of products of linear
/// barycentric basis functions.
inline void add_scaled_mass(const FemPattern& pattern, const ElementGeometry& geom,
                            double scale, SparseMatrix& out) {
  auto& vals = out.values();
  for (std::size_t t = 0; t < pattern.triangle_count(); ++t) {
    const double a12 = scale * geom.areas[t] / 12.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) vals[pattern.slot(t, i, j)] += (i == j ? 2.0 : 1.0) * a12;
  }
}

/// Accumulates scale * (stiffness matrix): entries area * (grad_i . grad_j)
/// with the constant per-element surface gradients of the linear basis.
inline void add_scaled_stiffness(const FemPattern& pattern, const ElementGeometry& geom,
                                 double scale, SparseMatrix& out) {
  auto& vals = out.values();
  for (std::size_t t = 0; t < pattern.triangle_count(); ++t) {
    const double a = scale * geom.areas[t];
    const auto& g = geom.basis_gradients[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) vals[pattern.slot(t, i, j)] += a * dot(g[i], g[j]);
  }
}

namespace detail {

/// Edge-midpoint quadrature on a triangle: three points at the edge
/// midpoints, each with weight area/3; exact for quadratic integrands.
/// Midpoint e sits on the edge between local vertices e and (e+1)%3, so
/// a linear nodal field f has value (f_e + f_{e+1})/2 there and the basis
/// function of local vertex k equals 0.5 when k is an endpoint, else 0.
inline constexpr int kEdgeA[3] = {0, 1, 2};
inline constexpr int kEdgeB[3] = {1, 2, 0};

} // namespace detail

/// Accumulates scale * (advection matrix) for the tangential transport term:
/// entry (j, k) integrates basis_k * (velocity - normal part) . grad_j per
/// triangle. The velocity field is nodal and interpolated linearly; its
/// normal component along the per-element normal is removed pointwise at
/// each quadrature point, so the advecting field is exactly tangential.
inline void add_scaled_advection(const FemPattern& pattern, const ElementGeometry& geom,
                                 std::span<const Tri> triangles,
                                 std::span<const Vec3> velocity, double scale,
                                 SparseMatrix& out) {
  if (velocity.size() != static_cast<std::size_t>(pattern.vertex_count()))
    throw ValidationError("advection assembly: velocity field size mismatch");
  auto& vals = out.values();
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const Tri& tri = triangles[t];
    const Vec3 nu = geom.normals[t];
    const double w_quad = scale * geom.areas[t] / 3.0;
    const auto& g = geom.basis_gradients[t];
    for (int e = 0; e < 3; ++e) {
      const int la = detail::kEdgeA[e], lb = detail::kEdgeB[e];
      Vec3 wq = 0.5 * (velocity[tri[la]] + velocity[tri[lb]]);
      Vec3 tangential = wq - dot(wq, nu) * nu;
      for (int j = 0; j < 3; ++j) {
        const double flux_j = w_quad * dot(tangential, g[j]);
        // basis_k at this midpoint is 1/2 for the two edge endpoints.
        vals[pattern.slot(t, j, la)] += 0.5 * flux_j;
        vals[pattern.slot(t, j, lb)] += 0.5 * flux_j;
      }
    }
  }
}

/// Accumulates coefficient * (streamline stabilization matrix): entry (j, k)
/// integrates (velocity . grad_k)(velocity . grad_j). Only the tangential
/// part of the velocity contributes since the basis gradients are tangent
/// to each element.
inline void add_scaled_streamline(const FemPattern& pattern, const ElementGeometry& geom,
                                  std::span<const Tri> triangles,
                                  std::span<const Vec3> velocity, double coefficient,
                                  SparseMatrix& out) {
  if (velocity.size() != static_cast<std::size_t>(pattern.vertex_count()))
    throw ValidationError("streamline assembly: velocity field size mismatch");
  auto& vals = out.values();
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const Tri& tri = triangles[t];
    const double w_quad = coefficient * geom.areas[t] / 3.0;
    const auto& g = geom.basis_gradients[t];
    for (int e = 0; e < 3; ++e) {
      const int la = detail::kEdgeA[e], lb = detail::kEdgeB[e];
      Vec3 wq = 0.5 * (velocity[tri[la]] + velocity[tri[lb]]);
      double wg[3];
      for (int j = 0; j < 3; ++j) wg[j] = dot(wq, g[j]);
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          vals[pattern.slot(t, j, k)] += w_quad * wg[j] * wg[k];
    }
  }
}

/// Fresh mass matrix for one frame.
inline SparseMatrix assemble_mass(const FemPattern& pattern, const ElementGeometry& geom) {
  SparseMatrix m = pattern.make_matrix();
  add_scaled_mass(pattern, geom, 1.0, m);
  return m;
}

/// Fresh stiffness matrix for one frame.
inline SparseMatrix assemble_stiffness(const FemPattern& pattern, const ElementGeometry& geom) {
  SparseMatrix s = pattern.make_matrix();
  add_scaled_stiffness(pattern, geom, 1.0, s);
  return s;
}

/// Row sums of the mass matrix: the integral of each basis function, i.e.
/// one third of the area incident to each vertex.
inline std::vector<double> lumped_mass(int vertex_count, std::span<const Tri> triangles,
                                       const ElementGeometry& geom) {
  std::vector<double> lump(vertex_count, 0.0);
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const double third = geom.areas[t] / 3.0;
    for (int v : triangles[t]) lump[v] += third;
  }
  return lump;
}

/// Integral of the piecewise-linear nodal field over the surface.
inline double integrate(std::span<const Tri> triangles, const ElementGeometry& geom,
                        std::span<const double> nodal) {
  double total = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const Tri& tri = triangles[t];
    total += geom.areas[t] * (nodal[tri[0]] + nodal[tri[1]] + nodal[tri[2]]) / 3.0;
  }
  return total;
}

/// Dirichlet energy of a nodal field: the integral of the squared surface
/// gradient, equal to u^T S u for the stiffness matrix S.
inline double dirichlet_energy(std::span<const Tri> triangles, const ElementGeometry& geom,
                               std::span<const double> nodal) {
  double total = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const Tri& tri = triangles[t];
    const auto& g = geom.basis_gradients[t];
    Vec3 grad = nodal[tri[0]] * g[0] + nodal[tri[1]] * g[1] + nodal[tri[2]] * g[2];
    total += geom.areas[t] * grad.squared_norm();
  }
  return total;
}

} // namespace surfpde
