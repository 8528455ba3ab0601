#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "surfpde/element_geometry.hpp"
#include "surfpde/icosphere.hpp"
#include "surfpde/surface_mesh.hpp"

using namespace surfpde;

namespace {

SurfaceMesh tetrahedron() {
  SurfaceMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  // Outward-oriented faces of the unit corner tetrahedron.
  m.triangles = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
  return m;
}

} // namespace

TEST_CASE("triangle area and diameter") {
  Vec3 a{0, 0, 0}, b{1, 0, 0}, c{0, 1, 0};
  CHECK(triangle_area(a, b, c) == Catch::Approx(0.5));
  SurfaceMesh m;
  m.vertices = {a, b, c};
  m.triangles = {{0, 1, 2}};
  CHECK(max_element_diameter(m) == Catch::Approx(std::sqrt(2.0)));
  CHECK(total_area(m) == Catch::Approx(0.5));
}

TEST_CASE("tetrahedron invariants") {
  SurfaceMesh m = tetrahedron();
  ValidationReport rep = validate_mesh(m);
  CHECK(rep.accepted);
  CHECK(rep.euler_characteristic == 2);
  CHECK(rep.edge_count == 6);
  CHECK(rep.boundary_edges == 0);
  CHECK(rep.signed_volume == Catch::Approx(1.0 / 6.0));
  // Faces: three right triangles of area 1/2 plus the diagonal face.
  CHECK(total_area(m) == Catch::Approx(1.5 + std::sqrt(3.0) / 2.0));
}

TEST_CASE("validation rejects broken meshes") {
  SECTION("out of range index") {
    SurfaceMesh m = tetrahedron();
    m.triangles.push_back({0, 1, 9});
    ValidationReport rep = validate_mesh(m);
    CHECK_FALSE(rep.accepted);
    CHECK(rep.out_of_range_indices == 1);
  }
  SECTION("open surface") {
    SurfaceMesh m = tetrahedron();
    m.triangles.pop_back();
    ValidationReport rep = validate_mesh(m);
    CHECK_FALSE(rep.accepted);
    CHECK(rep.boundary_edges == 3);
  }
  SECTION("flipped triangle") {
    SurfaceMesh m = tetrahedron();
    std::swap(m.triangles[3][0], m.triangles[3][1]);
    ValidationReport rep = validate_mesh(m);
    CHECK_FALSE(rep.accepted);
    CHECK(rep.orientation_conflicts > 0);
  }
  SECTION("duplicated face is non-manifold") {
    SurfaceMesh m = tetrahedron();
    m.triangles.push_back(m.triangles.back());
    ValidationReport rep = validate_mesh(m);
    CHECK_FALSE(rep.accepted);
    CHECK(rep.non_manifold_edges == 3);
  }
  SECTION("degenerate triangle") {
    SurfaceMesh m = tetrahedron();
    m.triangles.push_back({1, 1, 2});
    ValidationReport rep = validate_mesh(m);
    CHECK_FALSE(rep.accepted);
    CHECK(rep.degenerate_triangles.size() == 1);
    CHECK(rep.degenerate_triangles[0] == 4);
  }
  SECTION("require_valid_mesh throws") {
    SurfaceMesh m = tetrahedron();
    m.triangles.pop_back();
    CHECK_THROWS_AS(require_valid_mesh(m), ValidationError);
  }
}

TEST_CASE("element geometry matches the dense-solve oracle") {
  oracle::Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Vec3 a{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    Vec3 b{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    Vec3 c{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    if (triangle_area(a, b, c) < 1e-3) continue;
    std::vector<Vec3> verts = {a, b, c};
    std::vector<Tri> tris = {{0, 1, 2}};
    ElementGeometry geom = element_geometry(verts, tris);
    REQUIRE(geom.size() == 1);
    CHECK(geom.areas[0] == Catch::Approx(oracle::triangle_area(a, b, c)));
    Vec3 n_oracle = oracle::facet_unit_normal(a, b, c);
    CHECK((geom.normals[0] - n_oracle).norm() < 1e-12);
    Vec3 grad_sum{0, 0, 0};
    for (int i = 0; i < 3; ++i) {
      Vec3 g_oracle = oracle::basis_gradient(a, b, c, i);
      CHECK((geom.basis_gradients[0][i] - g_oracle).norm() < 1e-9);
      CHECK(std::abs(dot(geom.basis_gradients[0][i], geom.normals[0])) < 1e-12);
      grad_sum += geom.basis_gradients[0][i];
    }
    CHECK(grad_sum.norm() < 1e-12); // partition of unity has zero gradient
  }
}

TEST_CASE("element geometry rejects degenerate triangles") {
  std::vector<Vec3> verts = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  std::vector<Tri> tris = {{0, 1, 2}};
  CHECK_THROWS_AS(element_geometry(verts, tris), ValidationError);
}

TEST_CASE("icosphere counts, radius, and validity") {
  for (int level = 0; level <= 4; ++level) {
    SurfaceMesh m = icosphere(level, 1.0);
    const std::size_t pow4 = std::size_t(1) << (2 * level);
    CHECK(m.triangles.size() == 20 * pow4);
    CHECK(m.vertices.size() == 2 + 10 * pow4);
    ValidationReport rep = validate_mesh(m);
    CHECK(rep.accepted);
    CHECK(rep.euler_characteristic == 2);
    for (const Vec3& v : m.vertices) CHECK(v.norm() == Catch::Approx(1.0));
    CHECK(signed_volume(m.vertices, m.triangles) > 0.0); // outward orientation
  }
}

TEST_CASE("icosphere approaches the smooth sphere under refinement") {
  const double sphere_area = 4.0 * std::numbers::pi;
  double prev_defect = 1e9;
  for (int level = 1; level <= 4; ++level) {
    SurfaceMesh m = icosphere(level, 1.0);
    double area = total_area(m);
    CHECK(area < sphere_area); // inscribed polyhedron
    double defect = sphere_area - area;
    CHECK(defect < prev_defect * 0.3); // roughly O(h^2) decay
    prev_defect = defect;
  }
  // Mesh size halves per level, approximately.
  double h3 = max_element_diameter(icosphere(3));
  double h4 = max_element_diameter(icosphere(4));
  CHECK(h3 / h4 > 1.8);
  CHECK(h3 / h4 < 2.2);
}

TEST_CASE("icosphere radius scaling") {
  SurfaceMesh m = icosphere(2, 2.5);
  for (const Vec3& v : m.vertices) CHECK(v.norm() == Catch::Approx(2.5));
  CHECK(bounding_sphere_radius(m.vertices) == Catch::Approx(2.5).epsilon(1e-6));
}
