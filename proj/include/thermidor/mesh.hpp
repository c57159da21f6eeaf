#pragma once

#include <array>
#include <vector>

#include "thermidor/types.hpp"

namespace thermidor {

/// Conforming triangulation of a rectangle. Triangles are stored
/// counterclockwise; h is the longest edge over all triangles.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<char> boundary_vertex;
  double h = 0.0;
  Rect domain;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }

  Vec2 vertex(int v) const { return vertices[static_cast<size_t>(v)]; }
  double triangle_area(int t) const;
  double triangle_diameter(int t) const;
};

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c);

/// Splits each of the nx*ny cells of the rectangle along one diagonal,
/// giving 2*nx*ny right triangles on (nx+1)*(ny+1) vertices.
Mesh build_structured_mesh(int nx, int ny, const Rect& domain = unit_square());

/// Red refinement: every triangle is split into 4 congruent children at the
/// edge midpoints. Halves h exactly and preserves conformity.
Mesh refine_uniform(const Mesh& mesh);

/// Uniform bucket grid over the mesh bounding box for radius queries.
/// Queries return a superset of the triangles intersecting the disk.
class SpatialIndex {
 public:
  explicit SpatialIndex(const Mesh& mesh, double bucket_size);

  std::vector<int> query(const Vec2& center, double radius) const;

  double bucket_size() const { return bucket_; }

 private:
  int bucket_of(int ix, int iy) const { return iy * nbx_ + ix; }

  Vec2 lo_;
  double bucket_;
  int nbx_ = 0, nby_ = 0;
  std::vector<std::vector<int>> buckets_;
};

/// Default bucket sizing: one-ring queries then cover a delta-ball.
SpatialIndex make_spatial_index(const Mesh& mesh, double delta);

std::vector<int> triangles_near(const SpatialIndex& index, const Vec2& x, double r);

/// Exact distance from a point to a (closed) triangle; 0 inside.
double point_triangle_distance(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c);

/// Containing-triangle lookup via the index; -1 if x lies outside the mesh.
int locate_triangle(const Mesh& mesh, const SpatialIndex& index, const Vec2& x);

/// Barycentric coordinates of x with respect to triangle t.
Eigen::Vector3d barycentric(const Mesh& mesh, int t, const Vec2& x);

}  // namespace thermidor
