#include "thermidor/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace thermidor {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

double Mesh::triangle_area(int t) const {
  const auto& tri = triangles[static_cast<size_t>(t)];
  return signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

double Mesh::triangle_diameter(int t) const {
  const auto& tri = triangles[static_cast<size_t>(t)];
  const Vec2 a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
  return std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
}

namespace {

// Edge bookkeeping: boundary vertices are the endpoints of edges owned by a
// single triangle. Also yields the edge list needed by refine_uniform.
void flag_boundary_vertices(Mesh& mesh) {
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edge_count[{a, b}];
    }
  }
  mesh.boundary_vertex.assign(mesh.vertices.size(), 0);
  for (const auto& [edge, count] : edge_count) {
    if (count == 1) {
      mesh.boundary_vertex[edge.first] = 1;
      mesh.boundary_vertex[edge.second] = 1;
    }
  }
}

double longest_edge(const Mesh& mesh) {
  double h = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) h = std::max(h, mesh.triangle_diameter(t));
  return h;
}

}  // namespace

Mesh build_structured_mesh(int nx, int ny, const Rect& domain) {
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("build_structured_mesh: subdivision counts must be >= 1");
  if (domain.width() <= 0.0 || domain.height() <= 0.0)
    throw std::invalid_argument("build_structured_mesh: rectangle sides must be positive");

  Mesh mesh;
  mesh.domain = domain;
  mesh.vertices.reserve(static_cast<size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.push_back({domain.lo.x() + domain.width() * i / nx,
                               domain.lo.y() + domain.height() * j / ny});

  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  mesh.triangles.reserve(static_cast<size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }

  flag_boundary_vertices(mesh);
  mesh.h = longest_edge(mesh);
  return mesh;
}

Mesh refine_uniform(const Mesh& mesh) {
  Mesh fine;
  fine.domain = mesh.domain;
  fine.vertices = mesh.vertices;

  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    auto it = midpoint.find({a, b});
    if (it != midpoint.end()) return it->second;
    const int v = static_cast<int>(fine.vertices.size());
    fine.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
    midpoint.emplace(std::make_pair(a, b), v);
    return v;
  };

  fine.triangles.reserve(mesh.triangles.size() * 4);
  for (const auto& tri : mesh.triangles) {
    const int a = tri[0], b = tri[1], c = tri[2];
    const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
    fine.triangles.push_back({a, ab, ca});
    fine.triangles.push_back({ab, b, bc});
    fine.triangles.push_back({ca, bc, c});
    fine.triangles.push_back({ab, bc, ca});
  }

  flag_boundary_vertices(fine);
  fine.h = 0.5 * mesh.h;
  return fine;
}

SpatialIndex::SpatialIndex(const Mesh& mesh, double bucket_size) : bucket_(bucket_size) {
  if (bucket_size <= 0.0)
    throw std::invalid_argument("SpatialIndex: bucket size must be positive");

  Vec2 hi = mesh.vertices.front();
  lo_ = hi;
  for (const auto& v : mesh.vertices) {
    lo_ = lo_.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  nbx_ = std::max(1, static_cast<int>(std::ceil((hi.x() - lo_.x()) / bucket_)));
  nby_ = std::max(1, static_cast<int>(std::ceil((hi.y() - lo_.y()) / bucket_)));
  buckets_.assign(static_cast<size_t>(nbx_ * nby_), {});

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[static_cast<size_t>(t)];
    Vec2 tlo = mesh.vertices[tri[0]], thi = tlo;
    for (int k = 1; k < 3; ++k) {
      tlo = tlo.cwiseMin(mesh.vertices[tri[k]]);
      thi = thi.cwiseMax(mesh.vertices[tri[k]]);
    }
    const int ix0 = std::clamp(static_cast<int>((tlo.x() - lo_.x()) / bucket_), 0, nbx_ - 1);
    const int ix1 = std::clamp(static_cast<int>((thi.x() - lo_.x()) / bucket_), 0, nbx_ - 1);
    const int iy0 = std::clamp(static_cast<int>((tlo.y() - lo_.y()) / bucket_), 0, nby_ - 1);
    const int iy1 = std::clamp(static_cast<int>((thi.y() - lo_.y()) / bucket_), 0, nby_ - 1);
    for (int iy = iy0; iy <= iy1; ++iy)
      for (int ix = ix0; ix <= ix1; ++ix)
        buckets_[static_cast<size_t>(bucket_of(ix, iy))].push_back(t);
  }
}

std::vector<int> SpatialIndex::query(const Vec2& center, double radius) const {
  std::vector<int> out;
  const int ix0 = static_cast<int>(std::floor((center.x() - radius - lo_.x()) / bucket_));
  const int ix1 = static_cast<int>(std::floor((center.x() + radius - lo_.x()) / bucket_));
  const int iy0 = static_cast<int>(std::floor((center.y() - radius - lo_.y()) / bucket_));
  const int iy1 = static_cast<int>(std::floor((center.y() + radius - lo_.y()) / bucket_));
  if (ix1 < 0 || iy1 < 0 || ix0 >= nbx_ || iy0 >= nby_) return out;

  for (int iy = std::max(iy0, 0); iy <= std::min(iy1, nby_ - 1); ++iy)
    for (int ix = std::max(ix0, 0); ix <= std::min(ix1, nbx_ - 1); ++ix)
      out.insert(out.end(), buckets_[static_cast<size_t>(bucket_of(ix, iy))].begin(),
                 buckets_[static_cast<size_t>(bucket_of(ix, iy))].end());

  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SpatialIndex make_spatial_index(const Mesh& mesh, double delta) {
  return SpatialIndex(mesh, std::max(delta, 2.0 * mesh.h));
}

std::vector<int> triangles_near(const SpatialIndex& index, const Vec2& x, double r) {
  if (r <= 0.0) throw std::invalid_argument("triangles_near: radius must be positive");
  return index.query(x, r);
}

namespace {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

double point_triangle_distance(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  const double s0 = signed_area(p, a, b);
  const double s1 = signed_area(p, b, c);
  const double s2 = signed_area(p, c, a);
  if (s0 >= 0.0 && s1 >= 0.0 && s2 >= 0.0) return 0.0;
  return std::min({point_segment_distance(p, a, b), point_segment_distance(p, b, c),
                   point_segment_distance(p, c, a)});
}

int locate_triangle(const Mesh& mesh, const SpatialIndex& index, const Vec2& x) {
  constexpr double kTol = 1e-12;
  // Small positive query radius so points sitting exactly on a bucket
  // gridline still see triangles registered on the other side.
  for (int t : index.query(x, 1e-9 * index.bucket_size())) {
    const Eigen::Vector3d lam = barycentric(mesh, t, x);
    if (lam.minCoeff() >= -kTol) return t;
  }
  return -1;
}

Eigen::Vector3d barycentric(const Mesh& mesh, int t, const Vec2& x) {
  const auto& tri = mesh.triangles[static_cast<size_t>(t)];
  const Vec2 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
  const double area = signed_area(a, b, c);
  return {signed_area(x, b, c) / area, signed_area(a, x, c) / area, signed_area(a, b, x) / area};
}

}  // namespace thermidor
