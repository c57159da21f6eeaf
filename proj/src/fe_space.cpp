#include "thermidor/fe_space.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace thermidor {

FeSpace make_fe_space(const Mesh& mesh, SpaceKind kind) {
  FeSpace space;
  space.mesh = &mesh;
  space.kind = kind;
  space.dof_of_vertex.assign(mesh.vertices.size(), -1);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (kind == SpaceKind::dirichlet0 && mesh.boundary_vertex[static_cast<size_t>(v)]) continue;
    space.dof_of_vertex[static_cast<size_t>(v)] = space.n_dofs++;
    space.vertex_of_dof.push_back(v);
  }
  return space;
}

VecX interpolate(const FeSpace& space, const ScalarField& f) {
  VecX coeffs(space.n_dofs);
  for (int j = 0; j < space.n_dofs; ++j) {
    const int v = space.vertex_of_dof[static_cast<size_t>(j)];
    const double value = f(space.mesh->vertex(v));
    if (!std::isfinite(value))
      throw std::invalid_argument("interpolate: non-finite sample at vertex " + std::to_string(v));
    coeffs[j] = value;
  }
  return coeffs;
}

double eval_discrete(const FeSpace& space, const VecX& coeffs, int t,
                     const Eigen::Vector3d& bary) {
  const auto& tri = space.mesh->triangles[static_cast<size_t>(t)];
  double value = 0.0;
  for (int k = 0; k < 3; ++k) {
    const int dof = space.dof_of_vertex[static_cast<size_t>(tri[k])];
    if (dof >= 0) value += bary[k] * coeffs[dof];
  }
  return value;
}

std::array<Vec2, 3> barycentric_gradients(const Mesh& mesh, int t) {
  const auto& tri = mesh.triangles[static_cast<size_t>(t)];
  const Vec2 a = mesh.vertex(tri[0]), b = mesh.vertex(tri[1]), c = mesh.vertex(tri[2]);
  const double inv2A = 1.0 / (2.0 * signed_area(a, b, c));
  return {Vec2{(b.y() - c.y()) * inv2A, (c.x() - b.x()) * inv2A},
          Vec2{(c.y() - a.y()) * inv2A, (a.x() - c.x()) * inv2A},
          Vec2{(a.y() - b.y()) * inv2A, (b.x() - a.x()) * inv2A}};
}

Vec2 discrete_gradient(const FeSpace& space, const VecX& coeffs, int t) {
  const auto& tri = space.mesh->triangles[static_cast<size_t>(t)];
  const auto grads = barycentric_gradients(*space.mesh, t);
  Vec2 g = Vec2::Zero();
  for (int k = 0; k < 3; ++k) {
    const int dof = space.dof_of_vertex[static_cast<size_t>(tri[k])];
    if (dof >= 0) g += coeffs[dof] * grads[k];
  }
  return g;
}

std::pair<double, double> error_norms(const FeSpace& space, const VecX& coeffs,
                                      const ScalarField& exact, const VectorField& exact_grad,
                                      const QuadRule& rule) {
  const Mesh& mesh = *space.mesh;
  double l2 = 0.0, h1 = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[static_cast<size_t>(t)];
    const double area = mesh.triangle_area(t);
    const Vec2 a = mesh.vertex(tri[0]), b = mesh.vertex(tri[1]), c = mesh.vertex(tri[2]);
    const Vec2 gh = discrete_gradient(space, coeffs, t);
    for (int q = 0; q < rule.n_points(); ++q) {
      const Eigen::Vector3d lam = rule.bary.col(q);
      const Vec2 x = lam[0] * a + lam[1] * b + lam[2] * c;
      const double wq = rule.weights[q] * area;
      const double diff = eval_discrete(space, coeffs, t, lam) - exact(x);
      l2 += wq * diff * diff;
      const Vec2 gdiff = gh - exact_grad(x);
      h1 += wq * gdiff.squaredNorm();
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

}  // namespace thermidor
