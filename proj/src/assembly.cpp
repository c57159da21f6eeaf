#include "thermidor/assembly.hpp"

#include <stdexcept>
#include <vector>

namespace thermidor {

namespace {

SparseMat from_triplets(int rows, int cols, std::vector<Triplet>& trips) {
  SparseMat m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

}  // namespace

SparseMat assemble_mass(const FeSpace& space, const QuadRule& rule) {
  const Mesh& mesh = *space.mesh;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(mesh.n_triangles()) * 9);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[static_cast<size_t>(t)];
    const double area = mesh.triangle_area(t);
    for (int q = 0; q < rule.n_points(); ++q) {
      const Eigen::Vector3d lam = rule.bary.col(q);
      const double wq = rule.weights[q] * area;
      for (int k = 0; k < 3; ++k) {
        const int row = space.dof_of_vertex[static_cast<size_t>(tri[k])];
        if (row < 0) continue;
        for (int j = 0; j < 3; ++j) {
          const int col = space.dof_of_vertex[static_cast<size_t>(tri[j])];
          if (col < 0) continue;
          trips.emplace_back(row, col, wq * (lam[k] * lam[j]));
        }
      }
    }
  }
  return from_triplets(space.n_dofs, space.n_dofs, trips);
}

SparseMat assemble_stiffness(const FeSpace& space, double coeff) {
  if (!(coeff > 0.0))
    throw std::invalid_argument("assemble_stiffness: coefficient must be positive");
  const Mesh& mesh = *space.mesh;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(mesh.n_triangles()) * 9);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[static_cast<size_t>(t)];
    const double area = mesh.triangle_area(t);
    const auto grads = barycentric_gradients(mesh, t);
    for (int k = 0; k < 3; ++k) {
      const int row = space.dof_of_vertex[static_cast<size_t>(tri[k])];
      if (row < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int col = space.dof_of_vertex[static_cast<size_t>(tri[j])];
        if (col < 0) continue;
        trips.emplace_back(row, col, coeff * area * grads[k].dot(grads[j]));
      }
    }
  }
  return from_triplets(space.n_dofs, space.n_dofs, trips);
}

SparseMat assemble_convection(const FeSpace& space, const QuadVectorField& velocity,
                              const QuadRule& rule) {
  const Mesh& mesh = *space.mesh;
  const int nq = rule.n_points();
  if (velocity.cols() != static_cast<Eigen::Index>(mesh.n_triangles()) * nq)
    throw std::invalid_argument(
        "assemble_convection: velocity layout does not match elements x quadrature points");

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(mesh.n_triangles()) * 9);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[static_cast<size_t>(t)];
    const double area = mesh.triangle_area(t);
    const auto grads = barycentric_gradients(mesh, t);
    for (int q = 0; q < nq; ++q) {
      const Eigen::Vector3d lam = rule.bary.col(q);
      const double wq = rule.weights[q] * area;
      const Vec2 v = velocity.col(static_cast<Eigen::Index>(t) * nq + q);
      for (int k = 0; k < 3; ++k) {
        const int row = space.dof_of_vertex[static_cast<size_t>(tri[k])];
        if (row < 0) continue;
        for (int j = 0; j < 3; ++j) {
          const int col = space.dof_of_vertex[static_cast<size_t>(tri[j])];
          if (col < 0) continue;
          trips.emplace_back(row, col, wq * lam[k] * v.dot(grads[j]));
        }
      }
    }
  }
  return from_triplets(space.n_dofs, space.n_dofs, trips);
}

VecX assemble_load(const FeSpace& space, const ScalarField& f, const QuadRule& rule) {
  const Mesh& mesh = *space.mesh;
  VecX load = VecX::Zero(space.n_dofs);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[static_cast<size_t>(t)];
    const double area = mesh.triangle_area(t);
    const Vec2 a = mesh.vertex(tri[0]), b = mesh.vertex(tri[1]), c = mesh.vertex(tri[2]);
    for (int q = 0; q < rule.n_points(); ++q) {
      const Eigen::Vector3d lam = rule.bary.col(q);
      const double fv = f(lam[0] * a + lam[1] * b + lam[2] * c);
      const double wq = rule.weights[q] * area;
      for (int k = 0; k < 3; ++k) {
        const int row = space.dof_of_vertex[static_cast<size_t>(tri[k])];
        if (row >= 0) load[row] += wq * fv * lam[k];
      }
    }
  }
  return load;
}

VecX assemble_basis_integrals(const FeSpace& space, const QuadRule& rule) {
  return assemble_load(
      space, [](const Vec2&) { return 1.0; }, rule);
}

}  // namespace thermidor
