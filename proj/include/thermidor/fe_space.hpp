#pragma once

#include <functional>
#include <utility>

#include "thermidor/mesh.hpp"
#include "thermidor/quadrature.hpp"
#include "thermidor/types.hpp"

namespace thermidor {

enum class SpaceKind {
  neumann,     // dofs on every vertex
  dirichlet0,  // dofs on interior vertices only, zero trace on the boundary
};

/// P1 nodal space over a triangulation. Basis function j is the hat taking
/// value 1 at its vertex and 0 at all others.
struct FeSpace {
  const Mesh* mesh = nullptr;
  SpaceKind kind = SpaceKind::neumann;
  std::vector<int> dof_of_vertex;  // -1 for constrained vertices
  std::vector<int> vertex_of_dof;
  int n_dofs = 0;
};

FeSpace make_fe_space(const Mesh& mesh, SpaceKind kind);

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;

/// Nodal interpolant: coefficient j is f at the dof vertex. On the
/// dirichlet0 space boundary values of f are discarded.
VecX interpolate(const FeSpace& space, const ScalarField& f);

/// Evaluate the discrete field at a point inside triangle t.
double eval_discrete(const FeSpace& space, const VecX& coeffs, int t, const Eigen::Vector3d& bary);

/// Constant gradient of the discrete field on triangle t.
Vec2 discrete_gradient(const FeSpace& space, const VecX& coeffs, int t);

/// Gradients of the three barycentric coordinates of triangle t.
std::array<Vec2, 3> barycentric_gradients(const Mesh& mesh, int t);

/// L2 and H1-seminorm errors of a discrete field against an exact field,
/// by elementwise quadrature.
std::pair<double, double> error_norms(const FeSpace& space, const VecX& coeffs,
                                      const ScalarField& exact, const VectorField& exact_grad,
                                      const QuadRule& rule);

}  // namespace thermidor
