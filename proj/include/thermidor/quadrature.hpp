#pragma once

#include "thermidor/mesh.hpp"
#include "thermidor/types.hpp"

namespace thermidor {

/// Symmetric quadrature rule on the reference triangle, stored in
/// barycentric coordinates with weights normalized to sum to 1.
struct QuadRule {
  int degree = 0;
  Eigen::Matrix3Xd bary;
  VecX weights;

  int n_points() const { return static_cast<int>(weights.size()); }
};

/// Rules exact for polynomials up to the requested degree (2, 4 or 6).
QuadRule make_quad_rule(int degree);

/// Physical coordinates of every quadrature point, one column per
/// (element, point) pair laid out as e * rule.n_points() + q.
Mat2X physical_quad_points(const Mesh& mesh, const QuadRule& rule);

}  // namespace thermidor
