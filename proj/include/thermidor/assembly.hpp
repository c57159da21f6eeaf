#pragma once

#include "thermidor/fe_space.hpp"
#include "thermidor/quadrature.hpp"
#include "thermidor/types.hpp"

namespace thermidor {

/// Per-quadrature-point 2D vectors, one column per (element, point) pair in
/// the layout of physical_quad_points.
using QuadVectorField = Mat2X;

/// Mass matrix (phi_j, phi_k). Symmetric positive definite.
SparseMat assemble_mass(const FeSpace& space, const QuadRule& rule);

/// Stiffness matrix coeff * (grad phi_j, grad phi_k). Requires coeff > 0.
SparseMat assemble_stiffness(const FeSpace& space, double coeff);

/// Convection matrix with entry (k, j) = (velocity . grad phi_j, phi_k),
/// velocity given per quadrature point. Generally nonsymmetric.
SparseMat assemble_convection(const FeSpace& space, const QuadVectorField& velocity,
                              const QuadRule& rule);

/// Load vector (f, phi_k) by elementwise quadrature; f sampled at the
/// physical quadrature points.
VecX assemble_load(const FeSpace& space, const ScalarField& f, const QuadRule& rule);

/// Vector of basis-function integrals (phi_j, 1).
VecX assemble_basis_integrals(const FeSpace& space, const QuadRule& rule);

}  // namespace thermidor
