#pragma once

#include <span>
#include <vector>

#include "thermidor/assembly.hpp"
#include "thermidor/fe_space.hpp"
#include "thermidor/mesh.hpp"
#include "thermidor/types.hpp"

namespace thermidor {

/// Compactly supported smooth bump J(s) = C exp(1/(|s|^2 - delta^2)) for
/// |s| < delta, normalized to unit integral over the plane.
///
/// Evaluation folds the normalization into the exponent,
/// J(s) = exp(|s|^2 / (delta^2 (|s|^2 - delta^2))) / (2 pi delta^2 I),
/// which stays representable for any delta.
struct MollifierKernel {
  double delta = 0.0;
  double delta2 = 0.0;
  double norm_const = 0.0;     // C in the defining formula
  double scaled_inv_mass = 0;  // 1 / (2 pi delta^2 I), I the reduced radial integral

  double value(const Vec2& s) const { return value_r2(s.squaredNorm()); }

  double value_r2(double r2) const {
    if (r2 >= delta2) return 0.0;
    const double e = r2 / (delta2 * (r2 - delta2));
    if (e < -700.0) return 0.0;
    return scaled_inv_mass * std::exp(e);
  }

  // grad J(s) = grad_factor(|s|^2) * s
  double grad_factor(double r2) const {
    if (r2 >= delta2) return 0.0;
    const double u = r2 - delta2;
    const double e = r2 / (delta2 * u);
    if (e < -700.0) return 0.0;
    return scaled_inv_mass * std::exp(e) * (-2.0) / (u * u);
  }

  Vec2 grad(const Vec2& s) const { return grad_factor(s.squaredNorm()) * s; }
};

/// Builds the kernel; the normalization constant comes from the radial
/// integral 2 pi int_0^delta exp(1/(r^2-delta^2)) r dr resolved to relative
/// 1e-10.
MollifierKernel make_kernel(double delta);

/// Quadrature resolution for the discrete convolution path: elements
/// intersecting the ball are split until children are no larger than
/// child_diameter_factor * delta, with extra refinement levels where the
/// ball boundary cuts through.
struct MollifierQuadSpec {
  int rule_degree = 4;
  double child_diameter_factor = 1.0 / 16.0;
  int cut_levels = 1;
  int max_levels = 9;
};

/// Linear map from dof coefficients to mollified-gradient values at a fixed
/// point set; rows are points, columns dofs of the originating space.
struct MollifiedGradientOperator {
  SparseMat gx, gy;

  /// Columns are eval points; row 0/1 the x/y component.
  Mat2X apply(const VecX& coeffs) const;
};

/// Builds operators for several spaces over the same mesh in one sweep (the
/// kernel quadrature is shared; only the dof scatter differs).
/// element_hint, when given, names the containing element of each point and
/// skips the point-location step.
std::vector<MollifiedGradientOperator> build_mollified_gradient_operators(
    const MollifierKernel& kernel, const Mesh& mesh, std::span<const FeSpace* const> spaces,
    const Mat2X& points, const SpatialIndex& index, const MollifierQuadSpec& spec = {},
    const std::vector<int>* element_hint = nullptr);

MollifiedGradientOperator build_mollified_gradient_operator(
    const MollifierKernel& kernel, const FeSpace& space, const Mat2X& points,
    const SpatialIndex& index, const MollifierQuadSpec& spec = {},
    const std::vector<int>* element_hint = nullptr);

/// Mollified gradient of a discrete field at the given points; fields are
/// extended by zero outside the mesh.
Mat2X mollified_gradient_discrete(const MollifierKernel& kernel, const FeSpace& space,
                                  const VecX& coeffs, const Mat2X& points,
                                  const SpatialIndex& index, const MollifierQuadSpec& spec = {});

/// Mollified gradient of an analytic field over a rectangle (zero-extended
/// outside), by adaptive polar quadrature to the given absolute tolerance
/// per component. Throws AccuracyError when the tolerance cannot be met.
Mat2X mollified_gradient_analytic(const MollifierKernel& kernel, const ScalarField& f,
                                  const Rect& domain, const Mat2X& points, double tol = 1e-10);

}  // namespace thermidor
