#pragma once

#include <string>
#include <vector>

#include "thermidor/mollifier.hpp"
#include "thermidor/physics.hpp"
#include "thermidor/scheme.hpp"

namespace thermidor {

/// Closed-form space-time scalar field with the derivatives the forcing
/// construction and error measurement need.
struct SpaceTimeField {
  std::function<double(const Vec2&, double)> value;
  std::function<double(const Vec2&, double)> dt;
  std::function<Vec2(const Vec2&, double)> grad;
  std::function<double(const Vec2&, double)> laplacian;
};

/// Exact solution triplet plus the forcing that balances the system.
struct ManufacturedCase {
  ModelParams params;
  SpaceTimeField theta;
  std::vector<SpaceTimeField> u;
  std::vector<SpaceTimeField> v;
  TimeField f_theta;             // null when the case is source-free
  std::vector<TimeField> f_u;
  std::vector<TimeField> f_v;

  /// Fills the forcing's convolution caches for a fixed point set in one
  /// parallel sweep (the manufactured profiles separate in time, so the
  /// time loop then reuses the cached spatial factors). Null when the case
  /// carries no nonlocal forcing.
  std::function<void(const Mat2X&)> prewarm;

  InitialData initial() const;
  Sources sources() const;
};

/// Source-free eigenfunction solution of the heat/diffusion parts on the
/// unit square: theta = e^{-2 pi^2 K t} cos(pi x) cos(pi y),
/// u_i = e^{-2 pi^2 D_i t} sin(pi x) sin(pi y), all couplings off,
/// deposited fractions start at zero.
ManufacturedCase exact_decoupled_case(double K, const VecX& D, const VecX& B);
ManufacturedCase exact_decoupled_case(double K, double D, int n_species = 1);

/// Fully coupled manufactured solution: trigonometric profiles decaying as
/// e^{-t} (temperature offset by +1 so the initial data are nonnegative);
/// the forcing absorbs every term of the system, with the nonlocal factors
/// evaluated by adaptive convolution quadrature and cached per point.
ManufacturedCase coupled_mms_case(const ModelParams& params, const MollifierKernel& kernel,
                                  double conv_tol = 1e-10);

/// Reference convolution gradient by composite tensor quadrature over the
/// clipped bounding box; an independent cross-check for the polar path.
Vec2 reference_mollified_gradient(const MollifierKernel& kernel, const ScalarField& f,
                                  const Rect& domain, const Vec2& x, int panels_per_side = 64);

/// Max strong-form residual of the case over seeded random space-time
/// samples, with the convolution factors recomputed by the independent
/// box-grid quadrature.
double mms_residual_check(const ManufacturedCase& mc, int n_samples = 100, unsigned seed = 2024,
                          double t_max = 1.0);

/// Energy projection: (coeff grad(Rw - w), grad phi) = 0 for all phi. On
/// the all-vertex space the constant kernel is fixed by matching means via
/// one Lagrange multiplier row.
VecX ritz_project(const FeSpace& space, double coeff, const ScalarField& exact,
                  const VectorField& exact_grad, const QuadRule& rule, double tol = 1e-12);

enum class StudyKind { space, time, coupled };

struct StudyRowSpec {
  int nx = 0;
  double tau = 0.0;
};

struct StudyProtocol {
  StudyKind kind = StudyKind::space;
  std::vector<StudyRowSpec> rows;
  double t_end = 0.1;
  Rect domain = unit_square();
  double solver_tol = 1e-10;
  int error_quad_degree = 6;
  MollifierQuadSpec moll_spec;
};

/// tau = tau_coeff * h^2 rows with nx doubling per level.
StudyProtocol make_space_protocol(int base_nx, int levels, double tau_coeff, double t_end);
/// Fixed mesh, tau halving per level.
StudyProtocol make_time_protocol(int nx, double tau0, int levels, double t_end);
StudyProtocol make_coupled_protocol(int base_nx, int levels, double tau_coeff, double t_end);

/// Field order: theta, u_1..u_N, v_1..v_N.
struct EocRow {
  double h = 0.0;
  double tau = 0.0;
  VecX l2;
  VecX h1;
  VecX eoc;  // NaN on the first row and wherever undefined
};

struct EocTable {
  int n_species = 0;
  std::vector<EocRow> rows;
  std::string abort_reason;  // nonempty when a row's simulation failed

  static std::vector<std::string> field_names(int n_species);
};

/// Runs the simulation per row and measures final-time errors of every
/// field; a row failure aborts with the partial table and the reason.
EocTable convergence_study(const ManufacturedCase& mc, const StudyProtocol& protocol);

}  // namespace thermidor
