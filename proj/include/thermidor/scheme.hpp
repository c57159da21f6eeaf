#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "thermidor/assembly.hpp"
#include "thermidor/mollifier.hpp"
#include "thermidor/physics.hpp"
#include "thermidor/solver.hpp"

namespace thermidor {

/// Coefficient vectors of all fields at one time level: beta for the
/// temperature (all-vertex space), alpha_i / gamma_i for the mobile and
/// deposited populations (interior-vertex space).
struct State {
  double t = 0.0;
  VecX beta;
  std::vector<VecX> alpha;
  std::vector<VecX> gamma;

  bool all_finite() const;
};

struct SystemStat {
  std::string tag;
  int iterations = 0;
  double residual = 0.0;
};

struct StepReport {
  double t = 0.0;
  std::vector<SystemStat> solves;
  double min_theta = 0.0;  // positivity monitor
  VecX min_u, min_v;
};

using TimeField = std::function<double(const Vec2&, double)>;

struct Sources {
  TimeField f_theta;               // null for no forcing
  std::vector<TimeField> f_u;      // empty or one per species
  std::vector<TimeField> f_v;

  bool any() const { return static_cast<bool>(f_theta) || !f_u.empty() || !f_v.empty(); }
};

/// Mesh-level objects shared by every step: spaces, mass/stiffness
/// matrices, quadrature layout and the mollified-gradient operators
/// (built only when a coupling coefficient needs them).
struct Discretization {
  const Mesh* mesh = nullptr;
  ModelParams params;
  QuadRule rule;
  FeSpace theta_space, u_space;
  SparseMat mass_theta, mass_u;
  SparseMat stiff_theta;
  std::vector<SparseMat> stiff_u;
  Mat2X quad_pts;
  std::vector<int> quad_elem;
  std::optional<SpatialIndex> index;
  MollifierKernel kernel;
  std::optional<MollifiedGradientOperator> moll_theta;  // beta -> grad^delta theta
  std::optional<MollifiedGradientOperator> moll_u;      // alpha_i -> grad^delta u_i
  std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> mass_theta_ldlt;
  std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> mass_u_ldlt;
};

Discretization make_discretization(const Mesh& mesh, const ModelParams& params,
                                   int quad_degree = 4, const MollifierQuadSpec& moll_spec = {});

State interpolate_initial(const Discretization& disc, const InitialData& initial);

struct AdvanceOptions {
  double solver_tol = 1e-10;
  bool reverse_species_order = false;  // species solves are independent; for testing
};

/// One semi-implicit step: implicit diffusion and deposition exchange,
/// coupling gradients and reaction rates frozen at the previous level, the
/// deposited fraction eliminated nodewise from the species solve.
std::pair<State, StepReport> advance_step(const Discretization& disc, const State& state,
                                          double tau, const Sources& sources = {},
                                          const AdvanceOptions& options = {});

struct RunResult {
  State final_state;
  std::vector<StepReport> reports;
};

using StepObserver = std::function<void(const State&, const StepReport&)>;

/// Repeated advance_step from interpolated initial data; the last step is
/// shortened when tau does not divide t_end.
RunResult run_simulation(const Discretization& disc, const InitialData& initial, double tau,
                         double t_end, const Sources& sources = {},
                         const StepObserver& observer = nullptr,
                         const AdvanceOptions& options = {});

RunResult run_simulation(const ModelParams& params, const Mesh& mesh, const InitialData& initial,
                         double tau, double t_end, const Sources& sources = {},
                         const StepObserver& observer = nullptr,
                         const AdvanceOptions& options = {});

struct StateDerivative {
  VecX beta_dot;
  std::vector<VecX> alpha_dot;
  std::vector<VecX> gamma_dot;
};

/// Right-hand side of the semidiscrete Galerkin system; convection is
/// rebuilt from the current state, the trilinear coupling tensor is never
/// materialized (its action is a convection-matrix product).
StateDerivative mol_rhs(const Discretization& disc, const State& state,
                        const Sources& sources = {});

/// Classical 4-stage Runge-Kutta over mol_rhs. Throws DivergenceError when
/// the state grows beyond 1e6 times the initial magnitude.
State integrate_mol_rk4(const Discretization& disc, const State& initial, double tau_ode,
                        double t_end, const Sources& sources = {});

}  // namespace thermidor
