#include "thermidor/scheme.hpp"

#include <cmath>

#include "thermidor/errors.hpp"

namespace thermidor {

bool State::all_finite() const {
  if (!beta.allFinite()) return false;
  for (const auto& a : alpha)
    if (!a.allFinite()) return false;
  for (const auto& g : gamma)
    if (!g.allFinite()) return false;
  return true;
}

Discretization make_discretization(const Mesh& mesh, const ModelParams& params, int quad_degree,
                                   const MollifierQuadSpec& moll_spec) {
  Discretization d;
  d.mesh = &mesh;
  d.params = params;
  d.rule = make_quad_rule(quad_degree);
  d.theta_space = make_fe_space(mesh, SpaceKind::neumann);
  d.u_space = make_fe_space(mesh, SpaceKind::dirichlet0);
  d.mass_theta = assemble_mass(d.theta_space, d.rule);
  d.mass_u = assemble_mass(d.u_space, d.rule);
  d.stiff_theta = assemble_stiffness(d.theta_space, params.K);
  d.stiff_u.reserve(static_cast<size_t>(params.n_species));
  for (int i = 0; i < params.n_species; ++i)
    d.stiff_u.push_back(assemble_stiffness(d.u_space, params.D[i]));
  d.quad_pts = physical_quad_points(mesh, d.rule);
  d.quad_elem.resize(static_cast<size_t>(d.quad_pts.cols()));
  for (size_t p = 0; p < d.quad_elem.size(); ++p)
    d.quad_elem[p] = static_cast<int>(p) / d.rule.n_points();

  const bool need_u_gradients = params.S.size() > 0 && params.S.maxCoeff() > 0.0;
  const bool need_theta_gradients = params.F.size() > 0 && params.F.maxCoeff() > 0.0;
  if (need_u_gradients || need_theta_gradients) {
    d.kernel = make_kernel(params.delta);
    d.index.emplace(make_spatial_index(mesh, params.delta));
    const FeSpace* spaces[2] = {&d.theta_space, &d.u_space};
    auto ops = build_mollified_gradient_operators(d.kernel, mesh, std::span(spaces, 2),
                                                  d.quad_pts, *d.index, moll_spec, &d.quad_elem);
    d.moll_theta = std::move(ops[0]);
    d.moll_u = std::move(ops[1]);
  }

  d.mass_theta_ldlt = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
  d.mass_theta_ldlt->compute(Eigen::SparseMatrix<double>(d.mass_theta));
  d.mass_u_ldlt = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
  d.mass_u_ldlt->compute(Eigen::SparseMatrix<double>(d.mass_u));
  return d;
}

State interpolate_initial(const Discretization& disc, const InitialData& initial) {
  const int n = disc.params.n_species;
  if (static_cast<int>(initial.u0.size()) != n || static_cast<int>(initial.v0.size()) != n)
    throw std::invalid_argument("interpolate_initial: initial data needs one field per species");
  State s;
  s.t = 0.0;
  s.beta = interpolate(disc.theta_space, initial.theta0);
  s.alpha.resize(static_cast<size_t>(n));
  s.gamma.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    s.alpha[static_cast<size_t>(i)] = interpolate(disc.u_space, initial.u0[static_cast<size_t>(i)]);
    s.gamma[static_cast<size_t>(i)] = interpolate(disc.u_space, initial.v0[static_cast<size_t>(i)]);
  }
  return s;
}

namespace {

// Combined Soret velocity sum_i S_i grad^delta u_i at the quadrature
// points; assembly is linear in the velocity so one matrix suffices.
Mat2X combined_soret_velocity(const Discretization& disc, const std::vector<VecX>& alpha) {
  Mat2X vel = Mat2X::Zero(2, disc.quad_pts.cols());
  for (int i = 0; i < disc.params.n_species; ++i) {
    if (disc.params.S[i] == 0.0) continue;
    vel += disc.params.S[i] * disc.moll_u->apply(alpha[static_cast<size_t>(i)]);
  }
  return vel;
}

TimeField field_or_null(const std::vector<TimeField>& fields, int i) {
  if (i < 0 || i >= static_cast<int>(fields.size())) return nullptr;
  return fields[static_cast<size_t>(i)];
}

ScalarField at_time(const TimeField& f, double t) {
  return [f, t](const Vec2& x) { return f(x, t); };
}

}  // namespace

std::pair<State, StepReport> advance_step(const Discretization& disc, const State& state,
                                          double tau, const Sources& sources,
                                          const AdvanceOptions& options) {
  if (!(tau > 0.0)) throw std::invalid_argument("advance_step: tau must be positive");
  const ModelParams& p = disc.params;
  const int n = p.n_species;
  const double t_next = state.t + tau;

  State next;
  next.t = t_next;
  next.alpha.resize(static_cast<size_t>(n));
  next.gamma.resize(static_cast<size_t>(n));
  StepReport report;
  report.t = t_next;
  report.min_u.resize(n);
  report.min_v.resize(n);

  const bool soret_active = p.S.maxCoeff() > 0.0;
  const bool dufour_active = p.F.maxCoeff() > 0.0;

  // Temperature solve: implicit diffusion, coupling velocity frozen at the
  // previous level.
  {
    SparseMat A = disc.mass_theta / tau + disc.stiff_theta;
    if (soret_active) {
      const Mat2X vel = combined_soret_velocity(disc, state.alpha);
      A = A - assemble_convection(disc.theta_space, vel, disc.rule);
    }
    VecX rhs = disc.mass_theta * (state.beta / tau);
    if (sources.f_theta) rhs += assemble_load(disc.theta_space, at_time(sources.f_theta, t_next), disc.rule);

    SolveReport sr;
    try {
      next.beta = solve_linear(A, rhs, options.solver_tol, &sr, "theta", &state.beta);
    } catch (const SolverError& e) {
      throw SolverError(std::string("advance_step: ") + e.what(), e.residual, "theta");
    }
    report.solves.push_back({"theta", sr.iterations, sr.residual});
  }

  // Lagged temperature gradient shared by all species solves.
  SparseMat conv_u;
  if (dufour_active) {
    const Mat2X grad_theta = disc.moll_theta->apply(state.beta);
    conv_u = assemble_convection(disc.u_space, grad_theta, disc.rule);
  }

  const std::vector<VecX> rates = smoluchowski_rates(p, state.alpha);

  for (int step_i = 0; step_i < n; ++step_i) {
    const int i = options.reverse_species_order ? n - 1 - step_i : step_i;
    const double denom = 1.0 + tau * p.B[i];

    VecX v_source_nodal;
    const TimeField fv = field_or_null(sources.f_v, i);
    if (fv) v_source_nodal = interpolate(disc.u_space, at_time(fv, t_next));

    SparseMat A = disc.mass_u / tau + disc.stiff_u[static_cast<size_t>(i)] +
                  (p.A[i] / denom) * disc.mass_u;
    if (dufour_active && p.F[i] != 0.0) A = A - p.F[i] * conv_u;

    VecX rhs = disc.mass_u * (state.alpha[static_cast<size_t>(i)] / tau) +
               (p.B[i] / denom) * (disc.mass_u * state.gamma[static_cast<size_t>(i)]) +
               disc.mass_u * rates[static_cast<size_t>(i)];
    const TimeField fu = field_or_null(sources.f_u, i);
    if (fu) rhs += assemble_load(disc.u_space, at_time(fu, t_next), disc.rule);
    if (v_source_nodal.size() > 0)
      rhs += (tau * p.B[i] / denom) * (disc.mass_u * v_source_nodal);

    const std::string tag = "u_" + std::to_string(i + 1);
    SolveReport sr;
    try {
      next.alpha[static_cast<size_t>(i)] = solve_linear(A, rhs, options.solver_tol, &sr, tag,
                                                        &state.alpha[static_cast<size_t>(i)]);
    } catch (const SolverError& e) {
      throw SolverError(std::string("advance_step: ") + e.what(), e.residual, tag);
    }
    report.solves.push_back({tag, sr.iterations, sr.residual});

    next.gamma[static_cast<size_t>(i)] =
        deposition_step_eliminate(p.A[i], p.B[i], tau, next.alpha[static_cast<size_t>(i)],
                                  state.gamma[static_cast<size_t>(i)],
                                  v_source_nodal.size() > 0 ? &v_source_nodal : nullptr)
            .v_next;
  }

  if (!next.all_finite())
    throw DivergenceError("advance_step: non-finite state at t = " + std::to_string(t_next) +
                          "; a smaller time step is needed");

  report.min_theta = next.beta.minCoeff();
  for (int i = 0; i < n; ++i) {
    report.min_u[i] = next.alpha[static_cast<size_t>(i)].size() > 0
                          ? next.alpha[static_cast<size_t>(i)].minCoeff()
                          : 0.0;
    report.min_v[i] = next.gamma[static_cast<size_t>(i)].size() > 0
                          ? next.gamma[static_cast<size_t>(i)].minCoeff()
                          : 0.0;
  }
  return {std::move(next), std::move(report)};
}

RunResult run_simulation(const Discretization& disc, const InitialData& initial, double tau,
                         double t_end, const Sources& sources, const StepObserver& observer,
                         const AdvanceOptions& options) {
  if (!(tau > 0.0)) throw std::invalid_argument("run_simulation: tau must be positive");
  if (t_end < 0.0) throw std::invalid_argument("run_simulation: t_end must be nonnegative");

  RunResult result;
  result.final_state = interpolate_initial(disc, initial);
  if (t_end == 0.0) return result;

  const int n_steps = std::max(1, static_cast<int>(std::ceil(t_end / tau - 1e-9)));
  for (int k = 0; k < n_steps; ++k) {
    const double tau_k = (k + 1 == n_steps) ? t_end - result.final_state.t : tau;
    auto [next, report] = advance_step(disc, result.final_state, tau_k, sources, options);
    result.final_state = std::move(next);
    result.final_state.t = (k + 1 == n_steps) ? t_end : result.final_state.t;
    result.reports.push_back(std::move(report));
    if (observer) observer(result.final_state, result.reports.back());
  }
  return result;
}

RunResult run_simulation(const ModelParams& params, const Mesh& mesh, const InitialData& initial,
                         double tau, double t_end, const Sources& sources,
                         const StepObserver& observer, const AdvanceOptions& options) {
  const Discretization disc = make_discretization(mesh, params);
  return run_simulation(disc, initial, tau, t_end, sources, observer, options);
}

StateDerivative mol_rhs(const Discretization& disc, const State& state, const Sources& sources) {
  const ModelParams& p = disc.params;
  const int n = p.n_species;
  StateDerivative d;
  d.alpha_dot.resize(static_cast<size_t>(n));
  d.gamma_dot.resize(static_cast<size_t>(n));

  // Temperature: G beta' = -H beta + C(sum S_i grad^delta u_i) beta + load.
  {
    VecX rhs = -(disc.stiff_theta * state.beta);
    if (p.S.maxCoeff() > 0.0) {
      const Mat2X vel = combined_soret_velocity(disc, state.alpha);
      rhs += assemble_convection(disc.theta_space, vel, disc.rule) * state.beta;
    }
    if (sources.f_theta)
      rhs += assemble_load(disc.theta_space, at_time(sources.f_theta, state.t), disc.rule);
    d.beta_dot = disc.mass_theta_ldlt->solve(rhs);
    if (disc.mass_theta_ldlt->info() != Eigen::Success)
      throw SolverError("mol_rhs: mass solve failed", 0.0, "theta");
  }

  SparseMat conv_u;
  const bool dufour_active = p.F.maxCoeff() > 0.0;
  if (dufour_active) {
    const Mat2X grad_theta = disc.moll_theta->apply(state.beta);
    conv_u = assemble_convection(disc.u_space, grad_theta, disc.rule);
  }

  const std::vector<VecX> rates = smoluchowski_rates(p, state.alpha);
  for (int i = 0; i < n; ++i) {
    const VecX& a = state.alpha[static_cast<size_t>(i)];
    const VecX& g = state.gamma[static_cast<size_t>(i)];
    VecX rhs = -(disc.stiff_u[static_cast<size_t>(i)] * a);
    if (dufour_active && p.F[i] != 0.0) rhs += p.F[i] * (conv_u * a);
    const TimeField fu = field_or_null(sources.f_u, i);
    if (fu) rhs += assemble_load(disc.u_space, at_time(fu, state.t), disc.rule);
    VecX adot = disc.mass_u_ldlt->solve(rhs);
    if (disc.mass_u_ldlt->info() != Eigen::Success)
      throw SolverError("mol_rhs: mass solve failed", 0.0, "u_" + std::to_string(i + 1));
    adot += -p.A[i] * a + p.B[i] * g + rates[static_cast<size_t>(i)];
    d.alpha_dot[static_cast<size_t>(i)] = std::move(adot);

    VecX gdot = p.A[i] * a - p.B[i] * g;
    const TimeField fv = field_or_null(sources.f_v, i);
    if (fv) gdot += interpolate(disc.u_space, at_time(fv, state.t));
    d.gamma_dot[static_cast<size_t>(i)] = std::move(gdot);
  }
  return d;
}

namespace {

State axpy(const State& s, double c, const StateDerivative& d, double t) {
  State out;
  out.t = t;
  out.beta = s.beta + c * d.beta_dot;
  out.alpha.resize(s.alpha.size());
  out.gamma.resize(s.gamma.size());
  for (size_t i = 0; i < s.alpha.size(); ++i) {
    out.alpha[i] = s.alpha[i] + c * d.alpha_dot[i];
    out.gamma[i] = s.gamma[i] + c * d.gamma_dot[i];
  }
  return out;
}

double state_max_norm(const State& s) {
  double m = s.beta.size() > 0 ? s.beta.cwiseAbs().maxCoeff() : 0.0;
  for (const auto& a : s.alpha)
    if (a.size() > 0) m = std::max(m, a.cwiseAbs().maxCoeff());
  for (const auto& g : s.gamma)
    if (g.size() > 0) m = std::max(m, g.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

State integrate_mol_rk4(const Discretization& disc, const State& initial, double tau_ode,
                        double t_end, const Sources& sources) {
  if (!(tau_ode > 0.0)) throw std::invalid_argument("integrate_mol_rk4: tau_ode must be positive");
  const double bound = 1e6 * std::max(1.0, state_max_norm(initial));

  State s = initial;
  const int n_steps = std::max(1, static_cast<int>(std::ceil((t_end - s.t) / tau_ode - 1e-9)));
  for (int k = 0; k < n_steps; ++k) {
    const double h = (k + 1 == n_steps) ? t_end - s.t : tau_ode;
    const StateDerivative k1 = mol_rhs(disc, s, sources);
    const StateDerivative k2 = mol_rhs(disc, axpy(s, 0.5 * h, k1, s.t + 0.5 * h), sources);
    const StateDerivative k3 = mol_rhs(disc, axpy(s, 0.5 * h, k2, s.t + 0.5 * h), sources);
    const StateDerivative k4 = mol_rhs(disc, axpy(s, h, k3, s.t + h), sources);

    State next = s;
    next.t = (k + 1 == n_steps) ? t_end : s.t + h;
    next.beta += (h / 6.0) * (k1.beta_dot + 2.0 * k2.beta_dot + 2.0 * k3.beta_dot + k4.beta_dot);
    for (size_t i = 0; i < s.alpha.size(); ++i) {
      next.alpha[i] += (h / 6.0) * (k1.alpha_dot[i] + 2.0 * k2.alpha_dot[i] +
                                    2.0 * k3.alpha_dot[i] + k4.alpha_dot[i]);
      next.gamma[i] += (h / 6.0) * (k1.gamma_dot[i] + 2.0 * k2.gamma_dot[i] +
                                    2.0 * k3.gamma_dot[i] + k4.gamma_dot[i]);
    }
    s = std::move(next);

    if (!s.all_finite() || state_max_norm(s) > bound)
      throw DivergenceError("integrate_mol_rk4: blow-up detected at t = " + std::to_string(s.t));
  }
  return s;
}

}  // namespace thermidor
