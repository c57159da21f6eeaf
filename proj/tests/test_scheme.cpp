#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "oracles.hpp"
#include "thermidor/errors.hpp"
#include "thermidor/scheme.hpp"

using namespace thermidor;

namespace {

State zero_species_state(const Discretization& disc, const VecX& beta) {
  State s;
  s.t = 0.0;
  s.beta = beta;
  s.alpha.assign(static_cast<size_t>(disc.params.n_species), VecX::Zero(disc.u_space.n_dofs));
  s.gamma.assign(static_cast<size_t>(disc.params.n_species), VecX::Zero(disc.u_space.n_dofs));
  return s;
}

}  // namespace

TEST_SUITE("scheme") {

TEST_CASE("one step on the Neumann eigenmode matches backward Euler") {
  const double tau = 0.01;
  const double factor = 1.0 / (1.0 + tau * 2.0 * M_PI * M_PI);
  std::vector<double> defects;
  for (int nx : {16, 32}) {
    const Mesh mesh = build_structured_mesh(nx, nx);
    const ModelParams p = ModelParams::uniform(1, 1.0, 1.0, 0, 0, 0, 1.0, 0, 0.1);
    const Discretization disc = make_discretization(mesh, p);
    const State s = zero_species_state(disc, interpolate(disc.theta_space, [](const Vec2& x) {
                                         return std::cos(M_PI * x.x()) * std::cos(M_PI * x.y());
                                       }));
    const auto [next, report] = advance_step(disc, s, tau);
    defects.push_back((next.beta - factor * s.beta).cwiseAbs().maxCoeff());
    CHECK(defects.back() <= 2.0 * mesh.h * mesh.h);
    CHECK(report.solves.front().residual <= 1e-10);
  }
  CHECK(defects[0] > defects[1]);
}

TEST_CASE("constant temperature is a fixed point, exactly") {
  const Mesh mesh = build_structured_mesh(12, 12);
  const ModelParams p = ModelParams::uniform(2, 1.0, 0.5, 0.4, 0.3, 1.0, 1.0, 1.0, 0.25);
  const Discretization disc = make_discretization(mesh, p);

  State s;
  s.t = 0.0;
  s.beta = VecX::Constant(disc.theta_space.n_dofs, 2.5);
  s.alpha.assign(2, interpolate(disc.u_space, [](const Vec2& x) {
                   return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y());
                 }));
  s.gamma.assign(2, VecX::Constant(disc.u_space.n_dofs, 0.3));

  const auto [next, report] = advance_step(disc, s, 0.01);
  CHECK(next.beta == s.beta);
}

TEST_CASE("zero species state is invariant; deposited mass decays geometrically") {
  const Mesh mesh = build_structured_mesh(8, 8);
  const ModelParams p = ModelParams::uniform(2, 1.0, 1.0, 0, 0, 0.7, 1.3, 1.0, 0.1);
  const Discretization disc = make_discretization(mesh, p);

  SUBCASE("u = v = 0 stays exactly zero") {
    State s = zero_species_state(disc, interpolate(disc.theta_space, [](const Vec2& x) {
                                   return 1.0 + x.x() * x.y();
                                 }));
    for (int k = 0; k < 5; ++k) {
      auto [next, report] = advance_step(disc, s, 0.05);
      s = std::move(next);
      for (const auto& a : s.alpha) CHECK(a.cwiseAbs().maxCoeff() == 0.0);
      for (const auto& g : s.gamma) CHECK(g.cwiseAbs().maxCoeff() == 0.0);
    }
  }

  SUBCASE("A = 0: v decays by 1/(1+tau B) per step regardless of the rest") {
    ModelParams p0 = p;
    p0.A.setZero();
    const Discretization disc0 = make_discretization(mesh, p0);
    State s = zero_species_state(disc0, VecX::Constant(disc0.theta_space.n_dofs, 1.0));
    s.alpha.assign(2, interpolate(disc0.u_space, [](const Vec2& x) {
                     return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y());
                   }));
    s.gamma.assign(2, VecX::Constant(disc0.u_space.n_dofs, 2.0));
    const double tau = 0.1;
    const int steps = 6;
    VecX expected = s.gamma[0];
    for (int k = 0; k < steps; ++k) expected /= 1.0 + tau * p0.B[0];
    for (int k = 0; k < steps; ++k) {
      auto [next, report] = advance_step(disc0, s, tau);
      s = std::move(next);
    }
    CHECK((s.gamma[0] - expected).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("nodewise deposition ODE follows the matrix exponential at O(tau)") {
  // Diffusion coefficients made negligible: the species/deposit pair then
  // evolves as independent nodal 2x2 linear systems.
  const Mesh mesh = build_structured_mesh(6, 6);
  ModelParams p = ModelParams::uniform(1, 1e-12, 1e-12, 0, 0, 1.0, 0.5, 0.0, 0.1);
  const Discretization disc = make_discretization(mesh, p);

  auto u0 = [](const Vec2& x) { return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()); };
  auto v0 = [](const Vec2& x) { return 0.5 * std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()); };
  InitialData init;
  init.theta0 = [](const Vec2&) { return 0.0; };
  init.u0 = {u0};
  init.v0 = {v0};

  const double T = 0.5;
  std::vector<double> errs;
  for (double tau : {0.02, 0.01, 0.005}) {
    const RunResult run = run_simulation(disc, init, tau, T);
    double worst = 0.0;
    for (int j = 0; j < disc.u_space.n_dofs; ++j) {
      const Vec2 x = mesh.vertex(disc.u_space.vertex_of_dof[j]);
      const Eigen::Vector2d exact = oracles::node_ode_exact(p.A[0], p.B[0], u0(x), v0(x), T);
      worst = std::max(worst, std::abs(run.final_state.alpha[0][j] - exact[0]));
      worst = std::max(worst, std::abs(run.final_state.gamma[0][j] - exact[1]));
    }
    errs.push_back(worst);
  }
  CHECK(oracles::eoc(errs[0], errs[1]) == doctest::Approx(1.0).epsilon(0.15));
  CHECK(oracles::eoc(errs[1], errs[2]) == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("t_end = 0 returns the interpolated initial data") {
  const Mesh mesh = build_structured_mesh(4, 4);
  const ModelParams p = ModelParams::uniform(1, 1.0, 1.0, 0, 0, 1.0, 1.0, 1.0, 0.1);
  const Discretization disc = make_discretization(mesh, p);
  InitialData init;
  init.theta0 = [](const Vec2& x) { return x.x() + 2.0 * x.y(); };
  init.u0 = {[](const Vec2& x) { return x.x() * (1.0 - x.x()); }};
  init.v0 = {[](const Vec2&) { return 0.25; }};
  const RunResult run = run_simulation(disc, init, 0.1, 0.0);
  CHECK(run.reports.empty());
  CHECK(run.final_state.t == 0.0);
  CHECK(run.final_state.beta == interpolate(disc.theta_space, init.theta0));
}

TEST_CASE("last step is shortened to land exactly on t_end; observers see every step") {
  const Mesh mesh = build_structured_mesh(4, 4);
  const ModelParams p = ModelParams::uniform(1, 1.0, 1.0, 0, 0, 0, 1.0, 0, 0.1);
  const Discretization disc = make_discretization(mesh, p);
  InitialData init;
  init.theta0 = [](const Vec2&) { return 1.0; };
  init.u0 = {[](const Vec2&) { return 0.0; }};
  init.v0 = {[](const Vec2&) { return 0.0; }};

  std::vector<double> observed_times;
  const RunResult run = run_simulation(disc, init, 0.1, 0.25, {},
                                       [&](const State& s, const StepReport& rep) {
                                         observed_times.push_back(s.t);
                                         CHECK(rep.t == s.t);
                                       });
  CHECK(run.reports.size() == 3);
  CHECK(run.final_state.t == 0.25);
  REQUIRE(observed_times.size() == 3);
  CHECK(observed_times[0] == doctest::Approx(0.1));
  CHECK(observed_times[1] == doctest::Approx(0.2));
  CHECK(observed_times[2] == 0.25);
}

TEST_CASE("species solve order does not matter") {
  const Mesh mesh = build_structured_mesh(8, 8);
  const ModelParams p = ModelParams::uniform(3, 1.0, 0.8, 0.3, 0.2, 1.0, 0.5, 1.0, 0.2);
  const Discretization disc = make_discretization(mesh, p);

  State s;
  s.t = 0.0;
  s.beta = interpolate(disc.theta_space,
                       [](const Vec2& x) { return 1.0 + std::cos(M_PI * x.x()); });
  for (int i = 1; i <= 3; ++i) {
    s.alpha.push_back(interpolate(disc.u_space, [i](const Vec2& x) {
      return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()) / i;
    }));
    s.gamma.push_back(VecX::Constant(disc.u_space.n_dofs, 0.1 * i));
  }

  AdvanceOptions forward, reversed;
  reversed.reverse_species_order = true;
  const auto [a, ra] = advance_step(disc, s, 0.02, {}, forward);
  const auto [b, rb] = advance_step(disc, s, 0.02, {}, reversed);
  CHECK(a.beta == b.beta);
  for (int i = 0; i < 3; ++i) {
    CHECK(a.alpha[i] == b.alpha[i]);
    CHECK(a.gamma[i] == b.gamma[i]);
  }
}

TEST_CASE("positivity monitor reports minima") {
  const Mesh mesh = build_structured_mesh(8, 8);
  const ModelParams p = ModelParams::uniform(2, 1.0, 1.0, 0, 0, 1.0, 1.0, 1.0, 0.1);
  const Discretization disc = make_discretization(mesh, p);
  InitialData init;
  init.theta0 = [](const Vec2& x) { return 1.0 + std::cos(M_PI * x.x()) * std::cos(M_PI * x.y()); };
  init.u0 = {[](const Vec2& x) { return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()); },
             [](const Vec2& x) { return 0.5 * std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()); }};
  init.v0 = {[](const Vec2&) { return 0.0; }, [](const Vec2&) { return 0.0; }};
  const RunResult run = run_simulation(disc, init, 0.02, 0.1);
  for (const auto& report : run.reports) {
    CHECK(report.min_theta >= -1e-8);
    CHECK(report.min_u.minCoeff() >= -1e-8);
    CHECK(report.min_v.minCoeff() >= -1e-8);
    CHECK(report.solves.size() == 3);  // theta + two species
  }
}

TEST_CASE("mol_rhs: zero state, mass-pencil eigenvector, difference quotient") {
  const Mesh mesh = build_structured_mesh(6, 6);
  const ModelParams p = ModelParams::uniform(1, 1.0, 1.0, 0, 0, 1.0, 1.0, 1.0, 0.1);
  const Discretization disc = make_discretization(mesh, p);

  SUBCASE("zero state has zero derivative") {
    const State s = zero_species_state(disc, VecX::Zero(disc.theta_space.n_dofs));
    const StateDerivative d = mol_rhs(disc, s);
    CHECK(d.beta_dot.cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.alpha_dot[0].cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.gamma_dot[0].cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("generalized eigenvector: beta' = -lambda beta") {
    const Eigen::MatrixXd H(disc.stiff_theta);
    const Eigen::MatrixXd G(disc.mass_theta);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(H, G);
    const int mode = 3;
    const double lambda = eig.eigenvalues()[mode];
    State s = zero_species_state(disc, eig.eigenvectors().col(mode));
    const StateDerivative d = mol_rhs(disc, s);
    CHECK((d.beta_dot + lambda * s.beta).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + lambda));
  }

  SUBCASE("central difference of the fully discrete flow matches mol_rhs") {
    const Mesh mesh4 = build_structured_mesh(4, 4);
    const ModelParams pc = ModelParams::uniform(1, 1.0, 0.8, 0.3, 0.2, 1.0, 0.5, 1.0, 0.3);
    const Discretization disc4 = make_discretization(mesh4, pc);
    InitialData init;
    init.theta0 = [](const Vec2& x) { return 1.0 + std::cos(M_PI * x.x()) * std::cos(M_PI * x.y()); };
    init.u0 = {[](const Vec2& x) { return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()); }};
    init.v0 = {[](const Vec2& x) { return 0.5 * std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()); }};

    const double t0 = 0.005, eps = 5e-4, tau = 1e-6;
    const State at = run_simulation(disc4, init, tau, t0).final_state;
    const State plus = run_simulation(disc4, init, tau, t0 + eps).final_state;
    const State minus = run_simulation(disc4, init, tau, t0 - eps).final_state;
    const StateDerivative d = mol_rhs(disc4, at);

    const VecX fd_beta = (plus.beta - minus.beta) / (2.0 * eps);
    const VecX fd_alpha = (plus.alpha[0] - minus.alpha[0]) / (2.0 * eps);
    CHECK((fd_beta - d.beta_dot).norm() / d.beta_dot.norm() <= 1e-2);
    CHECK((fd_alpha - d.alpha_dot[0]).norm() / d.alpha_dot[0].norm() <= 1e-2);
  }
}

TEST_CASE("RK4 reaches classical order on the nodal decay mode") {
  // Negligible diffusion and B = 0 reduce the species equation to the
  // scalar decay u' = -A u at every node.
  const Mesh mesh = build_structured_mesh(4, 4);
  const ModelParams p = ModelParams::uniform(1, 1.0, 1e-12, 0, 0, 1.0, 0.0, 0, 0.1);
  const Discretization disc = make_discretization(mesh, p);

  State s0 = zero_species_state(disc, VecX::Zero(disc.theta_space.n_dofs));
  s0.alpha[0] = VecX::Constant(disc.u_space.n_dofs, 1.0);

  const double T = 1.0;
  std::vector<double> errs;
  for (double tau : {0.2, 0.1, 0.05}) {
    const State end = integrate_mol_rk4(disc, s0, tau, T);
    errs.push_back(std::abs(end.alpha[0][0] - std::exp(-T)));
  }
  CHECK(oracles::eoc(errs[0], errs[1]) == doctest::Approx(4.0).epsilon(0.15));
  CHECK(oracles::eoc(errs[1], errs[2]) == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("RK4 blow-up detection") {
  // Explicit integration of the stiff heat system with a far-too-large
  // step must trip the divergence guard, not return garbage.
  const Mesh mesh = build_structured_mesh(16, 16);
  const ModelParams p = ModelParams::uniform(1, 1.0, 1.0, 0, 0, 0, 1.0, 0, 0.1);
  const Discretization disc = make_discretization(mesh, p);
  State s0 = zero_species_state(disc, interpolate(disc.theta_space, [](const Vec2& x) {
                                  return std::cos(M_PI * x.x()) * std::cos(M_PI * x.y());
                                }));
  CHECK_THROWS_AS(integrate_mol_rk4(disc, s0, 0.05, 2.0), DivergenceError);
}

}  // TEST_SUITE
