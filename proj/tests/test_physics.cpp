#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "thermidor/physics.hpp"

using namespace thermidor;

TEST_SUITE("physics") {

TEST_CASE("parameter admissibility") {
  ModelParams p = ModelParams::uniform(2, 1.0, 0.5, 0.1, 0.1, 1.0, 1.0, 1.0, 0.1);
  CHECK_NOTHROW(validate_params(p));

  p.K = -1.0;
  CHECK_THROWS_WITH_AS(validate_params(p),
                       "params: K violates 0 < m <= K <= M (assumption A1)",
                       std::invalid_argument);
  p.K = 1.0;
  p.D[1] = 0.0;
  CHECK_THROWS_AS(validate_params(p), std::invalid_argument);
  p.D[1] = 0.5;
  p.beta(0, 1) = 2.0;  // asymmetric
  CHECK_THROWS_AS(validate_params(p), std::invalid_argument);
}

TEST_CASE("coagulation rates: hand-computed N=2 case") {
  const ModelParams p = ModelParams::uniform(2, 1, 1, 0, 0, 0, 0, 1.0, 0.1);
  VecX u(2);
  u << 2.0, 0.0;
  const VecX r = smoluchowski_rates_at(p, u);
  CHECK(r[0] == doctest::Approx(-4.0).epsilon(1e-15));
  CHECK(r[1] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("coagulation rates: zero input, N=1 truncation") {
  const ModelParams p5 = ModelParams::uniform(5, 1, 1, 0, 0, 0, 0, 1.0, 0.1);
  CHECK(smoluchowski_rates_at(p5, VecX::Zero(5)).norm() == 0.0);

  // With only one size class no pair can coagulate: R_1 = 0 identically.
  const ModelParams p1 = ModelParams::uniform(1, 1, 1, 0, 0, 0, 0, 1.0, 0.1);
  VecX u1(1);
  u1 << 3.5;
  CHECK(smoluchowski_rates_at(p1, u1)[0] == 0.0);
}

TEST_CASE("monomer mass neutrality over random states and kernels") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 2.0);
  for (int n = 1; n <= 6; ++n) {
    ModelParams p = ModelParams::uniform(n, 1, 1, 0, 0, 0, 0, 1.0, 0.1);
    for (int trial = 0; trial < 1000; ++trial) {
      if (trial % 3 == 0) {
        // Random symmetric nonnegative kernel.
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) p.beta(i, j) = p.beta(j, i) = unif(rng);
      }
      VecX u(n);
      for (int i = 0; i < n; ++i) u[i] = gauss(rng);
      const VecX r = smoluchowski_rates_at(p, u);
      double mass = 0.0;
      for (int i = 0; i < n; ++i) mass += (i + 1) * r[i];
      CHECK(std::abs(mass) <= 1e-12 * std::max(1.0, u.squaredNorm()));
    }
  }
}

TEST_CASE("nodewise evaluation matches pointwise evaluation") {
  const ModelParams p = ModelParams::uniform(3, 1, 1, 0, 0, 0, 0, 0.7, 0.1);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> gauss;
  std::vector<VecX> u(3, VecX(10));
  for (auto& ui : u)
    for (int k = 0; k < 10; ++k) ui[k] = gauss(rng);
  const auto rates = smoluchowski_rates(p, u);
  for (int node = 0; node < 10; ++node) {
    VecX point(3);
    for (int i = 0; i < 3; ++i) point[i] = u[i][node];
    const VecX r = smoluchowski_rates_at(p, point);
    for (int i = 0; i < 3; ++i) CHECK(rates[i][node] == r[i]);
  }
}

TEST_CASE("Lipschitz estimate: degenerate cases and sampled oracle") {
  ModelParams p = ModelParams::uniform(3, 1, 1, 0, 0, 0, 0, 0.0, 0.1);
  CHECK(lipschitz_bound_check(p, 1.0) == 0.0);

  const ModelParams p1 = ModelParams::uniform(1, 1, 1, 0, 0, 0, 0, 1.0, 0.1);
  CHECK(lipschitz_bound_check(p1, 1.0) == 0.0);

  // N=2, beta = 1, radius 1: compare two independent sampling runs.
  const ModelParams p2 = ModelParams::uniform(2, 1, 1, 0, 0, 0, 0, 1.0, 0.1);
  const double est = lipschitz_bound_check(p2, 1.0, 100000, 1);
  const double est2 = lipschitz_bound_check(p2, 1.0, 100000, 2);
  CHECK(est == doctest::Approx(est2).epsilon(0.05));
  CHECK(est > 0.0);
}

TEST_CASE("deposition closed form: limits and the constant-driver value") {
  auto zero = [](double) { return 0.0; };
  CHECK(deposition_closed_form(1.0, 0.7, zero, 2.0, 1.5) ==
        doctest::Approx(2.0 * std::exp(-0.7 * 1.5)).epsilon(1e-12));
  CHECK(deposition_closed_form(1.0, 1.0, zero, 3.0, 0.0) == 3.0);

  auto one = [](double) { return 1.0; };
  CHECK(deposition_closed_form(1.0, 1.0, one, 0.0, 1.0) ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-9));

  CHECK_THROWS_AS(deposition_closed_form(1.0, 1.0, one, 0.0, -0.5), std::invalid_argument);
}

TEST_CASE("deposition elimination: arithmetic, decoupled decay, positivity") {
  VecX u(1), v(1);
  u << 2.0;
  v << 1.0;
  const auto upd = deposition_step_eliminate(1.0, 1.0, 0.1, u, v);
  CHECK(upd.v_next[0] == doctest::Approx(1.2 / 1.1).epsilon(1e-15));
  CHECK(upd.u_coeff == doctest::Approx(1.0 / 1.1).epsilon(1e-15));
  CHECK(upd.v_coeff == doctest::Approx(1.0 / 1.1).epsilon(1e-15));

  // A = 0: pure geometric decay of v, independent of u.
  const auto decay = deposition_step_eliminate(0.0, 2.0, 0.25, u, v);
  CHECK(decay.v_next[0] == doctest::Approx(1.0 / 1.5).epsilon(1e-15));
  CHECK(decay.u_coeff == 0.0);

  CHECK_THROWS_AS(deposition_step_eliminate(1.0, 1.0, 0.0, u, v), std::invalid_argument);

  // Positivity is exact by the update formula.
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unif(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    VecX un(3), vc(3);
    for (int k = 0; k < 3; ++k) {
      un[k] = unif(rng);
      vc[k] = unif(rng);
    }
    const auto r = deposition_step_eliminate(unif(rng), unif(rng), 0.05 + unif(rng), un, vc);
    CHECK(r.v_next.minCoeff() >= 0.0);
  }
}

TEST_CASE("iterated implicit updates converge to the closed form at first order") {
  // Constant driver u = 1: v(t) solves v' = A - B v, fixed point A/B.
  const double A = 1.0, B = 1.0, T = 1.0;
  auto one = [](double) { return 1.0; };
  const double exact = deposition_closed_form(A, B, one, 0.0, T, 4096);

  std::vector<double> errs;
  for (double tau : {0.1, 0.05, 0.025}) {
    VecX v = VecX::Zero(1);
    const VecX u = VecX::Ones(1);
    const int steps = static_cast<int>(std::round(T / tau));
    for (int k = 0; k < steps; ++k) v = deposition_step_eliminate(A, B, tau, u, v).v_next;
    errs.push_back(std::abs(v[0] - exact));
  }
  CHECK(oracles::eoc(errs[0], errs[1]) == doctest::Approx(1.0).epsilon(0.15));
  CHECK(oracles::eoc(errs[1], errs[2]) == doctest::Approx(1.0).epsilon(0.15));

  // Long-run fixed point of the affine update is A/B.
  VecX v = VecX::Zero(1);
  const VecX u = VecX::Ones(1);
  for (int k = 0; k < 2000; ++k) v = deposition_step_eliminate(A, B, 0.05, u, v).v_next;
  CHECK(v[0] == doctest::Approx(A / B).epsilon(1e-10));
}

}  // TEST_SUITE
