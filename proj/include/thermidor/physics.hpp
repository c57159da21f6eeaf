#pragma once

#include <functional>
#include <vector>

#include "thermidor/types.hpp"

namespace thermidor {

/// Transport, coupling and interaction coefficients. Species index i runs
/// from 1 to n_species; the entry for size class i sits at position i-1.
struct ModelParams {
  int n_species = 1;
  double K = 1.0;           // heat conductivity
  VecX D;                   // diffusivities
  VecX S;                   // temperature-equation coupling (Soret)
  VecX F;                   // species-equation coupling (Dufour)
  VecX A;                   // deposition rates
  VecX B;                   // release rates
  MatX beta;                // symmetric coagulation kernel, n_species^2
  double delta = 0.1;       // mollifier radius

  static ModelParams uniform(int n_species, double K, double D, double S, double F, double A,
                             double B, double beta, double delta);
};

/// Parameter admissibility: K, D strictly positive; couplings, deposition
/// rates and the kernel nonnegative; kernel symmetric; delta positive.
/// Throws std::invalid_argument naming the offending field.
void validate_params(const ModelParams& params);

struct InitialData {
  std::function<double(const Vec2&)> theta0;
  std::vector<std::function<double(const Vec2&)>> u0;
  std::vector<std::function<double(const Vec2&)>> v0;
};

/// Truncated coagulation rates at one spatial point:
/// R_i(u) = 1/2 sum_{j+k=i} beta_jk u_j u_k - u_i sum_{j<=N-i} beta_ij u_j.
/// Monomer-mass neutral: sum_i i R_i = 0.
VecX smoluchowski_rates_at(const ModelParams& params, const VecX& u);

/// Nodewise rates for N nodal vectors.
std::vector<VecX> smoluchowski_rates(const ModelParams& params, const std::vector<VecX>& u);

/// Sampled Lipschitz-constant estimate of R over the ball of the given
/// radius (diagnostic, not a bound).
double lipschitz_bound_check(const ModelParams& params, double radius, int n_samples = 20000,
                             unsigned seed = 12345);

/// Deposited-mass solution v(t) = e^{-Bt} (v0 + int_0^t A u(s) e^{Bs} ds)
/// with the integral by composite Simpson, at least panels_per_unit_time
/// panels per unit time.
double deposition_closed_form(double A, double B, const std::function<double(double)>& u_path,
                              double v0, double t, int panels_per_unit_time = 64);

struct DepositionUpdate {
  VecX v_next;
  double u_coeff;  // A / (1 + tau B), the implicit u-reaction coefficient
  double v_coeff;  // B / (1 + tau B), weight of v_curr in the u-equation source
};

/// One implicit deposition step with the v-unknown eliminated:
/// v_next = (v_curr + tau A u_next + tau v_source) / (1 + tau B).
/// The returned coefficients reproduce the coupled update inside the
/// u-equation exactly.
DepositionUpdate deposition_step_eliminate(double A, double B, double tau, const VecX& u_next,
                                           const VecX& v_curr, const VecX* v_source = nullptr);

}  // namespace thermidor
