#include "thermidor/physics.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace thermidor {

ModelParams ModelParams::uniform(int n_species, double K, double D, double S, double F, double A,
                                 double B, double beta, double delta) {
  ModelParams p;
  p.n_species = n_species;
  p.K = K;
  p.D = VecX::Constant(n_species, D);
  p.S = VecX::Constant(n_species, S);
  p.F = VecX::Constant(n_species, F);
  p.A = VecX::Constant(n_species, A);
  p.B = VecX::Constant(n_species, B);
  p.beta = MatX::Constant(n_species, n_species, beta);
  p.delta = delta;
  return p;
}

void validate_params(const ModelParams& p) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (p.n_species < 1) fail("params: n_species must be >= 1");
  if (!(p.K > 0.0) || !std::isfinite(p.K))
    fail("params: K violates 0 < m <= K <= M (assumption A1)");
  auto check_len = [&](const VecX& v, const char* name) {
    if (v.size() != p.n_species) fail(std::string("params: ") + name + " needs one entry per species");
  };
  check_len(p.D, "D");
  check_len(p.S, "S");
  check_len(p.F, "F");
  check_len(p.A, "A");
  check_len(p.B, "B");
  for (int i = 0; i < p.n_species; ++i) {
    if (!(p.D[i] > 0.0) || !std::isfinite(p.D[i]))
      fail("params: D_" + std::to_string(i + 1) + " violates 0 < m <= D <= M (assumption A1)");
    if (p.S[i] < 0.0) fail("params: S_" + std::to_string(i + 1) + " must be nonnegative");
    if (p.F[i] < 0.0) fail("params: F_" + std::to_string(i + 1) + " must be nonnegative");
    if (p.A[i] < 0.0) fail("params: A_" + std::to_string(i + 1) + " must be nonnegative");
    if (p.B[i] < 0.0) fail("params: B_" + std::to_string(i + 1) + " must be nonnegative");
  }
  if (p.beta.rows() != p.n_species || p.beta.cols() != p.n_species)
    fail("params: beta kernel must be n_species x n_species");
  for (int i = 0; i < p.n_species; ++i)
    for (int j = 0; j < p.n_species; ++j) {
      if (p.beta(i, j) < 0.0) fail("params: beta kernel must be nonnegative");
      if (std::abs(p.beta(i, j) - p.beta(j, i)) > 0.0) fail("params: beta kernel must be symmetric");
    }
  if (!(p.delta > 0.0)) fail("params: delta must be positive");
}

VecX smoluchowski_rates_at(const ModelParams& params, const VecX& u) {
  const int n = params.n_species;
  VecX rates = VecX::Zero(n);
  for (int i = 1; i <= n; ++i) {
    double gain = 0.0;
    for (int j = 1; j < i; ++j) gain += params.beta(j - 1, i - j - 1) * u[j - 1] * u[i - j - 1];
    double loss = 0.0;
    for (int j = 1; j <= n - i; ++j) loss += params.beta(i - 1, j - 1) * u[j - 1];
    rates[i - 1] = 0.5 * gain - u[i - 1] * loss;
  }
  return rates;
}

std::vector<VecX> smoluchowski_rates(const ModelParams& params, const std::vector<VecX>& u) {
  const int n = params.n_species;
  if (static_cast<int>(u.size()) != n)
    throw std::invalid_argument("smoluchowski_rates: need one nodal vector per species");
  const Eigen::Index n_nodes = u.empty() ? 0 : u[0].size();
  std::vector<VecX> rates(static_cast<size_t>(n), VecX::Zero(n_nodes));
  VecX point(n);
  for (Eigen::Index node = 0; node < n_nodes; ++node) {
    for (int i = 0; i < n; ++i) point[i] = u[static_cast<size_t>(i)][node];
    const VecX r = smoluchowski_rates_at(params, point);
    for (int i = 0; i < n; ++i) rates[static_cast<size_t>(i)][node] = r[i];
  }
  return rates;
}

double lipschitz_bound_check(const ModelParams& params, double radius, int n_samples,
                             unsigned seed) {
  if (!(radius > 0.0)) throw std::invalid_argument("lipschitz_bound_check: radius must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = params.n_species;

  auto sample_ball = [&]() {
    VecX u(n);
    for (int i = 0; i < n; ++i) u[i] = gauss(rng);
    const double norm = u.norm();
    if (norm > 0.0) u *= radius * std::pow(unif(rng), 1.0 / n) / norm;
    return u;
  };

  double sup = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const VecX u = sample_ball();
    const VecX w = sample_ball();
    const double dist = (u - w).norm();
    if (dist < 1e-14) continue;
    const double ratio = (smoluchowski_rates_at(params, u) - smoluchowski_rates_at(params, w)).norm() / dist;
    sup = std::max(sup, ratio);
  }
  return sup;
}

double deposition_closed_form(double A, double B, const std::function<double(double)>& u_path,
                              double v0, double t, int panels_per_unit_time) {
  if (t < 0.0) throw std::invalid_argument("deposition_closed_form: t must be nonnegative");
  if (t == 0.0) return v0;

  const int panels = std::max(2, static_cast<int>(std::ceil(t * panels_per_unit_time)));
  // Composite Simpson of A u(s) e^{B(s-t)}; folding e^{-Bt} into the
  // integrand keeps the weights bounded for large B t.
  const double hs = t / (2 * panels);
  auto g = [&](double s) { return A * u_path(s) * std::exp(B * (s - t)); };
  double sum = g(0.0) + g(t);
  for (int k = 1; k < 2 * panels; ++k) sum += (k % 2 ? 4.0 : 2.0) * g(k * hs);
  return sum * hs / 3.0 + v0 * std::exp(-B * t);
}

DepositionUpdate deposition_step_eliminate(double A, double B, double tau, const VecX& u_next,
                                           const VecX& v_curr, const VecX* v_source) {
  if (!(tau > 0.0)) throw std::invalid_argument("deposition_step_eliminate: tau must be positive");
  const double denom = 1.0 + tau * B;
  DepositionUpdate upd;
  upd.v_next = (v_curr + tau * A * u_next) / denom;
  if (v_source) upd.v_next += (tau / denom) * (*v_source);
  upd.u_coeff = A / denom;
  upd.v_coeff = B / denom;
  return upd;
}

}  // namespace thermidor
