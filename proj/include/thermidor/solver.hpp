#pragma once

#include <string>

#include "thermidor/types.hpp"

namespace thermidor {

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;
  bool used_direct = false;
};

/// Solves a square nonsingular sparse system to the requested relative
/// residual. BiCGStab with Jacobi preconditioning, direct LU fallback for
/// systems up to 2000 unknowns. Throws SolverError on failure.
/// An optional initial guess is accepted as-is when it already meets the
/// tolerance (time steppers pass the previous level).
VecX solve_linear(const SparseMat& A, const VecX& rhs, double tol = 1e-10,
                  SolveReport* report = nullptr, const std::string& tag = {},
                  const VecX* guess = nullptr);

}  // namespace thermidor
