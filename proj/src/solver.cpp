#include "thermidor/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/LU>
#include <Eigen/SparseLU>

#include "thermidor/errors.hpp"

namespace thermidor {

namespace {

double relative_residual(const SparseMat& A, const VecX& x, const VecX& rhs) {
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) return x.norm() == 0.0 ? 0.0 : (A * x).norm();
  return (A * x - rhs).norm() / bnorm;
}

}  // namespace

VecX solve_linear(const SparseMat& A, const VecX& rhs, double tol, SolveReport* report,
                  const std::string& tag, const VecX* guess) {
  if (A.rows() != A.cols() || A.rows() != rhs.size())
    throw std::invalid_argument("solve_linear: dimension mismatch");
  const int n = static_cast<int>(A.rows());

  if (rhs.norm() == 0.0) {
    if (report) *report = {0, 0.0, false};
    return VecX::Zero(n);
  }

  if (guess && guess->size() == n && relative_residual(A, *guess, rhs) <= tol) {
    if (report) *report = {0, relative_residual(A, *guess, rhs), false};
    return *guess;
  }

  Eigen::BiCGSTAB<SparseMat, Eigen::DiagonalPreconditioner<double>> krylov;
  krylov.setTolerance(tol);
  krylov.setMaxIterations(4 * n + 100);
  krylov.compute(A);
  VecX x;
  if (guess && guess->size() == n)
    x = krylov.solveWithGuess(rhs, *guess);
  else
    x = krylov.solve(rhs);
  double res = relative_residual(A, x, rhs);
  if (krylov.info() == Eigen::Success && res <= tol && x.allFinite()) {
    if (report) *report = {static_cast<int>(krylov.iterations()), res, false};
    return x;
  }

  // Direct fallback for small systems (and for saddle-point blocks where
  // Jacobi-preconditioned BiCGStab stalls).
  if (n <= 2000) {
    Eigen::MatrixXd dense(A);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(dense);
    x = lu.solve(rhs);
    res = relative_residual(A, x, rhs);
    if (res <= std::max(tol, 1e-8) && x.allFinite()) {
      if (report) *report = {0, res, true};
      return x;
    }
  } else {
    Eigen::SparseMatrix<double> col_major(A);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(col_major);
    if (lu.info() == Eigen::Success) {
      x = lu.solve(rhs);
      res = relative_residual(A, x, rhs);
      if (res <= std::max(tol, 1e-8) && x.allFinite()) {
        if (report) *report = {0, res, true};
        return x;
      }
    }
  }

  throw SolverError("solve_linear: no convergence" + (tag.empty() ? "" : " in system " + tag) +
                        ", relative residual " + std::to_string(res),
                    res, tag);
}

}  // namespace thermidor
