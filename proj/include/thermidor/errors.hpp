#pragma once

#include <stdexcept>
#include <string>

namespace thermidor {

// Linear solver breakdown or non-convergence; carries the best residual seen.
struct SolverError : std::runtime_error {
  double residual;
  std::string system_tag;
  SolverError(const std::string& msg, double res, std::string tag = {})
      : std::runtime_error(msg), residual(res), system_tag(std::move(tag)) {}
};

// Quadrature failed to reach the requested tolerance; carries the estimate
// actually achieved.
struct AccuracyError : std::runtime_error {
  double achieved;
  AccuracyError(const std::string& msg, double est)
      : std::runtime_error(msg), achieved(est) {}
};

// Time stepping produced non-finite or exploding state.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  int line;  // 0 when not tied to a specific line
  ConfigError(const std::string& msg, int line_no = 0)
      : std::runtime_error(msg), line(line_no) {}
};

}  // namespace thermidor
