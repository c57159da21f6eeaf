#pragma once

#include <string>

#include "thermidor/physics.hpp"
#include "thermidor/types.hpp"

namespace thermidor {

struct MeshConfig {
  int nx = 8;
  int ny = 8;
  Rect domain = unit_square();
};

struct TimeConfig {
  double tau = 1e-2;
  double t_end = 0.0;  // required key
};

struct InitialConfig {
  std::string preset = "decoupled";  // decoupled | mms | constant
  double theta0 = 1.0;               // constants for the "constant" preset
  double u0 = 0.0;
  double v0 = 0.0;
};

struct StudyConfig {
  int levels = 4;
  int base_nx = 8;          // space/coupled studies: nx doubles per level
  double tau_coeff = 0.25;  // space/coupled studies: tau = tau_coeff * h^2
  int nx = 64;              // time study: fixed mesh
  double tau0 = 0.1;        // time study: tau0, tau0/2, ...
  unsigned seed = 1234;
};

/// Fully validated run configuration; the coagulation kernel is constant
/// (one scalar fills the matrix).
struct RunConfig {
  MeshConfig mesh;
  ModelParams params = ModelParams::uniform(2, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.1);
  TimeConfig time;
  InitialConfig initial;
  StudyConfig study;
  std::string output_dir = "out";
  double solver_tol = 1e-10;
};

/// Strict key = value parser with [section] headers and '#' comments.
/// Unknown sections/keys and admissibility violations raise ConfigError
/// with the offending line or key named.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");

/// Canonical rendering; parse(emit(parse(f))) reproduces the same config.
std::string emit_config(const RunConfig& config);

}  // namespace thermidor
