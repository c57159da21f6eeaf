#include "thermidor/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "thermidor/config.hpp"
#include "thermidor/errors.hpp"
#include "thermidor/io.hpp"
#include "thermidor/verification.hpp"

namespace thermidor {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitAccuracy = 4;

std::string output_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv("THERMIDOR_OUT")) return env;
  return cfg.output_dir;
}

ManufacturedCase case_from_config(const RunConfig& cfg) {
  if (cfg.initial.preset == "decoupled") return exact_decoupled_case(cfg.params.K, cfg.params.D, cfg.params.B);
  if (cfg.initial.preset == "mms") {
    ModelParams p = cfg.params;
    return coupled_mms_case(p, make_kernel(p.delta));
  }
  throw ConfigError("initial: preset '" + cfg.initial.preset +
                    "' has no exact reference; convergence studies need decoupled or mms");
}

InitialData initial_from_config(const RunConfig& cfg) {
  if (cfg.initial.preset == "constant") {
    InitialData init;
    const double th = cfg.initial.theta0, u = cfg.initial.u0, v = cfg.initial.v0;
    init.theta0 = [th](const Vec2&) { return th; };
    for (int i = 0; i < cfg.params.n_species; ++i) {
      init.u0.push_back([u](const Vec2&) { return u; });
      init.v0.push_back([v](const Vec2&) { return v; });
    }
    return init;
  }
  return case_from_config(cfg).initial();
}

void print_table(const EocTable& table) {
  const auto names = EocTable::field_names(table.n_species);
  std::printf("%10s %12s", "h", "tau");
  for (const auto& n : names) std::printf(" %12s %8s", ("l2_" + n).c_str(), "eoc");
  std::printf("\n");
  for (const auto& row : table.rows) {
    std::printf("%10.6f %12.4e", row.h, row.tau);
    for (Eigen::Index f = 0; f < row.l2.size(); ++f) {
      std::printf(" %12.4e", row.l2[f]);
      if (std::isfinite(row.eoc[f]))
        std::printf(" %8.3f", row.eoc[f]);
      else
        std::printf(" %8s", "-");
    }
    std::printf("\n");
  }
}

int cmd_run(const RunConfig& cfg) {
  const Mesh mesh = build_structured_mesh(cfg.mesh.nx, cfg.mesh.ny, cfg.mesh.domain);
  const Discretization disc = make_discretization(mesh, cfg.params);

  InitialData init;
  Sources sources;
  if (cfg.initial.preset == "mms") {
    const ManufacturedCase mc = case_from_config(cfg);
    if (mc.prewarm) mc.prewarm(disc.quad_pts);
    init = mc.initial();
    sources = mc.sources();
  } else {
    init = initial_from_config(cfg);
  }

  AdvanceOptions options;
  options.solver_tol = cfg.solver_tol;
  const RunResult result =
      run_simulation(disc, init, cfg.time.tau, cfg.time.t_end, sources, nullptr, options);

  double min_theta = result.final_state.beta.size() ? result.final_state.beta.minCoeff() : 0.0;
  for (const auto& rep : result.reports) min_theta = std::min(min_theta, rep.min_theta);

  const std::string dir = output_dir(cfg);
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/final.vtk";
  write_fields_vtk(mesh, disc.theta_space, disc.u_space, result.final_state, path);
  std::printf("run: %zu steps to t = %g, min theta over run = %.3e\n", result.reports.size(),
              result.final_state.t, min_theta);
  std::printf("wrote %s\n", path.c_str());
  return kExitOk;
}

int cmd_converge(const RunConfig& cfg, StudyKind kind) {
  const ManufacturedCase mc = case_from_config(cfg);
  if (kind == StudyKind::time && cfg.study.tau0 > cfg.time.t_end)
    throw ConfigError("study: tau0 exceeds t_end; the time study needs at least one full step");

  StudyProtocol proto =
      kind == StudyKind::time
          ? make_time_protocol(cfg.study.nx, cfg.study.tau0, cfg.study.levels, cfg.time.t_end)
          : make_space_protocol(cfg.study.base_nx, cfg.study.levels, cfg.study.tau_coeff,
                                cfg.time.t_end);
  proto.kind = cfg.initial.preset == "mms" && kind != StudyKind::time ? StudyKind::coupled : kind;
  proto.solver_tol = cfg.solver_tol;
  proto.domain = cfg.mesh.domain;

  const EocTable table = convergence_study(mc, proto);
  print_table(table);
  if (!table.abort_reason.empty()) {
    std::fprintf(stderr, "error: study aborted: %s\n", table.abort_reason.c_str());
    return kExitSolver;
  }

  const std::string dir = output_dir(cfg);
  std::filesystem::create_directories(dir);
  const std::string path =
      dir + (kind == StudyKind::time ? "/eoc_time.csv" : "/eoc_space.csv");
  write_eoc_csv(table, path);
  std::printf("wrote %s\n", path.c_str());
  return kExitOk;
}

int cmd_mms_check(const RunConfig& cfg) {
  ModelParams p = cfg.params;
  const ManufacturedCase mc = coupled_mms_case(p, make_kernel(p.delta));
  const double residual = mms_residual_check(mc, 100, cfg.study.seed);
  std::printf("mms-check: max residual over 100 samples = %.3e (threshold 1e-08)\n", residual);
  if (residual > 1e-8)
    throw AccuracyError("mms-check: residual balance exceeds 1e-8", residual);
  return kExitOk;
}

void usage() {
  std::fprintf(stderr,
               "usage: thermidor <run|converge-space|converge-time|mms-check> <config>\n"
               "  exit codes: 0 ok, 2 config error, 3 solver error, 4 accuracy error\n");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  if (args.size() != 2) {
    usage();
    return kExitUsage;
  }
  const std::string& command = args[0];
  if (command != "run" && command != "converge-space" && command != "converge-time" &&
      command != "mms-check") {
    usage();
    return kExitUsage;
  }

  try {
    const RunConfig cfg = parse_config(args[1]);
    if (command == "run") return cmd_run(cfg);
    if (command == "converge-space") return cmd_converge(cfg, StudyKind::space);
    if (command == "converge-time") return cmd_converge(cfg, StudyKind::time);
    return cmd_mms_check(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error [config]: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error [config]: %s\n", e.what());
    return kExitConfig;
  } catch (const AccuracyError& e) {
    std::fprintf(stderr, "error [accuracy]: %s (achieved %.3e)\n", e.what(), e.achieved);
    return kExitAccuracy;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "error [solver]: %s\n", e.what());
    return kExitSolver;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error [solver]: %s\n", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
}

}  // namespace thermidor
