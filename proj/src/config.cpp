#include "thermidor/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "thermidor/errors.hpp"

namespace thermidor {

namespace {

struct RawValue {
  std::string text;
  int line = 0;
};

using Section = std::map<std::string, RawValue>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const RawValue& v, const std::string& key) {
  try {
    size_t pos = 0;
    const double out = std::stod(v.text, &pos);
    if (pos != v.text.size()) throw std::invalid_argument("");
    return out;
  } catch (...) {
    throw ConfigError("line " + std::to_string(v.line) + ": key '" + key +
                          "' expects a number, got '" + v.text + "'",
                      v.line);
  }
}

int parse_int(const RawValue& v, const std::string& key) {
  const double d = parse_double(v, key);
  if (d != std::floor(d))
    throw ConfigError("line " + std::to_string(v.line) + ": key '" + key + "' expects an integer",
                      v.line);
  return static_cast<int>(d);
}

std::vector<double> parse_list(const RawValue& v, const std::string& key) {
  std::istringstream in(v.text);
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    try {
      size_t pos = 0;
      out.push_back(std::stod(token, &pos));
      if (pos != token.size()) throw std::invalid_argument("");
    } catch (...) {
      throw ConfigError("line " + std::to_string(v.line) + ": key '" + key +
                            "' expects numbers, got '" + token + "'",
                        v.line);
    }
  }
  if (out.empty())
    throw ConfigError("line " + std::to_string(v.line) + ": key '" + key + "' is empty", v.line);
  return out;
}

VecX broadcast(const std::vector<double>& values, int n, const std::string& key, int line) {
  if (static_cast<int>(values.size()) == n)
    return Eigen::Map<const VecX>(values.data(), n);
  if (values.size() == 1) return VecX::Constant(n, values[0]);
  throw ConfigError("line " + std::to_string(line) + ": key '" + key + "' needs 1 or " +
                        std::to_string(n) + " values",
                    line);
}

const std::map<std::string, std::vector<std::string>> kSchema = {
    {"mesh", {"nx", "ny", "x0", "y0", "x1", "y1"}},
    {"params", {"n_species", "K", "D", "S", "F", "A", "B", "beta", "delta"}},
    {"time", {"tau", "t_end"}},
    {"initial", {"preset", "theta0", "u0", "v0"}},
    {"study", {"levels", "base_nx", "tau_coeff", "nx", "tau0", "seed"}},
    {"output", {"dir"}},
    {"solver", {"tol"}},
};

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  std::map<std::string, Section> sections;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed section header",
                          line_no);
      current = trim(line.substr(1, line.size() - 2));
      if (kSchema.find(current) == kSchema.end())
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown section '" +
                              current + "'",
                          line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value",
                        line_no);
    if (current.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": key outside any section",
                        line_no);
    const std::string key = trim(line.substr(0, eq));
    const auto& allowed = kSchema.at(current);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown key '" + key +
                            "' in section [" + current + "]",
                        line_no);
    sections[current][key] = {trim(line.substr(eq + 1)), line_no};
  }

  RunConfig cfg;
  auto get = [&sections](const std::string& sec, const std::string& key) -> const RawValue* {
    auto s = sections.find(sec);
    if (s == sections.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  };

  if (const auto* v = get("mesh", "nx")) cfg.mesh.nx = parse_int(*v, "nx");
  if (const auto* v = get("mesh", "ny")) cfg.mesh.ny = parse_int(*v, "ny");
  if (const auto* v = get("mesh", "x0")) cfg.mesh.domain.lo.x() = parse_double(*v, "x0");
  if (const auto* v = get("mesh", "y0")) cfg.mesh.domain.lo.y() = parse_double(*v, "y0");
  if (const auto* v = get("mesh", "x1")) cfg.mesh.domain.hi.x() = parse_double(*v, "x1");
  if (const auto* v = get("mesh", "y1")) cfg.mesh.domain.hi.y() = parse_double(*v, "y1");
  if (cfg.mesh.nx < 1 || cfg.mesh.ny < 1) throw ConfigError("mesh: nx and ny must be >= 1");
  if (cfg.mesh.domain.width() <= 0.0 || cfg.mesh.domain.height() <= 0.0)
    throw ConfigError("mesh: rectangle sides must be positive");

  int n = 2;  // default species count
  if (const auto* v = get("params", "n_species")) n = parse_int(*v, "n_species");
  if (n < 1) throw ConfigError("params: n_species must be >= 1");
  cfg.params = ModelParams::uniform(n, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.1);
  if (const auto* v = get("params", "K")) cfg.params.K = parse_double(*v, "K");
  auto species_list = [&](const char* key, VecX& target) {
    if (const auto* v = get("params", key))
      target = broadcast(parse_list(*v, key), n, key, v->line);
  };
  species_list("D", cfg.params.D);
  species_list("S", cfg.params.S);
  species_list("F", cfg.params.F);
  species_list("A", cfg.params.A);
  species_list("B", cfg.params.B);
  if (const auto* v = get("params", "beta"))
    cfg.params.beta = MatX::Constant(n, n, parse_double(*v, "beta"));
  if (const auto* v = get("params", "delta")) cfg.params.delta = parse_double(*v, "delta");
  try {
    validate_params(cfg.params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(e.what()) +
                      " -- admissibility requires 0 < m <= K <= M and 0 < m <= D_i <= M "
                      "with nonnegative couplings (assumption A1)");
  }

  if (const auto* v = get("time", "tau")) cfg.time.tau = parse_double(*v, "tau");
  const auto* t_end = get("time", "t_end");
  if (!t_end) throw ConfigError("time: required key 't_end' is missing");
  cfg.time.t_end = parse_double(*t_end, "t_end");
  if (!(cfg.time.tau > 0.0)) throw ConfigError("time: tau must be positive");
  if (cfg.time.t_end < 0.0) throw ConfigError("time: t_end must be nonnegative");

  if (const auto* v = get("initial", "preset")) cfg.initial.preset = v->text;
  if (cfg.initial.preset != "decoupled" && cfg.initial.preset != "mms" &&
      cfg.initial.preset != "constant")
    throw ConfigError("initial: preset must be decoupled, mms or constant, got '" +
                      cfg.initial.preset + "'");
  if (const auto* v = get("initial", "theta0")) cfg.initial.theta0 = parse_double(*v, "theta0");
  if (const auto* v = get("initial", "u0")) cfg.initial.u0 = parse_double(*v, "u0");
  if (const auto* v = get("initial", "v0")) cfg.initial.v0 = parse_double(*v, "v0");

  if (const auto* v = get("study", "levels")) cfg.study.levels = parse_int(*v, "levels");
  if (const auto* v = get("study", "base_nx")) cfg.study.base_nx = parse_int(*v, "base_nx");
  if (const auto* v = get("study", "tau_coeff")) cfg.study.tau_coeff = parse_double(*v, "tau_coeff");
  if (const auto* v = get("study", "nx")) cfg.study.nx = parse_int(*v, "nx");
  if (const auto* v = get("study", "tau0")) cfg.study.tau0 = parse_double(*v, "tau0");
  if (const auto* v = get("study", "seed"))
    cfg.study.seed = static_cast<unsigned>(parse_int(*v, "seed"));
  if (cfg.study.levels < 1) throw ConfigError("study: levels must be >= 1");
  if (cfg.study.base_nx < 1 || cfg.study.nx < 1) throw ConfigError("study: mesh sizes must be >= 1");
  if (!(cfg.study.tau_coeff > 0.0) || !(cfg.study.tau0 > 0.0))
    throw ConfigError("study: time-step parameters must be positive");

  if (const auto* v = get("output", "dir")) cfg.output_dir = v->text;
  if (const auto* v = get("solver", "tol")) cfg.solver_tol = parse_double(*v, "tol");
  if (!(cfg.solver_tol > 0.0)) throw ConfigError("solver: tol must be positive");

  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_list(const VecX& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += fmt(v[i]);
  }
  return out;
}

}  // namespace

std::string emit_config(const RunConfig& c) {
  std::ostringstream out;
  out << "[mesh]\n"
      << "nx = " << c.mesh.nx << "\n"
      << "ny = " << c.mesh.ny << "\n"
      << "x0 = " << fmt(c.mesh.domain.lo.x()) << "\n"
      << "y0 = " << fmt(c.mesh.domain.lo.y()) << "\n"
      << "x1 = " << fmt(c.mesh.domain.hi.x()) << "\n"
      << "y1 = " << fmt(c.mesh.domain.hi.y()) << "\n\n";
  out << "[params]\n"
      << "n_species = " << c.params.n_species << "\n"
      << "K = " << fmt(c.params.K) << "\n"
      << "D = " << fmt_list(c.params.D) << "\n"
      << "S = " << fmt_list(c.params.S) << "\n"
      << "F = " << fmt_list(c.params.F) << "\n"
      << "A = " << fmt_list(c.params.A) << "\n"
      << "B = " << fmt_list(c.params.B) << "\n"
      << "beta = " << fmt(c.params.beta(0, 0)) << "\n"
      << "delta = " << fmt(c.params.delta) << "\n\n";
  out << "[time]\n"
      << "tau = " << fmt(c.time.tau) << "\n"
      << "t_end = " << fmt(c.time.t_end) << "\n\n";
  out << "[initial]\n"
      << "preset = " << c.initial.preset << "\n"
      << "theta0 = " << fmt(c.initial.theta0) << "\n"
      << "u0 = " << fmt(c.initial.u0) << "\n"
      << "v0 = " << fmt(c.initial.v0) << "\n\n";
  out << "[study]\n"
      << "levels = " << c.study.levels << "\n"
      << "base_nx = " << c.study.base_nx << "\n"
      << "tau_coeff = " << fmt(c.study.tau_coeff) << "\n"
      << "nx = " << c.study.nx << "\n"
      << "tau0 = " << fmt(c.study.tau0) << "\n"
      << "seed = " << c.study.seed << "\n\n";
  out << "[output]\n"
      << "dir = " << c.output_dir << "\n\n";
  out << "[solver]\n"
      << "tol = " << fmt(c.solver_tol) << "\n";
  return out.str();
}

}  // namespace thermidor
