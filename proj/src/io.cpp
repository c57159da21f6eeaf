#include "thermidor/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "thermidor/errors.hpp"

namespace thermidor {

namespace {

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17e", v);
  return buf;
}

void write_nodal_scalar(std::ofstream& out, const std::string& name, const FeSpace& space,
                        const VecX& coeffs) {
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (size_t v = 0; v < space.dof_of_vertex.size(); ++v) {
    const int dof = space.dof_of_vertex[v];
    out << fmt_full(dof >= 0 ? coeffs[dof] : 0.0) << "\n";
  }
}

}  // namespace

void write_fields_vtk(const Mesh& mesh, const FeSpace& theta_space, const FeSpace& u_space,
                      const State& state, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_fields_vtk: cannot open '" + path + "'");

  out << "# vtk DataFile Version 3.0\n";
  out << "thermidor fields at t = " << fmt_full(state.t) << "\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const auto& v : mesh.vertices)
    out << fmt_full(v.x()) << " " << fmt_full(v.y()) << " 0\n";

  out << "CELLS " << mesh.n_triangles() << " " << 4 * mesh.n_triangles() << "\n";
  for (const auto& tri : mesh.triangles) out << "3 " << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
  out << "CELL_TYPES " << mesh.n_triangles() << "\n";
  for (int t = 0; t < mesh.n_triangles(); ++t) out << "5\n";

  out << "POINT_DATA " << mesh.n_vertices() << "\n";
  write_nodal_scalar(out, "theta", theta_space, state.beta);
  for (size_t i = 0; i < state.alpha.size(); ++i)
    write_nodal_scalar(out, "u_" + std::to_string(i + 1), u_space, state.alpha[i]);
  for (size_t i = 0; i < state.gamma.size(); ++i)
    write_nodal_scalar(out, "v_" + std::to_string(i + 1), u_space, state.gamma[i]);

  if (!out) throw std::runtime_error("write_fields_vtk: write failed for '" + path + "'");
}

void write_eoc_csv(const EocTable& table, const std::string& path) {
  if (table.rows.empty()) throw std::invalid_argument("write_eoc_csv: table is empty");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_eoc_csv: cannot open '" + path + "'");

  const auto names = EocTable::field_names(table.n_species);
  out << "h,tau";
  for (const auto& n : names) out << ",l2_" << n << ",h1_" << n;
  for (const auto& n : names) out << ",eoc_" << n;
  out << "\n";

  for (const auto& row : table.rows) {
    out << fmt_full(row.h) << "," << fmt_full(row.tau);
    for (size_t f = 0; f < names.size(); ++f)
      out << "," << fmt_full(row.l2[static_cast<Eigen::Index>(f)]) << ","
          << fmt_full(row.h1[static_cast<Eigen::Index>(f)]);
    for (size_t f = 0; f < names.size(); ++f) {
      const double e = row.eoc[static_cast<Eigen::Index>(f)];
      out << ",";
      if (std::isfinite(e)) out << fmt_full(e);
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write_eoc_csv: write failed for '" + path + "'");
}

EocTable read_eoc_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_eoc_csv: cannot open '" + path + "'");

  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("read_eoc_csv: empty file");

  // Infer the species count from the column layout 2 + 2 nf + nf.
  int commas = 0;
  for (char c : header) commas += c == ',';
  const int nf = (commas - 1) / 3;
  if (nf < 1 || 2 + 3 * nf != commas + 1)
    throw std::runtime_error("read_eoc_csv: unrecognized header layout");
  const int n_species = (nf - 1) / 2;

  EocTable table;
  table.n_species = n_species;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (static_cast<int>(cells.size()) < 2 + 3 * nf) cells.push_back("");

    EocRow row;
    row.h = std::stod(cells[0]);
    row.tau = std::stod(cells[1]);
    row.l2.resize(nf);
    row.h1.resize(nf);
    row.eoc.resize(nf);
    for (int f = 0; f < nf; ++f) {
      row.l2[f] = std::stod(cells[static_cast<size_t>(2 + 2 * f)]);
      row.h1[f] = std::stod(cells[static_cast<size_t>(3 + 2 * f)]);
      const std::string& e = cells[static_cast<size_t>(2 + 2 * nf + f)];
      row.eoc[f] = e.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(e);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace thermidor
