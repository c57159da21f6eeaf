#pragma once

#include <string>

#include "thermidor/scheme.hpp"
#include "thermidor/verification.hpp"

namespace thermidor {

/// Legacy ASCII VTK unstructured grid with point scalars theta, u_1..u_N,
/// v_1..v_N; constrained boundary vertices carry value 0.
void write_fields_vtk(const Mesh& mesh, const FeSpace& theta_space, const FeSpace& u_space,
                      const State& state, const std::string& path);

/// Header + one row per refinement in full double precision; EOC cells are
/// empty where undefined (first row and zero-error fields).
void write_eoc_csv(const EocTable& table, const std::string& path);

/// Inverse of write_eoc_csv; numbers round-trip bit-exactly.
EocTable read_eoc_csv(const std::string& path);

}  // namespace thermidor
