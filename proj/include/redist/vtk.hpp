#pragma once

// Legacy ASCII VTK output: P1 fields on the mesh as an unstructured grid and
// the reconstructed interface as polydata.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "redist/cutfem.hpp"
#include "redist/mesh.hpp"

namespace redist {

struct NamedField {
  std::string name;
  std::span<const double> values;
};

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  return out;
}

template <int Dim>
void write_point(std::ostream& out, const Point<Dim>& p) {
  for (int k = 0; k < 3; ++k) out << (k ? " " : "") << (k < Dim ? p[k] : 0.0);
  out << '\n';
}

constexpr int vtk_cell_type(int dim) {
  // VTK_LINE, VTK_TRIANGLE, VTK_TETRA
  return dim == 1 ? 3 : (dim == 2 ? 5 : 10);
}

}  // namespace detail

/// Writes the mesh and any number of vertex fields.
template <int Dim>
void write_vtk(const std::filesystem::path& path, const Mesh<Dim>& mesh, const std::vector<NamedField>& fields,
               const std::string& title = "redist") {
  for (const auto& f : fields)
    if (f.values.size() != mesh.num_vertices())
      throw std::invalid_argument("field '" + f.name + "' does not match the mesh");

  auto out = detail::open_output(path);
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& p : mesh.vertices()) detail::write_point<Dim>(out, p);

  const std::size_t nc = mesh.num_cells();
  out << "CELLS " << nc << ' ' << nc * (Dim + 2) << '\n';
  for (const auto& cell : mesh.cells()) {
    out << Dim + 1;
    for (Index v : cell) out << ' ' << v;
    out << '\n';
  }
  out << "CELL_TYPES " << nc << '\n';
  for (std::size_t c = 0; c < nc; ++c) out << detail::vtk_cell_type(Dim) << '\n';

  if (!fields.empty()) {
    out << "POINT_DATA " << mesh.num_vertices() << '\n';
    for (const auto& f : fields) {
      out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : f.values) out << v << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// Interface facets: vertices (1D), line segments (2D) or triangles (3D).
template <int Dim>
void write_interface_vtk(const std::filesystem::path& path, const CutInterface<Dim>& iface) {
  auto out = detail::open_output(path);
  out << "# vtk DataFile Version 3.0\ninterface\nASCII\nDATASET POLYDATA\n";
  const std::size_t nf = iface.facets.size();
  out << "POINTS " << nf * Dim << " double\n";
  for (const auto& f : iface.facets)
    for (const auto& p : f.vertices) detail::write_point<Dim>(out, p);

  const char* kind = Dim == 1 ? "VERTICES" : (Dim == 2 ? "LINES" : "POLYGONS");
  out << kind << ' ' << nf << ' ' << nf * (Dim + 1) << '\n';
  for (std::size_t i = 0; i < nf; ++i) {
    out << Dim;
    for (int k = 0; k < Dim; ++k) out << ' ' << i * Dim + k;
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace redist
