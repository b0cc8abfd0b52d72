#include "simpl/export.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "simpl/error.hpp"

namespace simpl {

void write_vtk(std::ostream& out, const Mesh& mesh, const std::vector<NamedCellField>& cells,
               const std::vector<NamedNodalField>& nodes) {
  out << "# vtk DataFile Version 3.0\n"
      << "simpl design fields\n"
      << "ASCII\n"
      << "DATASET STRUCTURED_POINTS\n"
      << "DIMENSIONS " << mesh.nx() + 1 << ' ' << mesh.ny() + 1 << " 1\n"
      << std::setprecision(17) << "ORIGIN 0 0 0\n"
      << "SPACING " << mesh.hx() << ' ' << mesh.hy() << " 1\n";
  if (!cells.empty()) {
    out << "CELL_DATA " << mesh.cell_count() << '\n';
    for (const auto& [name, field] : cells) {
      if (!(field->mesh() == mesh)) fail(ErrorCode::InvalidArgument, "write_vtk: mesh mismatch for " + name);
      for (int c = 0; c < field->channels(); ++c) {
        out << "SCALARS " << name << '_' << c + 1 << " double 1\nLOOKUP_TABLE default\n";
        for (std::size_t e = 0; e < field->size(); ++e) out << (*field)(e, c) << '\n';
      }
    }
  }
  if (!nodes.empty()) {
    out << "POINT_DATA " << mesh.node_count() << '\n';
    for (const auto& named : nodes) {
      const NodalField& f = *named.field;
      if (!(f.mesh() == mesh)) fail(ErrorCode::InvalidArgument, "write_vtk: mesh mismatch for " + named.name);
      if (named.as_vector) {
        if (f.channels() != 2) fail(ErrorCode::InvalidArgument, "write_vtk: vector field needs 2 channels");
        out << "VECTORS " << named.name << " double\n";
        for (std::size_t v = 0; v < f.size(); ++v) out << f(v, 0) << ' ' << f(v, 1) << " 0\n";
        continue;
      }
      for (int c = 0; c < f.channels(); ++c) {
        out << "SCALARS " << named.name << '_' << c + 1 << " double 1\nLOOKUP_TABLE default\n";
        for (std::size_t v = 0; v < f.size(); ++v) out << f(v, c) << '\n';
      }
    }
  }
}

void write_pgm(std::ostream& out, const CellField& field, int channel) {
  if (channel < 0 || channel >= field.channels()) fail(ErrorCode::InvalidArgument, "write_pgm: bad channel");
  const Mesh& mesh = field.mesh();
  double lo = field(0, channel);
  double hi = lo;
  for (std::size_t e = 0; e < field.size(); ++e) {
    lo = std::min(lo, field(e, channel));
    hi = std::max(hi, field(e, channel));
  }
  const double span = hi - lo;
  out << "P5\n" << std::setprecision(17) << "# min=" << lo << " max=" << hi << '\n'
      << mesh.nx() << ' ' << mesh.ny() << "\n255\n";
  for (int j = mesh.ny() - 1; j >= 0; --j) {
    for (int i = 0; i < mesh.nx(); ++i) {
      const double v = field(mesh.cell_index(i, j), channel);
      const double t = span > 0.0 ? (v - lo) / span : 0.0;
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)))));
    }
  }
}

void write_vtk_file(const std::string& path, const Mesh& mesh, const std::vector<NamedCellField>& cells,
                    const std::vector<NamedNodalField>& nodes) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  write_vtk(out, mesh, cells, nodes);
  if (!out) fail(ErrorCode::Io, "failed writing " + path);
}

void write_pgm_file(const std::string& path, const CellField& field, int channel) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  write_pgm(out, field, channel);
  if (!out) fail(ErrorCode::Io, "failed writing " + path);
}

}  // namespace simpl
