#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "simpl/field.hpp"

namespace simpl {

struct NamedCellField {
  std::string name;
  const CellField* field;
};

struct NamedNodalField {
  std::string name;
  const NodalField* field;
  bool as_vector = false;  // 2-channel nodal field written as VECTORS (z = 0)
};

/// Legacy-VTK ASCII STRUCTURED_POINTS. Each cell-field channel becomes a
/// SCALARS block `<name>_<c>` (1-based c) under CELL_DATA; nodal fields go
/// under POINT_DATA. Values are written with 17 significant digits.
void write_vtk(std::ostream& out, const Mesh& mesh, const std::vector<NamedCellField>& cells,
               const std::vector<NamedNodalField>& nodes = {});

/// Binary 8-bit PGM (P5) of one channel, top image row = largest y. The
/// channel range [min, max] maps linearly to [0, 255]; the range is recorded
/// in the comment line as "# min=<v> max=<v>".
void write_pgm(std::ostream& out, const CellField& field, int channel);

void write_vtk_file(const std::string& path, const Mesh& mesh, const std::vector<NamedCellField>& cells,
                    const std::vector<NamedNodalField>& nodes = {});
void write_pgm_file(const std::string& path, const CellField& field, int channel);

}  // namespace simpl
