#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "simpl/fem.hpp"
#include "simpl/field.hpp"
#include "simpl/materials.hpp"
#include "simpl/optimizer.hpp"
#include "simpl/polytope.hpp"
#include "simpl/projection.hpp"

namespace simpl {

inline constexpr const char* kIsotropicCantilever = "isotropic_cantilever_2d";
inline constexpr const char* kOrthotropicCantilever = "orthotropic_cantilever_2d";

/// Cantilever on (0, lx) x (0, ly), clamped on the left edge, loaded by a
/// body force on a small disc near the right edge. Unset optional fields take
/// the benchmark defaults of the selected problem.
struct ProblemConfig {
  std::string name = kIsotropicCantilever;
  double lx = 3.0;
  double ly = 1.0;
  int nx = 96;
  int ny = 32;
  double filter_epsilon = 0.06 / (2.0 * 1.7320508075688772);
  std::array<double, 2> load_center{2.9, 0.5};
  double load_radius = 0.05;
  std::array<double, 2> load_vector{0.0, -1.0};
  BoundarySelector gamma_d{true, false, false, false};
  BoundarySelector gamma_f{false, false, true, true};

  std::string polytope_file;      // replaces the built-in polytope
  std::optional<Matrix> weights;  // replaces the built-in constraint rows
  std::optional<Vector> bounds;

  // Isotropic stack; bounds on phases 2..4 in absolute area units.
  std::vector<double> youngs{1e-6, 1.0, 3.0, 5.0};
  double nu = 0.3;
  std::optional<double> p;  // 3 (isotropic) or 4 (orthotropic) when unset
  std::vector<double> phase_bounds{0.18, 0.36, 0.36};

  // Orthotropic material; void occupies at least this fraction of the area.
  double ex = 5.0;
  double ey = 0.5;
  double nu_xy = 0.3;
  double void_fraction = 0.3;
  double floor_scale = 1e-6;
  int num_angles = 8;

  std::optional<Vector> initial_latent;  // constant psi0
  std::string initial_latent_file;       // per-cell psi0, one row per cell

  /// Throws Config on out-of-range values (independent of the polytope).
  void validate() const;
};

/// A benchmark instance: the design set, the constraints, the initial
/// latent field, and the compliance objective.
class Problem {
 public:
  Problem(const ProblemConfig& cfg, Polytope polytope, GlobalConstraints constraints,
          std::shared_ptr<const MaterialLaw> law);

  const std::string& name() const noexcept { return name_; }
  const Mesh& mesh() const noexcept { return mesh_; }
  const Polytope& polytope() const noexcept { return polytope_; }
  const GlobalConstraints& constraints() const noexcept { return constraints_; }
  const CellField& psi0() const noexcept { return psi0_; }
  const FilterOperator& filter() const noexcept { return *filter_; }
  const MaterialLaw& law() const noexcept { return *law_; }
  const std::vector<double>& load() const noexcept { return load_; }
  const std::vector<std::size_t>& load_cells() const noexcept { return load_cells_; }
  const BoundarySelector& gamma_d() const noexcept { return gamma_d_; }

  ComplianceResult evaluate(const CellField& eta) const;
  /// Compliance and gradient as an optimizer callback. The closure shares
  /// ownership of the operators, so it may outlive this object.
  Objective objective() const;

  void set_psi0(CellField psi0);

 private:
  std::string name_;
  Mesh mesh_;
  Polytope polytope_;
  GlobalConstraints constraints_;
  CellField psi0_;
  std::shared_ptr<const FilterOperator> filter_;
  std::shared_ptr<const MaterialLaw> law_;
  std::vector<double> load_;
  std::vector<std::size_t> load_cells_;
  BoundarySelector gamma_d_;
};

Problem build_isotropic_cantilever(const ProblemConfig& cfg);
Problem build_orthotropic_cantilever(const ProblemConfig& cfg);
/// Dispatches on cfg.name; throws Config for an unknown name.
Problem build_problem(const ProblemConfig& cfg);

/// Checks that the constraints admit a strictly interior design. The
/// centroid design is tried first; otherwise the centroid latent is
/// projected onto slightly tightened constraints on a one-cell domain of
/// the same area. Throws Infeasible (data = constraint slacks) on failure.
void check_strict_feasibility(const Polytope& polytope, const GlobalConstraints& constraints, double area);

/// Per-cell latent file: one line per cell (row-major, x fastest) with
/// `channels` whitespace-separated values; '#' comments allowed.
CellField read_latent_file(const std::string& path, const Mesh& mesh, int channels);

}  // namespace simpl
