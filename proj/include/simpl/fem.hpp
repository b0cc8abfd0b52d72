#pragma once

#include <Eigen/Sparse>
#include <array>
#include <memory>
#include <span>
#include <vector>

#include "simpl/field.hpp"
#include "simpl/materials.hpp"

namespace simpl {

/// Which edges of the rectangle a boundary condition applies to.
struct BoundarySelector {
  bool left = false;    // x = 0
  bool right = false;   // x = lx
  bool bottom = false;  // y = 0
  bool top = false;     // y = ly

  bool empty() const noexcept { return !(left || right || bottom || top); }
  bool contains(const Mesh& mesh, std::size_t node) const noexcept;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Symmetric positive definite operator with Dirichlet dofs eliminated
/// symmetrically. The free-free block is factorized once at construction
/// (sparse LDL^T), or solved by Jacobi-preconditioned CG.
class SpdOperator {
 public:
  enum class Backend { Auto, Direct, ConjugateGradient };

  SpdOperator(SparseMatrix full, std::vector<bool> constrained, Backend backend = Backend::Auto);
  ~SpdOperator();
  SpdOperator(SpdOperator&&) noexcept;
  SpdOperator& operator=(SpdOperator&&) noexcept;

  std::size_t size() const noexcept { return constrained_.size(); }
  std::size_t free_count() const noexcept { return free_dofs_.size(); }
  const SparseMatrix& matrix() const noexcept { return full_; }
  const std::vector<bool>& constrained() const noexcept { return constrained_; }
  Backend backend() const noexcept { return backend_; }

  /// Solves K u = rhs on the free dofs with u = prescribed (zero when
  /// `prescribed` is empty) on the constrained ones. Entries of `rhs` at
  /// constrained dofs are ignored. Throws LinearSolve (data = relative
  /// residual) if the relative residual exceeds 1e-10.
  std::vector<double> solve(std::span<const double> rhs, std::span<const double> prescribed = {}) const;

 private:
  SparseMatrix full_;
  SparseMatrix reduced_;
  std::vector<bool> constrained_;
  std::vector<std::size_t> free_dofs_;
  Backend backend_;
  struct Factor;
  std::unique_ptr<Factor> factor_;
  Eigen::VectorXd inv_diag_;
};

/// Bilinear shape functions on the reference square [-1, 1]^2, nodes
/// counter-clockwise from (-1, -1).
std::array<double, 4> q1_shape(double xi, double eta);

/// 2 x 2 Gauss points (reference coordinates) in the order used for every
/// per-quadrature-point array.
const std::array<std::array<double, 2>, 4>& gauss_points();

/// Plane-stress Q1 element stiffness for an hx x hy rectangle with one
/// constitutive matrix per Gauss point. Dofs ordered (u_x, u_y) per node.
Eigen::Matrix<double, 8, 8> q1_element_stiffness(double hx, double hy, std::span<const Voigt3, 4> c_at_gauss);

/// Strain-displacement matrix at a reference point.
Eigen::Matrix<double, 3, 8> q1_strain_matrix(double hx, double hy, double xi, double eta);

/// Helmholtz density filter: find eta_tilde in Q1 with eta_tilde = 0 on
/// gamma_f and  eps^2 (grad eta_tilde, grad q) + (eta_tilde, q) = (eta, q).
class FilterOperator {
 public:
  FilterOperator(const Mesh& mesh, double epsilon, const BoundarySelector& gamma_f,
                 SpdOperator::Backend backend = SpdOperator::Backend::Auto);

  const Mesh& mesh() const noexcept { return mesh_; }
  double epsilon() const noexcept { return epsilon_; }
  const SpdOperator& system() const noexcept { return system_; }

  /// Channelwise (eps^2 K + M)^{-1} B eta.
  NodalField apply(const CellField& eta) const;

  /// B^T (eps^2 K + M)^{-1} s divided by the cell area: maps a nodal
  /// sensitivity (derivative with respect to nodal values) to the L2-primal
  /// gradient with respect to the cell densities.
  CellField adjoint(const NodalField& s) const;

 private:
  Mesh mesh_;
  double epsilon_;
  SpdOperator system_;
};

FilterOperator assemble_filter(const Mesh& mesh, double epsilon, const BoundarySelector& gamma_f);

/// Q1 plane-stress elasticity with u = 0 on gamma_d. `c_at_gauss` holds 4
/// matrices per cell (cell-major, Gauss order of gauss_points()). Throws
/// InvalidArgument if a constitutive matrix is indefinite.
SpdOperator assemble_elasticity(const Mesh& mesh, std::span<const Voigt3> c_at_gauss, const BoundarySelector& gamma_d,
                                SpdOperator::Backend backend = SpdOperator::Backend::Auto);

std::vector<double> solve_spd(const SpdOperator& op, std::span<const double> rhs);

/// Cells whose centroid lies in the closed disc; if none does, the single
/// cell with the nearest centroid (lowest index on ties).
std::vector<std::size_t> select_disc_cells(const Mesh& mesh, std::array<double, 2> center, double radius);

/// Consistent nodal load of a constant body force on the given cells.
std::vector<double> body_force_load(const Mesh& mesh, std::span<const std::size_t> cells,
                                    std::array<double, 2> force);

struct ComplianceResult {
  double value = 0.0;
  CellField gradient;         // L2-primal gradient with respect to eta
  NodalField filtered;        // eta_tilde
  NodalField displacement;    // 2 channels
};

/// eta -> eta_tilde -> u -> F = f . u, with the self-adjoint sensitivity
///   dF/d eta_tilde = -integral (dC/d eta_tilde) : eps(u) : eps(u) N,
/// pulled back through the filter.
ComplianceResult compliance_and_gradient(const MaterialLaw& law, const CellField& eta, const FilterOperator& filter,
                                         std::span<const double> load, const BoundarySelector& gamma_d,
                                         SpdOperator::Backend backend = SpdOperator::Backend::Auto);

}  // namespace simpl
