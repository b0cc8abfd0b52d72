#pragma once

#include "simpl/field.hpp"
#include "simpl/polytope.hpp"

namespace simpl {

/// Global linear constraints  integral(W eta) <= b  (componentwise). Rows of W
/// are per-unit-area weights; b is in area units. A ">=" constraint is
/// expressed by negating its row and bound.
class GlobalConstraints {
 public:
  GlobalConstraints() = default;
  /// No constraints for an n-channel design.
  explicit GlobalConstraints(int dim);
  GlobalConstraints(Matrix weights, Vector bounds);

  int count() const noexcept { return static_cast<int>(weights_.rows()); }
  int dim() const noexcept { return static_cast<int>(weights_.cols()); }
  const Matrix& weights() const noexcept { return weights_; }
  const Vector& bounds() const noexcept { return bounds_; }

 private:
  Matrix weights_;
  Vector bounds_;
};

struct ProjectionOptions {
  double tol = 1e-10;    // absolute, in integral(W eta) units
  int max_sweeps = 500;  // Bregman-Dykstra sweeps (several constraints)
};

struct ProjectionResult {
  CellField psi;     // projected latent psi_half - W^T mu
  Vector mu;         // multipliers, >= 0
  Vector violation;  // integral(W eta) - b after projection
  int sweeps = 0;
  int evaluations = 0;  // evaluations of the constraint map
};

/// integral W gradient_map(psi) dx.
Vector constraint_values(const Polytope& polytope, const CellField& psi, const GlobalConstraints& constraints);
/// Same for a raw weight matrix (no row validation).
Vector constraint_values(const Polytope& polytope, const CellField& psi, const Matrix& weights);

/// Bregman projection onto one half-space  integral(w . eta) <= b. The
/// multiplier solves h(mu) = b for the nonincreasing h(mu) =
/// integral w . gradient_map(psi_half - mu w) by the Illinois variant of
/// regula falsi on a bracket grown geometrically from [0, 1].
/// Throws Infeasible if no sign change is found below mu = 2^60.
ProjectionResult project_single(const Polytope& polytope, const CellField& psi_half, const Vector& w, double b,
                                double tol = 1e-10);

/// Joint Bregman projection onto all constraints by cyclic Bregman-Dykstra
/// sweeps. Each step releases the stored correction of constraint i and
/// re-solves the single half-space problem for it, so mu_i can move back
/// towards zero. Throws NonConvergence (data = final violations) after
/// `max_sweeps`.
ProjectionResult project_multi(const Polytope& polytope, const CellField& psi_half,
                               const GlobalConstraints& constraints, double tol = 1e-10, int max_sweeps = 500);

/// Dispatches on the constraint count (none, one, several).
ProjectionResult bregman_project(const Polytope& polytope, const CellField& psi_half,
                                 const GlobalConstraints& constraints, const ProjectionOptions& options = {});

/// g(mu) = -integral R*(psi_half - W^T mu) dx - mu . b, concave in mu.
double dual_objective(const Polytope& polytope, const CellField& psi_half, const GlobalConstraints& constraints,
                      const Vector& mu);

}  // namespace simpl
