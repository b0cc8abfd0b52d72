#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "simpl/error.hpp"
#include "simpl/field.hpp"
#include "simpl/polytope.hpp"
#include "simpl/projection.hpp"

namespace simpl {

/// Objective value and its L2-primal gradient representative.
struct Evaluation {
  double value = 0.0;
  CellField gradient;
};

using Objective = std::function<Evaluation(const CellField& eta)>;

struct OptOptions {
  double c1 = 1e-4;
  double tol_abs = 0.0;
  double tol_rel = 1e-4;
  double alpha0 = 1.0;
  double alpha_min = 1e-12;
  double alpha_max = 1e12;
  int max_iters = 200;
  int max_backtracks = 20;
  ProjectionOptions projection;

  /// Throws InvalidArgument when an option is out of range.
  void validate() const;
};

struct IterationRecord {
  int k = 0;
  double value = 0.0;     // F(eta^{k+1})
  double residual = 0.0;  // res_k
  double alpha = 0.0;     // accepted step size
  int backtracks = 0;
  bool backtracks_exhausted = false;
  double alpha_proposed = 0.0;  // before backtracking
  Vector mu;
  Vector constraint_values;
  double min_log_barycentric = 0.0;
};

struct OptHistory {
  double initial_value = 0.0;  // F(eta^0) after the initial projection
  Vector initial_constraint_values;
  std::vector<IterationRecord> records;

  /// `k,F,res,alpha,backtracks,mu_1..mu_r,c_1..c_r`, 17 significant digits.
  void write_csv(std::ostream& out) const;
};

enum class StopReason { Tolerance, MaxIterations };

struct RunResult {
  CellField eta;
  CellField psi;
  double value = 0.0;
  OptHistory history;
  StopReason reason = StopReason::MaxIterations;
};

/// Failure inside the loop; the history up to the failing iteration is kept.
class RunAborted : public Error {
 public:
  RunAborted(const Error& cause, OptHistory history);
  const OptHistory& history() const noexcept { return history_; }

 private:
  OptHistory history_;
};

/// Generalized Barzilai-Borwein step |int(d_eta . d_psi)| / |int(d_eta . d_grad)|,
/// clamped to [alpha_min, alpha_max]; alpha_max when the denominator vanishes.
double gbb_step(const CellField& eta_k, const CellField& eta_km1, const CellField& psi_k, const CellField& psi_km1,
                const CellField& g_k, const CellField& g_km1, double alpha_min = 1e-12, double alpha_max = 1e12);

/// F_new <= F_old + c1 * integral(g_k . (eta_new - eta_k)).
bool armijo_accept(double f_new, double f_old, const CellField& g_k, const CellField& eta_new,
                   const CellField& eta_k, double c1);

/// Called after each accepted iteration with the new design and latent.
using IterateObserver = std::function<void(const IterationRecord&, const CellField& eta, const CellField& psi)>;

/// Projected mirror descent with latent variable: gradient step on psi,
/// Bregman projection back onto the global constraints, Armijo backtracking,
/// and the vertex-gap residual as stopping test.
///
/// psi0 is projected onto the constraints before the first iteration so
/// that every recorded design is feasible.
RunResult simpl_run(const Objective& objective, const Polytope& polytope, const GlobalConstraints& constraints,
                    const CellField& psi0, const OptOptions& options, const IterateObserver& observer = {});

}  // namespace simpl
