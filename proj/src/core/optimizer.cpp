#include "simpl/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>

namespace simpl {

void OptOptions::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorCode::InvalidArgument, "optimizer option: " + what); };
  if (!(c1 > 0.0 && c1 < 1.0)) bad("c1 must lie in (0, 1)");
  if (!(tol_abs >= 0.0) || !(tol_rel >= 0.0)) bad("tolerances must be non-negative");
  if (!(alpha_min > 0.0) || !(alpha_min <= alpha0) || !(alpha0 <= alpha_max)) {
    bad("need 0 < alpha_min <= alpha0 <= alpha_max");
  }
  if (max_iters < 1) bad("max_iters must be >= 1");
  if (max_backtracks < 1) bad("max_backtracks must be >= 1");
  if (!(projection.tol > 0.0)) bad("projection tolerance must be positive");
  if (projection.max_sweeps < 1) bad("projection max_sweeps must be >= 1");
}

void OptHistory::write_csv(std::ostream& out) const {
  const Eigen::Index r = records.empty() ? initial_constraint_values.size() : records.front().mu.size();
  out << "k,F,res,alpha,backtracks";
  for (Eigen::Index i = 0; i < r; ++i) out << ",mu_" << i + 1;
  for (Eigen::Index i = 0; i < r; ++i) out << ",c_" << i + 1;
  out << '\n' << std::setprecision(17);
  for (const auto& rec : records) {
    out << rec.k << ',' << rec.value << ',' << rec.residual << ',' << rec.alpha << ',' << rec.backtracks;
    for (Eigen::Index i = 0; i < r; ++i) out << ',' << rec.mu(i);
    for (Eigen::Index i = 0; i < r; ++i) out << ',' << rec.constraint_values(i);
    out << '\n';
  }
}

RunAborted::RunAborted(const Error& cause, OptHistory history)
    : Error(cause.code(), cause.what(), cause.data()), history_(std::move(history)) {}

double gbb_step(const CellField& eta_k, const CellField& eta_km1, const CellField& psi_k, const CellField& psi_km1,
                const CellField& g_k, const CellField& g_km1, double alpha_min, double alpha_max) {
  CellField d_eta = eta_k;
  d_eta.axpy(-1.0, eta_km1);
  CellField d_g = g_k;
  d_g.axpy(-1.0, g_km1);
  const double denom = integrate_dot(d_eta, d_g);
  if (std::abs(denom) < 1e-300) return alpha_max;
  CellField d_psi = psi_k;
  d_psi.axpy(-1.0, psi_km1);
  const double alpha = std::abs(integrate_dot(d_eta, d_psi) / denom);
  if (!std::isfinite(alpha)) return alpha_max;
  return std::clamp(alpha, alpha_min, alpha_max);
}

bool armijo_accept(double f_new, double f_old, const CellField& g_k, const CellField& eta_new,
                   const CellField& eta_k, double c1) {
  CellField step = eta_new;
  step.axpy(-1.0, eta_k);
  return f_new <= f_old + c1 * integrate_dot(g_k, step);
}

RunResult simpl_run(const Objective& objective, const Polytope& polytope, const GlobalConstraints& constraints,
                    const CellField& psi0, const OptOptions& options, const IterateObserver& observer) {
  options.validate();
  if (psi0.channels() != polytope.dim()) fail(ErrorCode::InvalidArgument, "initial latent channel mismatch");
  for (double v : psi0.values()) {
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "initial latent must be finite");
  }

  OptHistory history;
  try {
    ProjectionResult start = bregman_project(polytope, psi0, constraints, options.projection);
    CellField psi = std::move(start.psi);
    CellField eta = map_field(polytope, psi);
    Evaluation current = objective(eta);
    history.initial_value = current.value;
    history.initial_constraint_values = constraint_values(polytope, psi, constraints);

    CellField psi_prev = psi, eta_prev = eta, grad_prev = current.gradient;
    double res0 = 0.0;

    for (int k = 0; k < options.max_iters; ++k) {
      const double proposed = k == 0 ? options.alpha0
                                     : gbb_step(eta, eta_prev, psi, psi_prev, current.gradient, grad_prev,
                                                options.alpha_min, options.alpha_max);
      double alpha = proposed;
      IterationRecord rec;
      rec.k = k;
      rec.alpha_proposed = proposed;

      std::optional<ProjectionResult> trial;
      CellField eta_new(eta.mesh(), eta.channels());
      std::optional<Evaluation> next;
      for (;;) {
        CellField psi_half = psi;
        psi_half.axpy(-alpha, current.gradient);
        trial = bregman_project(polytope, psi_half, constraints, options.projection);
        eta_new = map_field(polytope, trial->psi);
        next = objective(eta_new);
        if (std::isfinite(next->value) &&
            armijo_accept(next->value, current.value, current.gradient, eta_new, eta, options.c1)) {
          break;
        }
        if (rec.backtracks == options.max_backtracks) {
          if (!std::isfinite(next->value)) {
            fail(ErrorCode::NonConvergence, "objective is not finite after the last backtracking step");
          }
          rec.backtracks_exhausted = true;
          break;
        }
        alpha *= 0.5;
        ++rec.backtracks;
      }

      // d^k = (psi^k - psi^{k+1}) / alpha_k, gap evaluated at eta^k.
      CellField direction = psi;
      direction.axpy(-1.0, trial->psi).scale(1.0 / alpha);
      const double res = vertex_gap_residual(polytope, direction, eta);
      if (k == 0) res0 = res;

      rec.value = next->value;
      rec.residual = res;
      rec.alpha = alpha;
      rec.mu = trial->mu;
      rec.constraint_values = constraint_values(polytope, trial->psi, constraints);
      rec.min_log_barycentric = min_log_barycentric(polytope, trial->psi);
      history.records.push_back(rec);

      psi_prev = std::move(psi);
      eta_prev = std::move(eta);
      grad_prev = std::move(current.gradient);
      psi = std::move(trial->psi);
      eta = std::move(eta_new);
      current = std::move(*next);

      if (observer) observer(history.records.back(), eta, psi);

      const bool converged = res <= options.tol_abs || (res0 > 0.0 ? res / res0 <= options.tol_rel : true);
      if (converged) {
        return {std::move(eta), std::move(psi), current.value, std::move(history), StopReason::Tolerance};
      }
    }
    return {std::move(eta), std::move(psi), current.value, std::move(history), StopReason::MaxIterations};
  } catch (const Error& e) {
    throw RunAborted(e, std::move(history));
  }
}

}  // namespace simpl
