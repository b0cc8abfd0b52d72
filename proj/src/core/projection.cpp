#include "simpl/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "simpl/error.hpp"
#include "simpl/parallel.hpp"

namespace simpl {

namespace {

constexpr double kBracketLimit = 1152921504606846976.0;  // 2^60
constexpr int kMaxIllinoisSteps = 400;
constexpr double kRootRelTol = 1e-13;  // multiplier resolution, relative

void check_shapes(const Polytope& polytope, const CellField& psi, const GlobalConstraints& constraints) {
  if (psi.channels() != polytope.dim()) fail(ErrorCode::InvalidArgument, "latent channels != polytope dimension");
  if (constraints.count() > 0 && constraints.dim() != polytope.dim()) {
    fail(ErrorCode::InvalidArgument, "constraint weights do not match the polytope dimension");
  }
}

// integral of w . gradient_map(base - mu w), block-deterministic.
double half_space_value(const Polytope& polytope, const CellField& base, const Vector& w, double mu) {
  const int n = polytope.dim();
  const int q = polytope.vertex_count();
  const std::size_t cells = base.size();
  const std::size_t blocks = (cells + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks, 0.0);
  parallel_blocks(cells, [&](std::size_t begin, std::size_t end) {
    std::vector<double> shifted(n), point(n), lambda(q);
    double s = 0.0;
    for (std::size_t e = begin; e < end; ++e) {
      const auto p = base.at(e);
      for (int c = 0; c < n; ++c) shifted[c] = p[c] - mu * w(c);
      polytope.map_point(shifted.data(), point.data(), lambda.data());
      for (int c = 0; c < n; ++c) s += w(c) * point[c];
    }
    partial[begin / kReductionBlock] = s;
  });
  double total = 0.0;
  for (double v : partial) total += v;
  return base.mesh().cell_area() * total;
}

void shift_latent(CellField& psi, const Vector& w, double amount) {
  if (amount == 0.0) return;
  for (std::size_t e = 0; e < psi.size(); ++e) {
    auto p = psi.at(e);
    for (int c = 0; c < psi.channels(); ++c) p[c] += amount * w(c);
  }
}

struct RootResult {
  double mu = 0.0;
  double residual = 0.0;  // h(mu) - b
  int evaluations = 0;
};

// Smallest-effort multiplier with |h(mu) - b| small enough that both the
// violation and mu * violation stay below the tolerance.
RootResult solve_half_space(const Polytope& polytope, const CellField& base, const Vector& w, double b, double tol) {
  RootResult out;
  auto f = [&](double mu) {
    ++out.evaluations;
    return half_space_value(polytope, base, w, mu) - b;
  };
  const double scale = std::max(1.0, std::abs(b));

  const double f0 = f(0.0);
  if (f0 <= 0.0) {
    out.residual = f0;
    return out;
  }

  double lo = 0.0, flo = f0;
  double hi = 1.0, fhi = f(hi);
  while (fhi > 0.0) {
    if (hi >= kBracketLimit) {
      fail(ErrorCode::Infeasible, "half-space projection: no strictly feasible design in the constraint direction",
           {fhi});
    }
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    fhi = f(hi);
  }

  // Secant weights; the stalled endpoint's weight is halved (Illinois rule).
  double wlo = flo, whi = fhi;
  int last_side = 0;
  for (int it = 0; it < kMaxIllinoisSteps; ++it) {
    const double tol_eff = tol * scale / std::max(1.0, hi);
    // A small residual alone does not pin mu when h is flat near the root,
    // so the secant estimate of the distance to the root must be small too.
    const double slope = (flo - fhi) / (hi - lo);
    auto settled = [&](double fx, double x) { return std::abs(fx) <= slope * kRootRelTol * std::max(1.0, x); };
    if (-fhi <= tol_eff && settled(fhi, hi)) {
      out.mu = hi;
      out.residual = fhi;
      return out;
    }
    if (flo <= tol_eff && lo > 0.0 && settled(flo, lo)) {
      out.mu = lo;
      out.residual = flo;
      return out;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;

    double m = hi - whi * (hi - lo) / (whi - wlo);
    if (!(m > lo && m < hi)) m = 0.5 * (lo + hi);
    const double fm = f(m);
    if (fm > 0.0) {
      lo = m;
      flo = wlo = fm;
      if (last_side == 1) whi *= 0.5;
      last_side = 1;
    } else {
      hi = m;
      fhi = whi = fm;
      if (last_side == -1) wlo *= 0.5;
      last_side = -1;
    }
  }
  // Bracket collapsed to adjacent doubles: return the feasible end.
  out.mu = hi;
  out.residual = fhi;
  return out;
}

}  // namespace

GlobalConstraints::GlobalConstraints(int dim) : weights_(0, dim), bounds_(0) {}

GlobalConstraints::GlobalConstraints(Matrix weights, Vector bounds)
    : weights_(std::move(weights)), bounds_(std::move(bounds)) {
  if (weights_.rows() != bounds_.size()) fail(ErrorCode::InvalidArgument, "constraint rows != bound count");
  if (!weights_.allFinite() || !bounds_.allFinite()) fail(ErrorCode::InvalidArgument, "constraints must be finite");
  for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
    if (weights_.row(i).cwiseAbs().maxCoeff() == 0.0) {
      fail(ErrorCode::InvalidArgument, "constraint row " + std::to_string(i) + " has all-zero weights");
    }
  }
}

Vector constraint_values(const Polytope& polytope, const CellField& psi, const GlobalConstraints& constraints) {
  check_shapes(polytope, psi, constraints);
  if (constraints.count() == 0) return Vector(0);
  return constraint_values(polytope, psi, constraints.weights());
}

Vector constraint_values(const Polytope& polytope, const CellField& psi, const Matrix& weights) {
  if (psi.channels() != polytope.dim() || weights.cols() != polytope.dim()) {
    fail(ErrorCode::InvalidArgument, "constraint_values: shape mismatch");
  }
  const int n = polytope.dim();
  const std::size_t cells = psi.size();
  const std::size_t blocks = (cells + kReductionBlock - 1) / kReductionBlock;
  Matrix partial = Matrix::Zero(n, static_cast<Eigen::Index>(blocks));
  parallel_blocks(cells, [&](std::size_t begin, std::size_t end) {
    std::vector<double> point(n), lambda(polytope.vertex_count());
    Vector sum = Vector::Zero(n);
    for (std::size_t e = begin; e < end; ++e) {
      polytope.map_point(psi.at(e).data(), point.data(), lambda.data());
      for (int c = 0; c < n; ++c) sum(c) += point[c];
    }
    partial.col(static_cast<Eigen::Index>(begin / kReductionBlock)) = sum;
  });
  Vector total = Vector::Zero(n);
  for (Eigen::Index b = 0; b < partial.cols(); ++b) total += partial.col(b);
  return psi.mesh().cell_area() * (weights * total);
}

ProjectionResult project_single(const Polytope& polytope, const CellField& psi_half, const Vector& w, double b,
                                double tol) {
  if (w.size() != polytope.dim()) fail(ErrorCode::InvalidArgument, "constraint weight size mismatch");
  if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "projection tolerance must be positive");
  check_shapes(polytope, psi_half, GlobalConstraints(w.transpose(), Vector::Constant(1, b)));

  const RootResult root = solve_half_space(polytope, psi_half, w, b, tol);
  ProjectionResult out{psi_half, Vector::Constant(1, root.mu), Vector::Constant(1, root.residual), 1,
                       root.evaluations};
  shift_latent(out.psi, w, -root.mu);
  return out;
}

ProjectionResult project_multi(const Polytope& polytope, const CellField& psi_half,
                               const GlobalConstraints& constraints, double tol, int max_sweeps) {
  check_shapes(polytope, psi_half, constraints);
  if (constraints.count() < 1) fail(ErrorCode::InvalidArgument, "project_multi needs at least one constraint");
  if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "projection tolerance must be positive");
  const int r = constraints.count();
  const Matrix& W = constraints.weights();
  const Vector& b = constraints.bounds();

  ProjectionResult out{psi_half, Vector::Zero(r), constraint_values(polytope, psi_half, constraints) - b, 0, 1};
  if ((out.violation.array() <= 0.0).all()) return out;

  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double change = 0.0;
    double mu_scale = 1.0;
    for (int i = 0; i < r; ++i) {
      const Vector w = W.row(i).transpose();
      // Release the stored correction of constraint i, then re-project.
      shift_latent(out.psi, w, out.mu(i));
      const RootResult root = solve_half_space(polytope, out.psi, w, b(i), tol);
      shift_latent(out.psi, w, -root.mu);
      out.evaluations += root.evaluations;
      const double wmax = w.cwiseAbs().maxCoeff();
      change = std::max(change, std::abs(root.mu - out.mu(i)) * wmax);
      mu_scale = std::max(mu_scale, root.mu * wmax);
      out.mu(i) = root.mu;
    }
    out.sweeps = sweep;
    out.violation = constraint_values(polytope, out.psi, constraints) - b;
    ++out.evaluations;

    bool done = change <= tol * mu_scale;
    for (int i = 0; i < r && done; ++i) {
      const double scale = std::max(1.0, std::abs(b(i)));
      done = out.violation(i) <= tol && std::abs(out.mu(i) * out.violation(i)) <= tol * scale;
    }
    if (done) return out;
  }
  fail(ErrorCode::NonConvergence,
       "Bregman-Dykstra projection did not converge in " + std::to_string(max_sweeps) + " sweeps",
       std::vector<double>(out.violation.data(), out.violation.data() + out.violation.size()));
}

ProjectionResult bregman_project(const Polytope& polytope, const CellField& psi_half,
                                 const GlobalConstraints& constraints, const ProjectionOptions& options) {
  switch (constraints.count()) {
    case 0:
      check_shapes(polytope, psi_half, constraints);
      return {psi_half, Vector(0), Vector(0), 0, 0};
    case 1:
      return project_single(polytope, psi_half, constraints.weights().row(0).transpose(), constraints.bounds()(0),
                            options.tol);
    default:
      return project_multi(polytope, psi_half, constraints, options.tol, options.max_sweeps);
  }
}

double dual_objective(const Polytope& polytope, const CellField& psi_half, const GlobalConstraints& constraints,
                      const Vector& mu) {
  check_shapes(polytope, psi_half, constraints);
  if (mu.size() != constraints.count()) fail(ErrorCode::InvalidArgument, "multiplier count mismatch");
  const Vector shift = constraints.count() > 0 ? Vector(constraints.weights().transpose() * mu)
                                               : Vector(Vector::Zero(polytope.dim()));
  const Matrix& V = polytope.vertices();
  const double sum = deterministic_sum(psi_half.size(), [&](std::size_t e) {
    const Eigen::Map<const Vector> p(psi_half.at(e).data(), psi_half.channels());
    return log_sum_exp(V.transpose() * (p - shift));
  });
  const double linear = constraints.count() > 0 ? mu.dot(constraints.bounds()) : 0.0;
  return -psi_half.mesh().cell_area() * sum - linear;
}

}  // namespace simpl
