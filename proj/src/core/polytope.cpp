#include "simpl/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "simpl/error.hpp"

namespace simpl {

namespace {

constexpr double kRankTol = 1e-10;
constexpr double kDistinctTol = 1e-12;
constexpr double kHessianShift = 1e-12;

void require_finite(const Eigen::Ref<const Vector>& v, const char* what) {
  if (!v.allFinite()) fail(ErrorCode::InvalidArgument, std::string(what) + " must be finite");
}

// Log-barycentric coordinates log(lambda_i) = z_i - logsumexp(z), z = V^T psi.
Vector log_softmax(const Eigen::Ref<const Vector>& z) { return z.array() - log_sum_exp(z); }

double dual_objective(const Polytope& p, const Vector& psi, const Eigen::Ref<const Vector>& eta) {
  return psi.dot(eta) - conjugate_value(p, psi);
}

// V softmax(V^T psi) accumulated in long double. Near the boundary the
// inverse map amplifies rounding in the design point by the inverse of a tiny
// Jacobian eigenvalue, so both the forward point and the Newton residual are
// kept as close to correctly rounded as possible.
// Returns eta - point when `eta` is given, subtracting before rounding.
Vector accurate_point(const Polytope& p, const Eigen::Ref<const Vector>& psi, const Vector* eta = nullptr) {
  const Matrix& V = p.vertices();
  const int n = p.dim();
  const int q = p.vertex_count();
  std::vector<long double> w(static_cast<std::size_t>(q));
  long double zmax = -std::numeric_limits<long double>::infinity();
  for (int i = 0; i < q; ++i) {
    long double z = 0.0L;
    for (int d = 0; d < n; ++d) z += static_cast<long double>(V(d, i)) * psi(d);
    w[i] = z;
    zmax = std::max(zmax, z);
  }
  long double sum = 0.0L;
  for (auto& x : w) sum += (x = std::exp(x - zmax));
  Vector out(n);
  for (int d = 0; d < n; ++d) {
    long double acc = 0.0L;
    for (int i = 0; i < q; ++i) acc += w[i] * V(d, i);
    out(d) = eta ? static_cast<double>((*eta)(d) - acc / sum) : static_cast<double>(acc / sum);
  }
  return out;
}

}  // namespace

Polytope::Polytope(Matrix vertices) : vertices_(std::move(vertices)) {
  const Eigen::Index n = vertices_.rows();
  const Eigen::Index q = vertices_.cols();
  if (n < 1) fail(ErrorCode::InvalidArgument, "polytope needs ambient dimension >= 1");
  if (q < 2) fail(ErrorCode::InvalidArgument, "polytope needs at least two vertices");
  if (!vertices_.allFinite()) fail(ErrorCode::InvalidArgument, "polytope vertices must be finite");

  scale_ = vertices_.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < q; ++i) {
    for (Eigen::Index j = i + 1; j < q; ++j) {
      if ((vertices_.col(i) - vertices_.col(j)).norm() <= kDistinctTol) {
        fail(ErrorCode::InvalidArgument,
             "duplicate polytope vertices " + std::to_string(i) + " and " + std::to_string(j));
      }
    }
  }

  centroid_ = vertices_.rowwise().mean();
  centered_ = vertices_.colwise() - centroid_;

  Eigen::JacobiSVD<Matrix> svd(centered_, Eigen::ComputeFullU);
  const Vector& sigma = svd.singularValues();
  const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
  rank_ = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > kRankTol * smax) ++rank_;
  }
  if (rank_ == 0) fail(ErrorCode::InvalidArgument, "polytope is a single point");
  if (rank_ == 1 && q > 2) {
    fail(ErrorCode::InvalidArgument, "collinear vertex list: only the two end points are vertices");
  }
  directions_ = svd.matrixU().leftCols(rank_);
}

Vector Polytope::project_to_directions(const Eigen::Ref<const Vector>& psi) const {
  if (full_dimensional()) return psi;
  return directions_ * (directions_.transpose() * psi);
}

void Polytope::map_point(const double* psi, double* point, double* lambda) const {
  const int n = dim();
  const int q = vertex_count();
  double zmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < q; ++i) {
    const double* v = vertices_.col(i).data();
    double z = 0.0;
    for (int d = 0; d < n; ++d) z += v[d] * psi[d];
    lambda[i] = z;
    if (z > zmax) zmax = z;
  }
  double sum = 0.0;
  for (int i = 0; i < q; ++i) {
    lambda[i] = std::exp(lambda[i] - zmax);
    sum += lambda[i];
  }
  const double inv = 1.0 / sum;
  for (int i = 0; i < q; ++i) lambda[i] *= inv;
  if (point == nullptr) return;
  for (int d = 0; d < n; ++d) point[d] = 0.0;
  for (int i = 0; i < q; ++i) {
    const double* v = vertices_.col(i).data();
    for (int d = 0; d < n; ++d) point[d] += lambda[i] * v[d];
  }
}

Vector stable_softmax(const Eigen::Ref<const Vector>& y) {
  require_finite(y, "softmax argument");
  const Vector e = (y.array() - y.maxCoeff()).exp();
  return e / e.sum();
}

double log_sum_exp(const Eigen::Ref<const Vector>& y) {
  require_finite(y, "log-sum-exp argument");
  const double m = y.maxCoeff();
  return m + std::log((y.array() - m).exp().sum());
}

BarycentricPoint gradient_map(const Polytope& polytope, const Eigen::Ref<const Vector>& psi) {
  if (psi.size() != polytope.dim()) fail(ErrorCode::InvalidArgument, "latent dimension mismatch");
  require_finite(psi, "latent");
  BarycentricPoint out;
  out.lambda = stable_softmax(polytope.vertices().transpose() * psi);
  out.point = accurate_point(polytope, psi);
  return out;
}

double conjugate_value(const Polytope& polytope, const Eigen::Ref<const Vector>& psi) {
  if (psi.size() != polytope.dim()) fail(ErrorCode::InvalidArgument, "latent dimension mismatch");
  return log_sum_exp(polytope.vertices().transpose() * psi);
}

Matrix map_jacobian(const Polytope& polytope, const Eigen::Ref<const Vector>& psi) {
  const BarycentricPoint bp = gradient_map(polytope, psi);
  const Matrix& V = polytope.vertices();
  // Centering at the mean avoids the cancellation in V diag(lambda) V^T - eta eta^T.
  const Matrix D = V.colwise() - bp.point;
  const Matrix J = D * bp.lambda.asDiagonal() * D.transpose();
  return 0.5 * (J + J.transpose());
}

Vector inverse_map(const Polytope& polytope, const Eigen::Ref<const Vector>& eta,
                   const InverseMapOptions& options, const std::optional<Vector>& start) {
  const int n = polytope.dim();
  if (eta.size() != n) fail(ErrorCode::InvalidArgument, "design dimension mismatch");
  require_finite(eta, "design point");
  if (!(options.tol > 0.0)) fail(ErrorCode::InvalidArgument, "inverse_map tolerance must be positive");

  const double tol = options.tol * std::max(1.0, polytope.max_abs_coordinate());
  if (!polytope.full_dimensional()) {
    const Vector offset = eta - polytope.centroid();
    const double off_hull = (offset - polytope.project_to_directions(offset)).norm();
    if (off_hull > 1e-10 * std::max(1.0, polytope.max_abs_coordinate())) {
      fail(ErrorCode::BoundaryProximity, "design point is off the affine hull of the polytope", {off_hull});
    }
  }

  Vector psi = start ? polytope.project_to_directions(*start) : Vector::Zero(n);
  const Vector target = eta;
  auto residual_of = [&](const Vector& p) { return accurate_point(polytope, p, &target); };

  Vector r = residual_of(psi);
  double rnorm = r.norm();
  Vector best = psi;
  double best_norm = rnorm;
  int polish = 0;

  for (int it = 0; it < options.max_iter; ++it) {
    if (rnorm == 0.0) break;
    if (rnorm <= tol) {
      // Newton converges quadratically; a couple of extra full steps push
      // psi to the accuracy the design point actually carries.
      if (++polish > 2) break;
    }
    Matrix H = map_jacobian(polytope, psi);
    H.diagonal().array() += kHessianShift;
    Vector step = H.ldlt().solve(r);
    step = polytope.project_to_directions(step);
    if (!step.allFinite()) break;

    const double phi0 = dual_objective(polytope, psi, eta);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const Vector cand = psi + t * step;
      const Vector rc = residual_of(cand);
      const double rc_norm = rc.norm();
      if (dual_objective(polytope, cand, eta) >= phi0 || rc_norm < rnorm) {
        psi = cand;
        r = rc;
        accepted = rc_norm < rnorm || rnorm > tol;
        rnorm = rc_norm;
        break;
      }
    }
    if (rnorm < best_norm) {
      best_norm = rnorm;
      best = psi;
    }
    if (!accepted && best_norm <= tol) break;
  }

  if (!(best_norm <= tol)) {
    fail(ErrorCode::BoundaryProximity,
         "inverse map did not converge (design point too close to the polytope boundary)", {best_norm});
  }
  return polytope.project_to_directions(best);
}

double entropy_value(const Polytope& polytope, const Eigen::Ref<const Vector>& eta,
                     const std::optional<Vector>& psi_hint) {
  const Vector psi = inverse_map(polytope, eta, {}, psi_hint);
  return psi.dot(eta) - conjugate_value(polytope, psi);
}

double bregman_divergence(const Polytope& polytope, const Eigen::Ref<const Vector>& eta,
                          const Eigen::Ref<const Vector>& v) {
  const Vector psi_eta = inverse_map(polytope, eta);
  const Vector psi_v = inverse_map(polytope, v);
  const Matrix& V = polytope.vertices();
  const Vector log_eta = log_softmax(V.transpose() * psi_eta);
  const Vector log_v = log_softmax(V.transpose() * psi_v);
  const double kl = (log_eta.array().exp() * (log_eta - log_v).array()).sum();
  return std::max(0.0, kl);
}

Polytope build_regular_polygon_with_apex(int num_angles, bool periodic, const Eigen::Vector3d& apex,
                                         ApexLayout layout) {
  if (num_angles < 3) fail(ErrorCode::InvalidArgument, "regular polygon needs at least 3 angles");
  Matrix V(3, num_angles + 1);
  const int base_offset = layout == ApexLayout::First ? 1 : 0;
  for (int i = 0; i < num_angles; ++i) {
    const double theta = periodic ? std::numbers::pi * i / num_angles : 2.0 * std::numbers::pi * i / num_angles;
    const double beta = periodic ? 2.0 * theta : theta;
    Eigen::Vector3d v;
    if (layout == ApexLayout::First) {
      v << 0.0, std::cos(beta), std::sin(beta);
    } else {
      v << std::cos(beta), std::sin(beta), 0.0;
    }
    V.col(base_offset + i) = v;
  }
  V.col(layout == ApexLayout::First ? 0 : num_angles) = apex;
  return Polytope(std::move(V));
}

Polytope standard_simplex(int q) {
  if (q < 2) fail(ErrorCode::InvalidArgument, "simplex needs at least two vertices");
  return Polytope(Matrix::Identity(q, q));
}

Polytope read_polytope(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        fail(ErrorCode::Config, "polytope line " + std::to_string(lineno) + ": bad number '" + tok + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(ErrorCode::Config, "polytope line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(rows.front().size()) + " coordinates");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::Config, "polytope file contains no vertices");
  Matrix V(rows.front().size(), rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t i = 0; i < rows[j].size(); ++i) V(i, j) = rows[j][i];
  }
  return Polytope(std::move(V));
}

void write_polytope(std::ostream& out, const Polytope& polytope) {
  const Matrix& V = polytope.vertices();
  out << std::setprecision(17);
  for (Eigen::Index j = 0; j < V.cols(); ++j) {
    for (Eigen::Index i = 0; i < V.rows(); ++i) out << (i ? " " : "") << V(i, j);
    out << '\n';
  }
}

}  // namespace simpl
