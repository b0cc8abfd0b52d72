#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <span>

namespace simpl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A convex polytope given by its vertex list, together with the entropic
/// Legendre machinery over it: the latent-to-design map
/// psi -> V softmax(V^T psi), its inverse, the conjugate log-sum-exp and the
/// induced Bregman divergence.
///
/// The vertex matrix is used as given (no re-centering): softmax is invariant
/// to adding a constant to its argument, so translating the polytope
/// translates the image of the map by the same amount.
class Polytope {
 public:
  /// `vertices` is n x q, one vertex per column. Requires q >= 2 and pairwise
  /// distinct vertices.
  explicit Polytope(Matrix vertices);

  int dim() const noexcept { return static_cast<int>(vertices_.rows()); }
  int vertex_count() const noexcept { return static_cast<int>(vertices_.cols()); }
  int rank() const noexcept { return rank_; }
  bool full_dimensional() const noexcept { return rank_ == dim(); }

  const Matrix& vertices() const noexcept { return vertices_; }
  const Matrix& centered_vertices() const noexcept { return centered_; }
  const Vector& centroid() const noexcept { return centroid_; }
  double max_abs_coordinate() const noexcept { return scale_; }

  /// Orthonormal basis (n x rank) of the span of the centered vertices, i.e.
  /// the direction space of the affine hull. The latent map only sees the
  /// component of psi in this subspace.
  const Matrix& direction_basis() const noexcept { return directions_; }
  Vector project_to_directions(const Eigen::Ref<const Vector>& psi) const;

  /// Allocation-free kernel for per-cell loops. `lambda` needs q entries,
  /// `point` needs n entries; `point` may be null.
  void map_point(const double* psi, double* point, double* lambda) const;

 private:
  Matrix vertices_;
  Matrix centered_;
  Vector centroid_;
  Matrix directions_;
  int rank_ = 0;
  double scale_ = 0.0;
};

struct BarycentricPoint {
  Vector lambda;  // maximum-entropy barycentric coordinates, all > 0
  Vector point;   // V * lambda
};

/// exp(y - max y) / sum exp(y - max y). Throws InvalidArgument on non-finite input.
Vector stable_softmax(const Eigen::Ref<const Vector>& y);

/// log(sum exp(y)) with max-shift.
double log_sum_exp(const Eigen::Ref<const Vector>& y);

BarycentricPoint gradient_map(const Polytope& polytope, const Eigen::Ref<const Vector>& psi);

/// R*(psi) = logsumexp(V^T psi).
double conjugate_value(const Polytope& polytope, const Eigen::Ref<const Vector>& psi);

/// d/dpsi of the design point: V (diag(lambda) - lambda lambda^T) V^T.
Matrix map_jacobian(const Polytope& polytope, const Eigen::Ref<const Vector>& psi);

struct InverseMapOptions {
  double tol = 1e-13;
  int max_iter = 200;
};

/// Latent psi with gradient_map(psi).point == eta, by damped Newton on the
/// concave dual psi.eta - R*(psi) starting from psi = 0 (or `start`). For a
/// lower-dimensional polytope the minimal-norm representative is returned.
/// Throws BoundaryProximity (data = {final residual}) when eta is too close
/// to the boundary, or off the affine hull, for the iteration to converge.
Vector inverse_map(const Polytope& polytope, const Eigen::Ref<const Vector>& eta,
                   const InverseMapOptions& options = {},
                   const std::optional<Vector>& start = std::nullopt);

/// R(eta) = psi.eta - R*(psi) with psi = inverse_map(eta); equal to the
/// minimum of sum lambda ln lambda over barycentric coordinates of eta.
double entropy_value(const Polytope& polytope, const Eigen::Ref<const Vector>& eta,
                     const std::optional<Vector>& psi_hint = std::nullopt);

/// D_R(eta, v) >= 0, evaluated as the Kullback-Leibler divergence between the
/// maximum-entropy barycentric coordinates of the two points.
double bregman_divergence(const Polytope& polytope, const Eigen::Ref<const Vector>& eta,
                          const Eigen::Ref<const Vector>& v);

enum class ApexLayout {
  Last,   // base vertices (cos b, sin b, 0), apex appended as the last column
  First,  // base vertices (0, cos b, sin b), apex inserted as the first column
};

/// Regular polygon of `num_angles` orientation vertices plus one apex vertex,
/// in R^3. With `periodic` the orientations theta_i = pi (i-1)/num_angles are
/// stored at double angle 2 theta_i; otherwise theta_i = 2 pi (i-1)/num_angles
/// is stored directly.
Polytope build_regular_polygon_with_apex(int num_angles, bool periodic,
                                         const Eigen::Vector3d& apex = Eigen::Vector3d(0, 0, 1),
                                         ApexLayout layout = ApexLayout::Last);

/// Standard simplex conv{e_1, ..., e_q} in R^q.
Polytope standard_simplex(int q);

/// Plain-text vertex list: one vertex per line, whitespace-separated
/// coordinates. Blank lines and lines starting with '#' are ignored.
Polytope read_polytope(std::istream& in);
void write_polytope(std::ostream& out, const Polytope& polytope);

}  // namespace simpl
