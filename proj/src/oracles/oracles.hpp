#pragma once

// Brute-force reference computations. Nothing here calls into the simpl core
// library: each routine solves its problem by a different, deliberately
// plain method, so agreement with the core is meaningful.

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace simpl::oracles {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Maximum-entropy barycentric coordinates of eta in conv(V): minimizes
/// sum lambda ln lambda subject to V lambda = eta, sum lambda = 1 by Newton's
/// method restricted to the null space of the equality constraints.
VectorXd max_entropy_weights(const MatrixXd& V, const VectorXd& eta);

/// Naive softmax design point V softmax(V^T psi) without max-shifting.
VectorXd naive_design(const MatrixXd& V, const VectorXd& psi);

/// Multiplier of the single half-space projection by plain bisection on
/// h(mu) = cell_area * sum_e w . naive_design(psi_e - mu w) = b.
/// Returns 0 when h(0) <= b.
double bisection_multiplier(const MatrixXd& V, const std::vector<VectorXd>& psi_half, double cell_area,
                            const VectorXd& w, double b, double tol = 1e-14);

/// Dual maximization for a one-cell domain: max over mu >= 0 of
///   -area * logsumexp(V^T (psi - W^T mu)) - mu . b
/// by projected gradient ascent with backtracking.
VectorXd dual_ascent(const MatrixXd& V, const VectorXd& psi, double area, const MatrixXd& W, const VectorXd& b,
                     int max_iter = 200000);

/// Minimizer of sum_e area/2 (eta_e - target_e)^2 over eta_e in [0, 1] with
/// area * sum_e eta_e <= budget: eta = clip(target - nu, 0, 1), nu by bisection.
VectorXd quadratic_kkt(const VectorXd& target, double cell_area, double budget);

/// 1D solution of -eps^2 u'' + u = 1 on (0, L), u(0) = u(L) = 0.
double helmholtz_strip(double y, double length, double eps);

/// Plane-stress bilinear element stiffness by 3 x 3 Gauss quadrature in
/// physical coordinates. Node order LL, LR, UR, UL; dofs (u_x, u_y).
MatrixXd q1_stiffness_gauss3(double hx, double hy, double youngs, double nu);

/// Closed-form unit-square element stiffness (the k1..k8 pattern common in
/// compact topology-optimization codes), same node order.
MatrixXd q1_stiffness_closed_form(double youngs, double nu);

/// Voigt matrix of a material rotated by theta, via the strain
/// transformation T: C' = T^T C T.
Eigen::Matrix3d voigt_rotation(const Eigen::Matrix3d& c, double theta);

/// Binary Kullback-Leibler (Fermi-Dirac) divergence of x from y in (0, 1).
double fermi_dirac_divergence(double x, double y);

/// Canonical instance of each oracle as (label, value) pairs, for printing.
std::vector<std::string> names();
std::vector<std::pair<std::string, double>> run(const std::string& name);

}  // namespace simpl::oracles
