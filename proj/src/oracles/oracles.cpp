#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace simpl::oracles {

namespace {

// lambda_i = 1 / sum_j exp(z_j - z_i), one division per weight.
VectorXd weights_of(const VectorXd& z) {
  VectorXd lambda(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    double denom = 0.0;
    for (Eigen::Index j = 0; j < z.size(); ++j) denom += std::exp(z[j] - z[i]);
    lambda[i] = 1.0 / denom;
  }
  return lambda;
}

double log_sum_exp_plain(const VectorXd& z) {
  // Shift by the mean instead of the maximum; adequate for moderate spreads.
  const double m = z.mean();
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) s += std::exp(z[i] - m);
  return m + std::log(s);
}

}  // namespace

VectorXd max_entropy_weights(const MatrixXd& V, const VectorXd& eta) {
  const Eigen::Index q = V.cols();
  MatrixXd A(V.rows() + 1, q);
  A << V, Eigen::RowVectorXd::Ones(q);
  VectorXd c(V.rows() + 1);
  c << eta, 1.0;
  // Drop dependent equality rows.
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeFullU);
  const double smax = svd.singularValues()(0);
  Eigen::Index rank = 0;
  while (rank < svd.singularValues().size() && svd.singularValues()(rank) > 1e-12 * smax) ++rank;
  const MatrixXd U = svd.matrixU().leftCols(rank);
  const MatrixXd Ar = U.transpose() * A;
  const VectorXd cr = U.transpose() * c;

  // Infeasible-start Newton on the KKT system of min sum l ln l s.t. Ar l = cr.
  VectorXd lambda = VectorXd::Constant(q, 1.0 / static_cast<double>(q));
  VectorXd nu = VectorXd::Zero(rank);
  auto residual = [&](const VectorXd& l, const VectorXd& n) {
    VectorXd r(q + rank);
    r.head(q) = (l.array().log() + 1.0).matrix() + Ar.transpose() * n;
    r.tail(rank) = Ar * l - cr;
    return r;
  };
  for (int it = 0; it < 500; ++it) {
    const VectorXd r = residual(lambda, nu);
    if (r.norm() < 1e-15) break;
    MatrixXd K = MatrixXd::Zero(q + rank, q + rank);
    K.topLeftCorner(q, q) = lambda.cwiseInverse().asDiagonal();
    K.topRightCorner(q, rank) = Ar.transpose();
    K.bottomLeftCorner(rank, q) = Ar;
    const VectorXd step = K.fullPivLu().solve(-r);
    double t = 1.0;
    const VectorXd dl = step.head(q);
    const VectorXd dn = step.tail(rank);
    while ((lambda + t * dl).minCoeff() <= 0.0) t *= 0.5;
    const double r0 = r.norm();
    while (t > 1e-12 && residual(lambda + t * dl, nu + t * dn).norm() > (1.0 - 0.01 * t) * r0) t *= 0.5;
    lambda += t * dl;
    nu += t * dn;
  }
  return lambda;
}

VectorXd naive_design(const MatrixXd& V, const VectorXd& psi) { return V * weights_of(V.transpose() * psi); }

double bisection_multiplier(const MatrixXd& V, const std::vector<VectorXd>& psi_half, double cell_area,
                            const VectorXd& w, double b, double tol) {
  auto h = [&](double mu) {
    double s = 0.0;
    for (const auto& psi : psi_half) s += cell_area * w.dot(naive_design(V, psi - mu * w));
    return s;
  };
  if (h(0.0) <= b) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (h(hi) > b) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e18) throw std::runtime_error("bisection oracle: no sign change");
  }
  for (int it = 0; it < 400 && hi - lo > tol * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) > b ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

VectorXd dual_ascent(const MatrixXd& V, const VectorXd& psi, double area, const MatrixXd& W, const VectorXd& b,
                     int max_iter) {
  auto g = [&](const VectorXd& mu) {
    return -area * log_sum_exp_plain(V.transpose() * (psi - W.transpose() * mu)) - mu.dot(b);
  };
  auto grad = [&](const VectorXd& mu) { return VectorXd(area * W * naive_design(V, psi - W.transpose() * mu) - b); };
  VectorXd mu = VectorXd::Zero(W.rows());
  double t = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    const VectorXd gr = grad(mu);
    const double g0 = g(mu);
    VectorXd next;
    for (;;) {
      next = (mu + t * gr).cwiseMax(0.0);
      const VectorXd d = next - mu;
      if (g(next) >= g0 + gr.dot(d) - d.squaredNorm() / (2.0 * t) - 1e-15 * std::abs(g0) || t < 1e-20) break;
      t *= 0.5;
    }
    const double moved = (next - mu).norm();
    mu = next;
    t *= 2.0;
    if (moved < 1e-15 * std::max(1.0, mu.norm())) break;
  }
  return mu;
}

VectorXd quadratic_kkt(const VectorXd& target, double cell_area, double budget) {
  auto eta_of = [&](double nu) { return VectorXd((target.array() - nu).cwiseMax(0.0).cwiseMin(1.0)); };
  if (cell_area * eta_of(0.0).sum() <= budget) return eta_of(0.0);
  double lo = 0.0, hi = 1.0 + target.cwiseAbs().maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cell_area * eta_of(mid).sum() > budget ? lo : hi) = mid;
  }
  return eta_of(0.5 * (lo + hi));
}

double helmholtz_strip(double y, double length, double eps) {
  if (eps == 0.0) return (y > 0.0 && y < length) ? 1.0 : 0.0;
  // cosh ratio written with exponentials of non-positive arguments.
  const double half = 0.5 * length;
  const double a = std::abs(y - half) / eps;
  const double c = half / eps;
  return 1.0 - std::exp(a - c) * (1.0 + std::exp(-2.0 * a)) / (1.0 + std::exp(-2.0 * c));
}

MatrixXd q1_stiffness_gauss3(double hx, double hy, double youngs, double nu) {
  Eigen::Matrix3d D;
  const double f = youngs / (1.0 - nu * nu);
  D << f, f * nu, 0, f * nu, f, 0, 0, 0, f * (1.0 - nu) / 2.0;
  const double pts[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  const double wts[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  MatrixXd K = MatrixXd::Zero(8, 8);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double x = 0.5 * hx * (1.0 + pts[i]);
      const double y = 0.5 * hy * (1.0 + pts[j]);
      const double w = wts[i] * wts[j] * 0.25 * hx * hy;
      const double X = x / hx, Y = y / hy;
      // d/dx and d/dy of (1-X)(1-Y), X(1-Y), XY, (1-X)Y.
      const double dx[4] = {-(1 - Y) / hx, (1 - Y) / hx, Y / hx, -Y / hx};
      const double dy[4] = {-(1 - X) / hy, -X / hy, X / hy, (1 - X) / hy};
      Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
      for (int a = 0; a < 4; ++a) {
        B(0, 2 * a) = dx[a];
        B(1, 2 * a + 1) = dy[a];
        B(2, 2 * a) = dy[a];
        B(2, 2 * a + 1) = dx[a];
      }
      K += w * B.transpose() * D * B;
    }
  }
  return K;
}

MatrixXd q1_stiffness_closed_form(double youngs, double nu) {
  const double k[8] = {0.5 - nu / 6.0,  0.125 + nu / 8.0, -0.25 - nu / 12.0, -0.125 + 3.0 * nu / 8.0,
                       -0.25 + nu / 12.0, -0.125 - nu / 8.0, nu / 6.0,          0.125 - 3.0 * nu / 8.0};
  const int pattern[8][8] = {{0, 1, 2, 3, 4, 5, 6, 7}, {1, 0, 7, 6, 5, 4, 3, 2}, {2, 7, 0, 5, 6, 3, 4, 1},
                             {3, 6, 5, 0, 7, 2, 1, 4}, {4, 5, 6, 7, 0, 1, 2, 3}, {5, 4, 3, 2, 1, 0, 7, 6},
                             {6, 3, 4, 1, 2, 7, 0, 5}, {7, 2, 1, 4, 3, 6, 5, 0}};
  MatrixXd K(8, 8);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) K(r, c) = youngs / (1.0 - nu * nu) * k[pattern[r][c]];
  }
  return K;
}

Eigen::Matrix3d voigt_rotation(const Eigen::Matrix3d& c, double theta) {
  const double co = std::cos(theta), si = std::sin(theta);
  Eigen::Matrix3d T;
  T << co * co, si * si, co * si, si * si, co * co, -co * si, -2 * co * si, 2 * co * si, co * co - si * si;
  return T.transpose() * c * T;
}

double fermi_dirac_divergence(double x, double y) {
  auto term = [](double a, double b) { return a == 0.0 ? 0.0 : a * std::log(a / b); };
  return term(x, y) + term(1.0 - x, 1.0 - y);
}

std::vector<std::string> names() {
  return {"entropy-hexagon", "bisection", "dual-qp", "quadratic-kkt",
          "helmholtz-1d",    "q1-stiffness", "voigt-rotation", "fermi-dirac"};
}

std::vector<std::pair<std::string, double>> run(const std::string& name) {
  std::vector<std::pair<std::string, double>> out;
  if (name == "entropy-hexagon") {
    MatrixXd V(2, 6);
    for (int k = 0; k < 6; ++k) {
      V(0, k) = std::cos(k * M_PI / 3.0);
      V(1, k) = std::sin(k * M_PI / 3.0);
    }
    const VectorXd eta = (VectorXd(2) << 0.2, -0.1).finished();
    const VectorXd l = max_entropy_weights(V, eta);
    out.emplace_back("entropy", (l.array() * l.array().log()).sum());
    for (int k = 0; k < 6; ++k) out.emplace_back("lambda_" + std::to_string(k + 1), l[k]);
  } else if (name == "bisection") {
    const MatrixXd V = (MatrixXd(1, 2) << 0.0, 1.0).finished();
    std::vector<VectorXd> psi{VectorXd::Constant(1, 1.0), VectorXd::Constant(1, 0.5), VectorXd::Constant(1, -0.2)};
    out.emplace_back("mu", bisection_multiplier(V, psi, 1.0, VectorXd::Ones(1), 1.2));
  } else if (name == "dual-qp") {
    const MatrixXd V = (MatrixXd(2, 4) << 0, 1, 1, 0, 0, 0, 1, 1).finished();
    const VectorXd mu = dual_ascent(V, VectorXd::Zero(2), 1.0, MatrixXd::Identity(2, 2), VectorXd::Constant(2, 0.3));
    out.emplace_back("mu_1", mu[0]);
    out.emplace_back("mu_2", mu[1]);
  } else if (name == "quadratic-kkt") {
    const VectorXd target = (VectorXd(4) << 0.2, 0.5, 0.7, 0.9).finished();
    const VectorXd eta = quadratic_kkt(target, 0.25, 0.4);
    for (int e = 0; e < 4; ++e) out.emplace_back("eta_" + std::to_string(e + 1), eta[e]);
  } else if (name == "helmholtz-1d") {
    const double eps = 0.06 / (2.0 * std::sqrt(3.0));
    for (double y : {0.01, 0.05, 0.25, 0.5}) out.emplace_back("u(" + std::to_string(y).substr(0, 4) + ")",
                                                               helmholtz_strip(y, 1.0, eps));
  } else if (name == "q1-stiffness") {
    const MatrixXd a = q1_stiffness_gauss3(1.0, 1.0, 1.0, 0.3);
    const MatrixXd b = q1_stiffness_closed_form(1.0, 0.3);
    out.emplace_back("K_11", a(0, 0));
    out.emplace_back("max_abs_difference", (a - b).cwiseAbs().maxCoeff());
  } else if (name == "voigt-rotation") {
    const double ex = 5.0, ey = 0.5, nxy = 0.3, nyx = nxy * ey / ex;
    const double g = std::sqrt(ex * ey) / (2.0 * (1.0 + std::sqrt(nxy * nyx)));
    const double d = 1.0 - nxy * nyx;
    Eigen::Matrix3d c;
    c << ex / d, nxy * ey / d, 0, nxy * ey / d, ey / d, 0, 0, 0, g;
    const Eigen::Matrix3d r = voigt_rotation(c, M_PI / 6.0);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) out.emplace_back("C_" + std::to_string(i + 1) + std::to_string(j + 1), r(i, j));
    }
  } else if (name == "fermi-dirac") {
    out.emplace_back("D(0.3,0.6)", fermi_dirac_divergence(0.3, 0.6));
  } else {
    throw std::invalid_argument("unknown oracle '" + name + "'");
  }
  return out;
}

}  // namespace simpl::oracles
