#include "simpl/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include "simpl/error.hpp"
#include "simpl/parallel.hpp"

namespace simpl {

namespace {

constexpr double kResidualTolerance = 1e-10;
constexpr double kPivotRatio = 1e-13;
constexpr double kBackwardTolerance = 1e-14;
constexpr std::size_t kDirectLimit = 400000;

constexpr std::array<std::array<double, 2>, 4> kCorners{{{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}};

// r = b - A x accumulated in extended precision; returns |r|.
double extended_residual(const SparseMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b,
                         Eigen::VectorXd& r) {
  std::vector<long double> acc(static_cast<std::size_t>(b.size()));
  for (Eigen::Index i = 0; i < b.size(); ++i) acc[i] = b[i];
  for (Eigen::Index col = 0; col < a.outerSize(); ++col) {
    const long double xc = x[col];
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) acc[it.row()] -= static_cast<long double>(it.value()) * xc;
  }
  r.resize(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) r[i] = static_cast<double>(acc[i]);
  return r.norm();
}

double infinity_norm(const SparseMatrix& a) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(a.rows());
  for (Eigen::Index col = 0; col < a.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) rows[it.row()] += std::abs(it.value());
  }
  return rows.size() ? rows.maxCoeff() : 0.0;
}

}  // namespace

bool BoundarySelector::contains(const Mesh& mesh, std::size_t node) const noexcept {
  const int stride = mesh.nx() + 1;
  const int i = static_cast<int>(node % stride);
  const int j = static_cast<int>(node / stride);
  return (left && i == 0) || (right && i == mesh.nx()) || (bottom && j == 0) || (top && j == mesh.ny());
}

struct SpdOperator::Factor {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
};

SpdOperator::~SpdOperator() = default;
SpdOperator::SpdOperator(SpdOperator&&) noexcept = default;
SpdOperator& SpdOperator::operator=(SpdOperator&&) noexcept = default;

SpdOperator::SpdOperator(SparseMatrix full, std::vector<bool> constrained, Backend backend)
    : full_(std::move(full)), constrained_(std::move(constrained)), backend_(backend) {
  const auto n = static_cast<std::size_t>(full_.rows());
  if (full_.cols() != full_.rows() || constrained_.size() != n) {
    fail(ErrorCode::InvalidArgument, "operator and constraint mask sizes differ");
  }
  full_.makeCompressed();
  const SparseMatrix transposed = full_.transpose();
  const double asym = (full_ - transposed).norm();
  if (!std::isfinite(asym) || asym > 1e-12 * std::max(1.0, full_.norm())) {
    fail(ErrorCode::InvalidArgument, "operator is not symmetric", {asym});
  }

  std::vector<long> reduced_index(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!constrained_[i]) {
      reduced_index[i] = static_cast<long>(free_dofs_.size());
      free_dofs_.push_back(i);
    }
  }
  const auto m = static_cast<Eigen::Index>(free_dofs_.size());
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(full_.nonZeros());
  for (Eigen::Index col = 0; col < full_.outerSize(); ++col) {
    if (reduced_index[col] < 0) continue;
    for (SparseMatrix::InnerIterator it(full_, col); it; ++it) {
      const long r = reduced_index[it.row()];
      if (r >= 0) entries.emplace_back(r, reduced_index[col], it.value());
    }
  }
  reduced_.resize(m, m);
  reduced_.setFromTriplets(entries.begin(), entries.end());
  if (m == 0) return;

  if (backend_ == Backend::Auto) {
    backend_ = free_dofs_.size() <= kDirectLimit ? Backend::Direct : Backend::ConjugateGradient;
  }
  if (backend_ == Backend::Direct) {
    factor_ = std::make_unique<Factor>();
    factor_->ldlt.compute(reduced_);
    if (factor_->ldlt.info() != Eigen::Success) fail(ErrorCode::LinearSolve, "sparse factorization failed");
    const Eigen::VectorXd d = factor_->ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    const double dmin = d.minCoeff();
    if (!(dmin > kPivotRatio * dmax)) {
      fail(ErrorCode::LinearSolve, "operator is singular or indefinite", {dmin, dmax});
    }
  } else {
    inv_diag_ = reduced_.diagonal();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!(inv_diag_[i] > 0.0)) fail(ErrorCode::LinearSolve, "non-positive diagonal entry", {inv_diag_[i]});
      inv_diag_[i] = 1.0 / inv_diag_[i];
    }
  }
}

std::vector<double> SpdOperator::solve(std::span<const double> rhs, std::span<const double> prescribed) const {
  const std::size_t n = size();
  if (rhs.size() != n || (!prescribed.empty() && prescribed.size() != n)) {
    fail(ErrorCode::InvalidArgument, "right-hand side has the wrong size");
  }
  std::vector<double> u(n, 0.0);
  Eigen::VectorXd lifted = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  if (!prescribed.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      if (constrained_[i]) {
        u[i] = prescribed[i];
        lifted[static_cast<Eigen::Index>(i)] = prescribed[i];
      }
    }
    lifted = full_ * lifted;
  }
  const auto m = static_cast<Eigen::Index>(free_dofs_.size());
  if (m == 0) return u;
  Eigen::VectorXd b(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto i = free_dofs_[k];
    b[k] = rhs[i] - lifted[static_cast<Eigen::Index>(i)];
  }
  if (!b.allFinite()) fail(ErrorCode::InvalidArgument, "right-hand side is not finite");
  const double bnorm = b.norm();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  double rel = 0.0;
  Eigen::VectorXd r = b;
  if (bnorm > 0.0) {
    if (backend_ == Backend::Direct) {
      x = factor_->ldlt.solve(b);
      rel = extended_residual(reduced_, x, b, r) / bnorm;
      for (int refine = 0; refine < 4 && rel > 1e-15; ++refine) {
        const Eigen::VectorXd candidate = x + factor_->ldlt.solve(r);
        Eigen::VectorXd r_candidate(m);
        const double rel_candidate = extended_residual(reduced_, candidate, b, r_candidate) / bnorm;
        if (!(rel_candidate < rel)) break;
        x = candidate;
        r = r_candidate;
        rel = rel_candidate;
      }
    } else {
      // Jacobi-preconditioned conjugate gradients with a fixed iteration
      // order, so results do not depend on the worker count.
      Eigen::VectorXd z = inv_diag_.cwiseProduct(r);
      Eigen::VectorXd p = z;
      double rz = r.dot(z);
      const long max_iter = 10 * static_cast<long>(m) + 100;
      for (long it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd q = reduced_ * p;
        const double pq = p.dot(q);
        if (!(pq > 0.0)) fail(ErrorCode::LinearSolve, "operator is not positive definite", {pq});
        const double step = rz / pq;
        x += step * p;
        r -= step * q;
        if (r.norm() <= 1e-12 * bnorm) break;
        z = inv_diag_.cwiseProduct(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
      }
      rel = extended_residual(reduced_, x, b, r) / bnorm;
    }
  }
  if (!(rel <= kResidualTolerance)) {
    // At high stiffness contrast the rounded solution itself can leave a
    // relative residual above the target. Accept only if the normwise
    // backward error is at working-precision level.
    const double backward = r.lpNorm<Eigen::Infinity>() /
                            (infinity_norm(reduced_) * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>());
    if (!(backward <= kBackwardTolerance)) {
      fail(ErrorCode::LinearSolve, "linear solve did not reach tolerance", {rel, backward});
    }
  }
  for (Eigen::Index k = 0; k < m; ++k) u[free_dofs_[k]] = x[k];
  return u;
}

std::array<double, 4> q1_shape(double xi, double eta) {
  std::array<double, 4> n{};
  for (int a = 0; a < 4; ++a) n[a] = 0.25 * (1.0 + kCorners[a][0] * xi) * (1.0 + kCorners[a][1] * eta);
  return n;
}

const std::array<std::array<double, 2>, 4>& gauss_points() {
  static const double g = 1.0 / std::sqrt(3.0);
  static const std::array<std::array<double, 2>, 4> points{{{-g, -g}, {g, -g}, {g, g}, {-g, g}}};
  return points;
}

namespace {

// Physical shape-function gradients at a reference point.
std::array<std::array<double, 2>, 4> shape_gradients(double hx, double hy, double xi, double eta) {
  std::array<std::array<double, 2>, 4> g{};
  for (int a = 0; a < 4; ++a) {
    g[a][0] = 0.25 * kCorners[a][0] * (1.0 + kCorners[a][1] * eta) * (2.0 / hx);
    g[a][1] = 0.25 * kCorners[a][1] * (1.0 + kCorners[a][0] * xi) * (2.0 / hy);
  }
  return g;
}

void check_psd(const Voigt3& c) {
  if (!c.allFinite()) fail(ErrorCode::InvalidArgument, "constitutive matrix is not finite");
  const double scale = std::abs(c.trace());
  Eigen::SelfAdjointEigenSolver<Voigt3> eig;
  eig.computeDirect(0.5 * (c + c.transpose()), Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  if (lo < -1e-10 * scale) fail(ErrorCode::InvalidArgument, "constitutive matrix is indefinite", {lo});
}

}  // namespace

Eigen::Matrix<double, 3, 8> q1_strain_matrix(double hx, double hy, double xi, double eta) {
  const auto g = shape_gradients(hx, hy, xi, eta);
  Eigen::Matrix<double, 3, 8> b = Eigen::Matrix<double, 3, 8>::Zero();
  for (int a = 0; a < 4; ++a) {
    b(0, 2 * a) = g[a][0];
    b(1, 2 * a + 1) = g[a][1];
    b(2, 2 * a) = g[a][1];
    b(2, 2 * a + 1) = g[a][0];
  }
  return b;
}

Eigen::Matrix<double, 8, 8> q1_element_stiffness(double hx, double hy, std::span<const Voigt3, 4> c_at_gauss) {
  const double w = 0.25 * hx * hy;
  Eigen::Matrix<double, 8, 8> k = Eigen::Matrix<double, 8, 8>::Zero();
  const auto& gp = gauss_points();
  for (int g = 0; g < 4; ++g) {
    const auto b = q1_strain_matrix(hx, hy, gp[g][0], gp[g][1]);
    k.noalias() += w * b.transpose() * c_at_gauss[g] * b;
  }
  return 0.5 * (k + k.transpose());
}

FilterOperator::FilterOperator(const Mesh& mesh, double epsilon, const BoundarySelector& gamma_f,
                               SpdOperator::Backend backend)
    : mesh_(mesh), epsilon_(epsilon), system_([&] {
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
          fail(ErrorCode::InvalidArgument, "filter radius must be finite and non-negative", {epsilon});
        }
        const double hx = mesh.hx(), hy = mesh.hy();
        const double w = 0.25 * hx * hy;
        Eigen::Matrix4d ke = Eigen::Matrix4d::Zero();
        for (const auto& p : gauss_points()) {
          const auto n = q1_shape(p[0], p[1]);
          const auto g = shape_gradients(hx, hy, p[0], p[1]);
          for (int a = 0; a < 4; ++a) {
            for (int c = 0; c < 4; ++c) {
              ke(a, c) += w * (epsilon * epsilon * (g[a][0] * g[c][0] + g[a][1] * g[c][1]) + n[a] * n[c]);
            }
          }
        }
        std::vector<Eigen::Triplet<double>> entries;
        entries.reserve(16 * mesh.cell_count());
        for (int j = 0; j < mesh.ny(); ++j) {
          for (int i = 0; i < mesh.nx(); ++i) {
            const auto nodes = mesh.cell_nodes(i, j);
            for (int a = 0; a < 4; ++a) {
              for (int c = 0; c < 4; ++c) {
                entries.emplace_back(static_cast<Eigen::Index>(nodes[a]), static_cast<Eigen::Index>(nodes[c]),
                                     ke(a, c));
              }
            }
          }
        }
        const auto nn = static_cast<Eigen::Index>(mesh.node_count());
        SparseMatrix a(nn, nn);
        a.setFromTriplets(entries.begin(), entries.end());
        std::vector<bool> constrained(mesh.node_count());
        for (std::size_t v = 0; v < mesh.node_count(); ++v) constrained[v] = gamma_f.contains(mesh, v);
        return SpdOperator(std::move(a), std::move(constrained), backend);
      }()) {}

NodalField FilterOperator::apply(const CellField& eta) const {
  if (!(eta.mesh() == mesh_)) fail(ErrorCode::InvalidArgument, "field lives on a different mesh");
  const int n = eta.channels();
  NodalField out(mesh_, n);
  const double quarter = 0.25 * mesh_.cell_area();
  std::vector<double> rhs(mesh_.node_count());
  for (int c = 0; c < n; ++c) {
    std::fill(rhs.begin(), rhs.end(), 0.0);
    for (int j = 0; j < mesh_.ny(); ++j) {
      for (int i = 0; i < mesh_.nx(); ++i) {
        const double v = quarter * eta(mesh_.cell_index(i, j), c);
        for (auto node : mesh_.cell_nodes(i, j)) rhs[node] += v;
      }
    }
    const auto x = system_.solve(rhs);
    for (std::size_t v = 0; v < x.size(); ++v) out(v, c) = x[v];
  }
  return out;
}

CellField FilterOperator::adjoint(const NodalField& s) const {
  if (!(s.mesh() == mesh_)) fail(ErrorCode::InvalidArgument, "field lives on a different mesh");
  const int n = s.channels();
  CellField out(mesh_, n);
  std::vector<double> rhs(mesh_.node_count());
  for (int c = 0; c < n; ++c) {
    for (std::size_t v = 0; v < rhs.size(); ++v) rhs[v] = s(v, c);
    const auto y = system_.solve(rhs);
    // (B^T y)_e = (area / 4) sum_a y_a; dividing by the cell area leaves the mean.
    for (int j = 0; j < mesh_.ny(); ++j) {
      for (int i = 0; i < mesh_.nx(); ++i) {
        double sum = 0.0;
        for (auto node : mesh_.cell_nodes(i, j)) sum += y[node];
        out(mesh_.cell_index(i, j), c) = 0.25 * sum;
      }
    }
  }
  return out;
}

FilterOperator assemble_filter(const Mesh& mesh, double epsilon, const BoundarySelector& gamma_f) {
  return FilterOperator(mesh, epsilon, gamma_f);
}

SpdOperator assemble_elasticity(const Mesh& mesh, std::span<const Voigt3> c_at_gauss, const BoundarySelector& gamma_d,
                                SpdOperator::Backend backend) {
  if (c_at_gauss.size() != 4 * mesh.cell_count()) {
    fail(ErrorCode::InvalidArgument, "need four constitutive matrices per cell");
  }
  for (const auto& c : c_at_gauss) check_psd(c);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(64 * mesh.cell_count());
  for (int j = 0; j < mesh.ny(); ++j) {
    for (int i = 0; i < mesh.nx(); ++i) {
      const std::size_t e = mesh.cell_index(i, j);
      const auto ke = q1_element_stiffness(mesh.hx(), mesh.hy(), std::span<const Voigt3, 4>(c_at_gauss.data() + 4 * e, 4));
      const auto nodes = mesh.cell_nodes(i, j);
      std::array<Eigen::Index, 8> dofs{};
      for (int a = 0; a < 4; ++a) {
        dofs[2 * a] = static_cast<Eigen::Index>(2 * nodes[a]);
        dofs[2 * a + 1] = static_cast<Eigen::Index>(2 * nodes[a] + 1);
      }
      for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) entries.emplace_back(dofs[r], dofs[c], ke(r, c));
      }
    }
  }
  const auto ndof = static_cast<Eigen::Index>(2 * mesh.node_count());
  SparseMatrix k(ndof, ndof);
  k.setFromTriplets(entries.begin(), entries.end());
  std::vector<bool> constrained(2 * mesh.node_count());
  for (std::size_t v = 0; v < mesh.node_count(); ++v) {
    const bool fixed = gamma_d.contains(mesh, v);
    constrained[2 * v] = fixed;
    constrained[2 * v + 1] = fixed;
  }
  return SpdOperator(std::move(k), std::move(constrained), backend);
}

std::vector<double> solve_spd(const SpdOperator& op, std::span<const double> rhs) { return op.solve(rhs); }

std::vector<std::size_t> select_disc_cells(const Mesh& mesh, std::array<double, 2> center, double radius) {
  std::vector<std::size_t> cells;
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < mesh.cell_count(); ++e) {
    const auto c = mesh.cell_centroid(e);
    const double d = std::hypot(c[0] - center[0], c[1] - center[1]);
    if (d <= radius) cells.push_back(e);
    if (d < best) {
      best = d;
      nearest = e;
    }
  }
  if (cells.empty()) cells.push_back(nearest);
  return cells;
}

std::vector<double> body_force_load(const Mesh& mesh, std::span<const std::size_t> cells, std::array<double, 2> force) {
  std::vector<double> f(2 * mesh.node_count(), 0.0);
  const double quarter = 0.25 * mesh.cell_area();
  const int nx = mesh.nx();
  for (auto e : cells) {
    if (e >= mesh.cell_count()) fail(ErrorCode::InvalidArgument, "load cell index out of range");
    const auto nodes = mesh.cell_nodes(static_cast<int>(e % nx), static_cast<int>(e / nx));
    for (auto v : nodes) {
      f[2 * v] += quarter * force[0];
      f[2 * v + 1] += quarter * force[1];
    }
  }
  return f;
}

ComplianceResult compliance_and_gradient(const MaterialLaw& law, const CellField& eta, const FilterOperator& filter,
                                         std::span<const double> load, const BoundarySelector& gamma_d,
                                         SpdOperator::Backend backend) {
  const Mesh& mesh = filter.mesh();
  const int n = law.channels();
  if (eta.channels() != n) fail(ErrorCode::InvalidArgument, "design and material law disagree on channel count");
  if (load.size() != 2 * mesh.node_count()) fail(ErrorCode::InvalidArgument, "load vector has the wrong size");

  NodalField filtered = filter.apply(eta);
  const std::size_t cells = mesh.cell_count();
  const auto& gp = gauss_points();
  std::array<std::array<double, 4>, 4> shape{};
  for (int g = 0; g < 4; ++g) shape[g] = q1_shape(gp[g][0], gp[g][1]);

  std::vector<Voigt3> c_at(4 * cells);
  std::vector<Voigt3> dc_at(4 * cells * n);
  const int nx = mesh.nx();
  parallel_blocks(cells, [&](std::size_t begin, std::size_t end) {
    std::vector<double> local(n);
    for (std::size_t e = begin; e < end; ++e) {
      const auto nodes = mesh.cell_nodes(static_cast<int>(e % nx), static_cast<int>(e / nx));
      for (int g = 0; g < 4; ++g) {
        for (int c = 0; c < n; ++c) {
          double v = 0.0;
          for (int a = 0; a < 4; ++a) v += shape[g][a] * filtered(nodes[a], c);
          local[c] = v;
        }
        law.evaluate(local, c_at[4 * e + g], std::span<Voigt3>(dc_at.data() + (4 * e + g) * n, n));
      }
    }
  });

  SpdOperator k = assemble_elasticity(mesh, c_at, gamma_d, backend);
  std::vector<double> f(load.begin(), load.end());
  std::vector<double> u = k.solve(f);

  NodalField displacement(mesh, 2);
  for (std::size_t v = 0; v < mesh.node_count(); ++v) {
    displacement(v, 0) = u[2 * v];
    displacement(v, 1) = u[2 * v + 1];
  }
  double value = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!k.constrained()[i]) value += f[i] * u[i];
  }
  if (!std::isfinite(value)) fail(ErrorCode::LinearSolve, "compliance is not finite");

  // Per-cell nodal sensitivities, scattered serially for reproducibility.
  std::vector<double> local_sens(cells * 4 * n, 0.0);
  const double w = 0.25 * mesh.cell_area();
  std::array<Eigen::Matrix<double, 3, 8>, 4> bmat;
  for (int g = 0; g < 4; ++g) bmat[g] = q1_strain_matrix(mesh.hx(), mesh.hy(), gp[g][0], gp[g][1]);
  parallel_blocks(cells, [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) {
      const auto nodes = mesh.cell_nodes(static_cast<int>(e % nx), static_cast<int>(e / nx));
      Eigen::Matrix<double, 8, 1> ue;
      for (int a = 0; a < 4; ++a) {
        ue[2 * a] = u[2 * nodes[a]];
        ue[2 * a + 1] = u[2 * nodes[a] + 1];
      }
      for (int g = 0; g < 4; ++g) {
        const Eigen::Vector3d strain = bmat[g] * ue;
        for (int c = 0; c < n; ++c) {
          const double energy = strain.dot(dc_at[(4 * e + g) * n + c] * strain);
          for (int a = 0; a < 4; ++a) local_sens[(e * 4 + a) * n + c] -= w * shape[g][a] * energy;
        }
      }
    }
  });
  NodalField sens(mesh, n);
  for (std::size_t e = 0; e < cells; ++e) {
    const auto nodes = mesh.cell_nodes(static_cast<int>(e % nx), static_cast<int>(e / nx));
    for (int a = 0; a < 4; ++a) {
      for (int c = 0; c < n; ++c) sens(nodes[a], c) += local_sens[(e * 4 + a) * n + c];
    }
  }

  ComplianceResult result{value, filter.adjoint(sens), std::move(filtered), std::move(displacement)};
  return result;
}

}  // namespace simpl
