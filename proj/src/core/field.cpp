#include "simpl/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "simpl/error.hpp"
#include "simpl/parallel.hpp"

namespace simpl {

Mesh::Mesh(double lx, double ly, int nx, int ny) : lx_(lx), ly_(ly), nx_(nx), ny_(ny) {
  if (nx < 1 || ny < 1) fail(ErrorCode::InvalidArgument, "mesh needs at least one cell per direction");
  if (!(lx > 0.0) || !(ly > 0.0)) fail(ErrorCode::InvalidArgument, "mesh lengths must be positive");
}

std::array<std::size_t, 4> Mesh::cell_nodes(int i, int j) const noexcept {
  return {node_index(i, j), node_index(i + 1, j), node_index(i + 1, j + 1), node_index(i, j + 1)};
}

std::array<double, 2> Mesh::cell_centroid(std::size_t cell) const noexcept {
  const auto i = static_cast<int>(cell % nx_);
  const auto j = static_cast<int>(cell / nx_);
  return {(i + 0.5) * hx(), (j + 0.5) * hy()};
}

std::array<double, 2> Mesh::node_position(std::size_t node) const noexcept {
  const auto i = static_cast<int>(node % (nx_ + 1));
  const auto j = static_cast<int>(node / (nx_ + 1));
  return {i * hx(), j * hy()};
}

template <class Tag>
BasicField<Tag>::BasicField(const Mesh& mesh, int channels, double fill) : mesh_(mesh), channels_(channels) {
  if (channels < 1) fail(ErrorCode::InvalidArgument, "field needs at least one channel");
  const std::size_t count = std::is_same_v<Tag, CellTag> ? mesh.cell_count() : mesh.node_count();
  values_.assign(count * channels, fill);
}

template <class Tag>
BasicField<Tag>& BasicField<Tag>::axpy(double a, const BasicField& x) {
  if (!same_shape(x)) fail(ErrorCode::InvalidArgument, "field shape mismatch in axpy");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
  return *this;
}

template <class Tag>
BasicField<Tag>& BasicField<Tag>::scale(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

template class BasicField<CellTag>;
template class BasicField<NodeTag>;

CellField constant_cell_field(const Mesh& mesh, const Vector& value) {
  CellField f(mesh, static_cast<int>(value.size()));
  for (std::size_t e = 0; e < f.size(); ++e) {
    for (int c = 0; c < f.channels(); ++c) f(e, c) = value(c);
  }
  return f;
}

double integrate_dot(const CellField& a, const CellField& b) {
  if (!a.same_shape(b)) fail(ErrorCode::InvalidArgument, "integrate_dot: field shape mismatch");
  const auto& av = a.values();
  const auto& bv = b.values();
  return a.mesh().cell_area() * deterministic_sum(av.size(), [&](std::size_t i) { return av[i] * bv[i]; });
}

double vertex_gap_residual(const Polytope& polytope, const CellField& d, const CellField& eta) {
  if (!d.same_shape(eta) || d.channels() != polytope.dim()) {
    fail(ErrorCode::InvalidArgument, "vertex_gap_residual: shape mismatch");
  }
  const Matrix& V = polytope.vertices();
  const int n = polytope.dim();
  const int q = polytope.vertex_count();
  const double sum = deterministic_sum(d.size(), [&](std::size_t e) {
    const auto de = d.at(e);
    const auto xe = eta.at(e);
    double base = 0.0;
    for (int c = 0; c < n; ++c) base += de[c] * xe[c];
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < q; ++i) {
      double dv = 0.0;
      for (int c = 0; c < n; ++c) dv += de[c] * V(c, i);
      best = std::min(best, dv - base);
    }
    return std::abs(best);
  });
  return d.mesh().cell_area() * sum;
}

CellField map_field(const Polytope& polytope, const CellField& psi) {
  if (psi.channels() != polytope.dim()) fail(ErrorCode::InvalidArgument, "map_field: channel mismatch");
  CellField eta(psi.mesh(), psi.channels());
  parallel_blocks(psi.size(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> lambda(polytope.vertex_count());
    for (std::size_t e = begin; e < end; ++e) polytope.map_point(psi.at(e).data(), eta.at(e).data(), lambda.data());
  });
  return eta;
}

double min_barycentric(const Polytope& polytope, const CellField& psi) {
  double result = 1.0;
  std::mutex guard;
  parallel_blocks(psi.size(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> lambda(polytope.vertex_count());
    double local = 1.0;
    for (std::size_t e = begin; e < end; ++e) {
      polytope.map_point(psi.at(e).data(), nullptr, lambda.data());
      local = std::min(local, *std::min_element(lambda.begin(), lambda.end()));
    }
    std::lock_guard lock(guard);
    result = std::min(result, local);
  });
  return result;
}

double min_log_barycentric(const Polytope& polytope, const CellField& psi) {
  const Matrix& V = polytope.vertices();
  double result = 0.0;
  std::mutex guard;
  parallel_blocks(psi.size(), [&](std::size_t begin, std::size_t end) {
    double local = 0.0;
    for (std::size_t e = begin; e < end; ++e) {
      const Eigen::Map<const Vector> p(psi.at(e).data(), psi.channels());
      const Vector z = V.transpose() * p;
      local = std::min(local, z.minCoeff() - log_sum_exp(z));
    }
    std::lock_guard lock(guard);
    result = std::min(result, local);
  });
  return result;
}

}  // namespace simpl
