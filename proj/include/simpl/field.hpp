#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "simpl/polytope.hpp"

namespace simpl {

/// Uniform rectangular mesh of (0, lx) x (0, ly) with nx x ny cells. Cells and
/// nodes are numbered row-major with x fastest.
class Mesh {
 public:
  Mesh(double lx, double ly, int nx, int ny);

  double lx() const noexcept { return lx_; }
  double ly() const noexcept { return ly_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  double hx() const noexcept { return lx_ / nx_; }
  double hy() const noexcept { return ly_ / ny_; }
  double cell_area() const noexcept { return hx() * hy(); }
  double area() const noexcept { return lx_ * ly_; }

  std::size_t cell_count() const noexcept { return static_cast<std::size_t>(nx_) * ny_; }
  std::size_t node_count() const noexcept { return static_cast<std::size_t>(nx_ + 1) * (ny_ + 1); }
  std::size_t cell_index(int i, int j) const noexcept { return static_cast<std::size_t>(j) * nx_ + i; }
  std::size_t node_index(int i, int j) const noexcept { return static_cast<std::size_t>(j) * (nx_ + 1) + i; }

  /// Nodes of cell (i, j), counter-clockwise from the lower-left corner.
  std::array<std::size_t, 4> cell_nodes(int i, int j) const noexcept;
  std::array<double, 2> cell_centroid(std::size_t cell) const noexcept;
  std::array<double, 2> node_position(std::size_t node) const noexcept;

  bool operator==(const Mesh&) const = default;

 private:
  double lx_, ly_;
  int nx_, ny_;
};

/// Dense multi-channel field with one n-vector per entity (cell or node).
template <class Tag>
class BasicField {
 public:
  BasicField(const Mesh& mesh, int channels, double fill = 0.0);

  const Mesh& mesh() const noexcept { return mesh_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return values_.size() / channels_; }

  double& operator()(std::size_t entity, int channel) { return values_[entity * channels_ + channel]; }
  double operator()(std::size_t entity, int channel) const { return values_[entity * channels_ + channel]; }
  std::span<double> at(std::size_t entity) { return {values_.data() + entity * channels_, static_cast<std::size_t>(channels_)}; }
  std::span<const double> at(std::size_t entity) const {
    return {values_.data() + entity * channels_, static_cast<std::size_t>(channels_)};
  }

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool same_shape(const BasicField& other) const noexcept {
    return mesh_ == other.mesh_ && channels_ == other.channels_;
  }

  /// this += a * x
  BasicField& axpy(double a, const BasicField& x);
  BasicField& scale(double a);

 private:
  Mesh mesh_;
  int channels_;
  std::vector<double> values_;
};

struct CellTag {};
struct NodeTag {};
using CellField = BasicField<CellTag>;
using NodalField = BasicField<NodeTag>;

CellField constant_cell_field(const Mesh& mesh, const Vector& value);

/// Integral of a . b for piecewise-constant fields.
double integrate_dot(const CellField& a, const CellField& b);

/// Sum over cells of cell_area * | min_v d_e . (v - eta_e) |, the first-order
/// stationarity gap of eta with respect to direction d over the vertices of P.
double vertex_gap_residual(const Polytope& polytope, const CellField& d, const CellField& eta);

/// Cellwise design eta = V softmax(V^T psi).
CellField map_field(const Polytope& polytope, const CellField& psi);

/// Smallest barycentric coordinate over all cells of gradient_map(psi).
double min_barycentric(const Polytope& polytope, const CellField& psi);

/// Smallest log-barycentric coordinate, log(lambda_i) = z_i - logsumexp(z).
/// Finite whenever psi is; stays informative after lambda underflows.
double min_log_barycentric(const Polytope& polytope, const CellField& psi);

}  // namespace simpl
