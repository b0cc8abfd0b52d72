#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "simpl/error.hpp"
#include "simpl/export.hpp"
#include "simpl/field.hpp"
#include "support/generators.hpp"

using namespace simpl;
using simpl::testing::Gen;
using simpl::testing::unit_square;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Exhaustive per-cell vertex scan, written out independently of the library.
double brute_gap(const Matrix& v, const CellField& d, const CellField& eta) {
  double total = 0.0;
  for (std::size_t e = 0; e < d.size(); ++e) {
    double best = INFINITY;
    for (int j = 0; j < v.cols(); ++j) {
      double s = 0.0;
      for (int c = 0; c < d.channels(); ++c) s += d(e, c) * (v(c, j) - eta(e, c));
      best = std::min(best, s);
    }
    total += d.mesh().cell_area() * std::abs(best);
  }
  return total;
}

}  // namespace

TEST_CASE("mesh geometry and numbering") {
  const Mesh mesh(3.0, 1.0, 6, 2);
  CHECK(mesh.cell_count() == 12);
  CHECK(mesh.node_count() == 21);
  CHECK(mesh.cell_area() == doctest::Approx(0.25));
  const auto nodes = mesh.cell_nodes(1, 1);
  CHECK(nodes[0] == mesh.node_index(1, 1));
  CHECK(nodes[1] == mesh.node_index(2, 1));
  CHECK(nodes[2] == mesh.node_index(2, 2));
  CHECK(nodes[3] == mesh.node_index(1, 2));
  const auto c = mesh.cell_centroid(mesh.cell_index(5, 1));
  CHECK(c[0] == doctest::Approx(2.75));
  CHECK(c[1] == doctest::Approx(0.75));
  CHECK_THROWS_AS(Mesh(1.0, 1.0, 0, 1), Error);
  CHECK_THROWS_AS(Mesh(-1.0, 1.0, 1, 1), Error);
}

TEST_CASE("integrate_dot of constants") {
  for (int nx : {1, 3, 17}) {
    const Mesh mesh(3.0, 1.0, nx, 2);
    const CellField one = constant_cell_field(mesh, vec({1.0}));
    CHECK(integrate_dot(one, one) == doctest::Approx(3.0).epsilon(1e-14));
  }
  const Mesh mesh(3.0, 1.0, 4, 2);
  CHECK(integrate_dot(constant_cell_field(mesh, vec({1, 0})), constant_cell_field(mesh, vec({0, 1}))) == 0.0);
}

TEST_CASE("integrate_dot matches an explicit sum on a 2x2 grid") {
  Gen gen(11);
  const Mesh mesh(2.0, 1.5, 2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const CellField a = gen.field(mesh, 3, -2, 2);
    const CellField b = gen.field(mesh, 3, -2, 2);
    double sum = 0.0;
    for (int e = 0; e < 4; ++e)
      for (int c = 0; c < 3; ++c) sum += a.values()[3 * e + c] * b.values()[3 * e + c];
    CHECK(integrate_dot(a, b) == doctest::Approx(0.75 * sum).epsilon(1e-14));
  }
}

TEST_CASE("integrate_dot rejects mismatched shapes") {
  const Mesh mesh(1.0, 1.0, 2, 2);
  CHECK_THROWS_AS(integrate_dot(CellField(mesh, 2), CellField(mesh, 3)), Error);
  CHECK_THROWS_AS(integrate_dot(CellField(mesh, 2), CellField(Mesh(1.0, 1.0, 2, 3), 2)), Error);
}

TEST_CASE("vertex gap examples") {
  const Polytope square = unit_square();
  const Mesh mesh(1.0, 1.0, 3, 3);
  const CellField eta = constant_cell_field(mesh, vec({0.5, 0.5}));
  CHECK(vertex_gap_residual(square, constant_cell_field(mesh, vec({1, 0})), eta) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(vertex_gap_residual(square, CellField(mesh, 2), eta) == 0.0);
}

TEST_CASE("vertex gap matches a brute-force vertex scan") {
  Gen gen(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = gen.integer(1, 3);
    const Polytope p = gen.full_polytope(n, gen.integer(n + 1, 8));
    const Mesh mesh(gen.uniform(0.5, 2), gen.uniform(0.5, 2), gen.integer(1, 3), gen.integer(1, 3));
    const CellField psi = gen.field(mesh, n, -3, 3);
    const CellField eta = map_field(p, psi);
    const CellField d = gen.field(mesh, n, -5, 5);
    const double expected = brute_gap(p.vertices(), d, eta);
    CHECK(vertex_gap_residual(p, d, eta) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("vertex gap is nonnegative and positively homogeneous") {
  Gen gen(8);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = gen.integer(1, 3);
    const Polytope p = gen.full_polytope(n, gen.integer(n + 1, 6));
    const Mesh mesh(1.0, 1.0, 2, 2);
    const CellField eta = map_field(p, gen.field(mesh, n, -4, 4));
    CellField d = gen.field(mesh, n, -1, 1);
    const double base = vertex_gap_residual(p, d, eta);
    CHECK(base >= 0.0);
    const double t = gen.uniform(0.0, 10.0);
    CellField scaled = d;
    scaled.scale(t);
    CHECK(vertex_gap_residual(p, scaled, eta) == doctest::Approx(t * base).epsilon(1e-12));
  }
}

TEST_CASE("vertex gap vanishes at first-order stationary points") {
  // eta at a vertex of the square with d pointing into the polytope.
  const Polytope square = unit_square();
  const Mesh mesh(1.0, 1.0, 2, 1);
  const CellField corner = constant_cell_field(mesh, vec({0, 0}));
  CHECK(vertex_gap_residual(square, constant_cell_field(mesh, vec({1.0, 2.0})), corner) == 0.0);
  // d normal to a face at a face point.
  const CellField edge = constant_cell_field(mesh, vec({0.3, 1.0}));
  CHECK(vertex_gap_residual(square, constant_cell_field(mesh, vec({0.0, -1.0})), edge) == 0.0);
}

TEST_CASE("map_field and barycentric diagnostics") {
  const Polytope square = unit_square();
  const Mesh mesh(1.0, 1.0, 2, 2);
  CellField psi(mesh, 2);
  const CellField eta = map_field(square, psi);
  for (double x : eta.values()) CHECK(x == doctest::Approx(0.5));
  CHECK(min_barycentric(square, psi) == doctest::Approx(0.25));
  CHECK(min_log_barycentric(square, psi) == doctest::Approx(std::log(0.25)));
  psi(3, 0) = 800.0;  // lambda underflows, the log stays finite
  CHECK(min_barycentric(square, psi) == 0.0);
  CHECK(min_log_barycentric(square, psi) == doctest::Approx(-800.0 - std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("field arithmetic") {
  const Mesh mesh(1.0, 1.0, 2, 1);
  CellField a = constant_cell_field(mesh, vec({1, 2}));
  const CellField b = constant_cell_field(mesh, vec({3, 4}));
  a.axpy(2.0, b);
  CHECK(a(1, 0) == 7.0);
  CHECK(a(0, 1) == 10.0);
  a.scale(0.5);
  CHECK(a(0, 0) == 3.5);
  CHECK_THROWS_AS(a.axpy(1.0, CellField(mesh, 3)), Error);
}

TEST_CASE("VTK export is full precision") {
  const Mesh mesh(3.0, 1.0, 3, 2);
  CellField f(mesh, 2);
  for (std::size_t i = 0; i < f.values().size(); ++i) f.values()[i] = 0.1 * static_cast<double>(i) + 1.0 / 3.0;
  NodalField u(mesh, 2, 0.25);
  std::ostringstream out;
  write_vtk(out, mesh, {{"eta", &f}}, {{"u", &u, true}});
  const std::string text = out.str();
  CHECK(text.find("DATASET STRUCTURED_POINTS") != std::string::npos);
  CHECK(text.find("DIMENSIONS 4 3 1") != std::string::npos);
  CHECK(text.find("CELL_DATA 6") != std::string::npos);
  CHECK(text.find("SCALARS eta_1 double 1") != std::string::npos);
  CHECK(text.find("SCALARS eta_2 double 1") != std::string::npos);
  CHECK(text.find("POINT_DATA 12") != std::string::npos);
  CHECK(text.find("VECTORS u double") != std::string::npos);

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line) && line != "SCALARS eta_2 double 1") {
  }
  std::getline(in, line);  // lookup table
  for (std::size_t e = 0; e < mesh.cell_count(); ++e) {
    double v = 0.0;
    in >> v;
    CHECK(v == f(e, 1));
  }
}

TEST_CASE("PGM export maps the channel range to 0..255") {
  const Mesh mesh(2.0, 1.0, 2, 2);
  CellField f(mesh, 1);
  f(mesh.cell_index(0, 0), 0) = -1.0;
  f(mesh.cell_index(1, 0), 0) = 0.0;
  f(mesh.cell_index(0, 1), 0) = 1.0;
  f(mesh.cell_index(1, 1), 0) = 0.5;
  std::ostringstream out;
  write_pgm(out, f, 0);
  const std::string s = out.str();
  CHECK(s.rfind("P5\n# min=-1 max=1\n2 2\n255\n", 0) == 0);
  const std::string pixels = s.substr(s.size() - 4);
  // top image row holds the largest y
  CHECK(static_cast<unsigned char>(pixels[0]) == 255);
  CHECK(static_cast<unsigned char>(pixels[1]) == 191);
  CHECK(static_cast<unsigned char>(pixels[2]) == 0);
  CHECK(static_cast<unsigned char>(pixels[3]) == 128);
  CHECK_THROWS_AS(write_pgm(out, f, 1), Error);
}
