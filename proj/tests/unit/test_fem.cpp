#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "oracles/oracles.hpp"
#include "simpl/error.hpp"
#include "simpl/fem.hpp"
#include "simpl/materials.hpp"
#include "support/generators.hpp"

using namespace simpl;
using simpl::testing::Gen;

namespace {

const BoundarySelector kNone{};
const BoundarySelector kLeft{true, false, false, false};
const BoundarySelector kTopBottom{false, false, true, true};
const BoundarySelector kAll{true, true, true, true};

std::vector<Voigt3> uniform_c(const Mesh& mesh, const Voigt3& c) { return std::vector<Voigt3>(4 * mesh.cell_count(), c); }

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Two-phase SIMP law on one channel, used where the benchmark problems are
// not needed.
std::shared_ptr<MaterialLaw> two_phase(double scale = 1.0) {
  return std::make_shared<IsotropicSimpLaw>(IsoStack{{1e-3 * scale, scale}, 0.3, 3.0});
}

CellField two_phase_design(const Mesh& mesh, Gen& gen) {
  CellField eta(mesh, 2);
  for (std::size_t e = 0; e < mesh.cell_count(); ++e) {
    const double t = gen.uniform(0.1, 0.9);
    eta(e, 0) = 1.0 - t;
    eta(e, 1) = t;
  }
  return eta;
}

std::vector<double> tip_load(const Mesh& mesh) {
  const auto cells = select_disc_cells(mesh, {mesh.lx() - 0.1, 0.5 * mesh.ly()}, 0.05);
  return body_force_load(mesh, cells, {0.0, -1.0});
}

double total_variation(const CellField& f) {
  const Mesh& m = f.mesh();
  double tv = 0.0;
  for (int j = 0; j < m.ny(); ++j) {
    for (int i = 0; i < m.nx(); ++i) {
      if (i + 1 < m.nx()) tv += std::abs(f(m.cell_index(i + 1, j), 0) - f(m.cell_index(i, j), 0));
      if (j + 1 < m.ny()) tv += std::abs(f(m.cell_index(i, j + 1), 0) - f(m.cell_index(i, j), 0));
    }
  }
  return tv;
}

}  // namespace

TEST_CASE("shape functions and quadrature") {
  const auto n = q1_shape(-1, -1);
  CHECK(n[0] == 1.0);
  CHECK(n[1] + n[2] + n[3] == 0.0);
  const auto m = q1_shape(0.3, -0.7);
  CHECK(m[0] + m[1] + m[2] + m[3] == doctest::Approx(1.0));
  const auto& gp = gauss_points();
  CHECK(gp[0][0] < 0);
  CHECK(gp[0][1] < 0);
  CHECK(gp[1][0] > 0);
  CHECK(gp[2][1] > 0);
  CHECK(gp[3][0] < 0);
  CHECK(std::abs(gp[2][0]) == doctest::Approx(1.0 / std::sqrt(3.0)));
}

TEST_CASE("boundary selector") {
  const Mesh mesh(3.0, 1.0, 3, 2);
  CHECK(kLeft.contains(mesh, mesh.node_index(0, 1)));
  CHECK_FALSE(kLeft.contains(mesh, mesh.node_index(1, 1)));
  CHECK(kTopBottom.contains(mesh, mesh.node_index(2, 2)));
  CHECK(kTopBottom.contains(mesh, mesh.node_index(2, 0)));
  CHECK_FALSE(kNone.contains(mesh, 0));
  CHECK(kNone.empty());
}

TEST_CASE("filter of a constant with eps = 0 and no boundary is the constant") {
  const Mesh mesh(3.0, 1.0, 9, 4);
  const FilterOperator filter = assemble_filter(mesh, 0.0, kNone);
  const NodalField out = filter.apply(constant_cell_field(mesh, Vector::Constant(2, 1.0)));
  for (double v : out.values()) CHECK(std::abs(v - 1.0) <= 1e-10);
}

TEST_CASE("filter vanishes on its boundary and stays below one inside") {
  // The bound needs cells finer than the filter length; coarser meshes
  // overshoot next to the boundary.
  const Mesh mesh(3.0, 1.0, 12, 160);
  const FilterOperator filter = assemble_filter(mesh, 0.06 / (2.0 * std::sqrt(3.0)), kTopBottom);
  const NodalField out = filter.apply(constant_cell_field(mesh, Vector::Constant(1, 1.0)));
  for (std::size_t v = 0; v < mesh.node_count(); ++v) {
    if (kTopBottom.contains(mesh, v)) {
      CHECK(out(v, 0) == 0.0);
    } else {
      CHECK(out(v, 0) > 0.0);
      CHECK(out(v, 0) < 1.0);
    }
  }
}

TEST_CASE("filter boundary layer matches the 1D Helmholtz solution") {
  const double eps = 0.05;
  const int ny = 80;  // h = eps / 4
  const Mesh mesh(1.0 / ny, 1.0, 1, ny);
  const FilterOperator filter = assemble_filter(mesh, eps, kTopBottom);
  const NodalField out = filter.apply(constant_cell_field(mesh, Vector::Constant(1, 1.0)));
  for (int j = 1; j < ny; ++j) {
    const double exact = oracles::helmholtz_strip(j * mesh.hy(), 1.0, eps);
    for (int i = 0; i <= 1; ++i) CHECK(std::abs(out(mesh.node_index(i, j), 0) - exact) <= 0.05 * exact);
  }
}

TEST_CASE("filter adjoint identity") {
  Gen gen(31);
  for (const auto& gamma : {kNone, kTopBottom, kLeft}) {
    const Mesh mesh(3.0, 1.0, 7, 4);
    const FilterOperator filter = assemble_filter(mesh, 0.1, gamma);
    for (int trial = 0; trial < 5; ++trial) {
      const CellField eta = gen.field(mesh, 2, -1, 1);
      NodalField s(mesh, 2);
      for (auto& x : s.values()) x = gen.uniform(-1, 1);
      const NodalField fe = filter.apply(eta);
      const double lhs = dot(fe.values(), s.values());
      const double rhs = integrate_dot(eta, filter.adjoint(s));
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    }
    CHECK(filter.adjoint(NodalField(mesh, 3)).values() == std::vector<double>(3 * mesh.cell_count(), 0.0));
  }
}

TEST_CASE("single-cell filter and adjoint reduce to the identity") {
  // With eps = 0 the filtered field equals the cell value at every node, so
  // the pulled-back sensitivity is the plain sum of the nodal entries.
  const Mesh mesh(2.0, 0.5, 1, 1);
  const FilterOperator filter = assemble_filter(mesh, 0.0, kNone);
  const NodalField fe = filter.apply(CellField(mesh, 1, 0.37));
  for (double v : fe.values()) CHECK(std::abs(v - 0.37) <= 1e-12);
  NodalField s(mesh, 1);
  s.values() = {0.6, -0.2, 1.5, 0.1};
  CHECK(std::abs(filter.adjoint(s)(0, 0) * mesh.cell_area() - 2.0) <= 1e-12);
}

TEST_CASE("element stiffness annihilates rigid-body modes") {
  for (auto [hx, hy] : {std::pair{1.0, 1.0}, std::pair{0.25, 0.1}, std::pair{3.0, 0.5}}) {
    const std::array<Voigt3, 4> c{iso_voigt(2.0, 0.3), iso_voigt(1.0, 0.2), ortho_voigt(OrthoSpec{}),
                                  rotate_voigt(ortho_voigt(OrthoSpec{}), 0.4)};
    const auto k = q1_element_stiffness(hx, hy, c);
    const double xs[] = {0, hx, hx, 0}, ys[] = {0, 0, hy, hy};
    Eigen::Matrix<double, 8, 3> modes;
    for (int a = 0; a < 4; ++a) {
      modes.row(2 * a) << 1, 0, -ys[a];
      modes.row(2 * a + 1) << 0, 1, xs[a];
    }
    CHECK((k * modes).cwiseAbs().maxCoeff() <= 1e-12 * k.norm());
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * k.norm());
  }
}

TEST_CASE("element stiffness matches the closed form and 3x3 quadrature") {
  const std::array<Voigt3, 4> unit{iso_voigt(1, 0.3), iso_voigt(1, 0.3), iso_voigt(1, 0.3), iso_voigt(1, 0.3)};
  const Eigen::MatrixXd closed = oracles::q1_stiffness_closed_form(1.0, 0.3);
  CHECK((q1_element_stiffness(1, 1, unit) - closed).cwiseAbs().maxCoeff() <= 1e-12);
  const Eigen::MatrixXd g3 = oracles::q1_stiffness_gauss3(0.3, 0.7, 1.0, 0.3);
  CHECK((q1_element_stiffness(0.3, 0.7, unit) - g3).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("patch test reproduces a linear displacement field") {
  const Mesh mesh(2.0, 1.0, 6, 4);
  const SpdOperator k = assemble_elasticity(mesh, uniform_c(mesh, iso_voigt(1.0, 0.3)), kAll);
  std::vector<double> exact(2 * mesh.node_count());
  for (std::size_t v = 0; v < mesh.node_count(); ++v) {
    const auto x = mesh.node_position(v);
    exact[2 * v] = 0.1 + 0.3 * x[0] - 0.2 * x[1];
    exact[2 * v + 1] = -0.05 + 0.1 * x[0] + 0.4 * x[1];
  }
  const std::vector<double> zero(exact.size(), 0.0);
  const std::vector<double> u = k.solve(zero, exact);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(u[i] - exact[i]) <= 1e-10);
}

TEST_CASE("identity-like system returns the right-hand side") {
  const int n = 12;
  SparseMatrix eye(n, n);
  eye.setIdentity();
  const SpdOperator op(eye, std::vector<bool>(n, false));
  std::vector<double> rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = 0.5 * i - 2.0;
  CHECK(solve_spd(op, rhs) == rhs);
}

TEST_CASE("random SPD system matches a dense factorization") {
  Gen gen(41);
  for (auto backend : {SpdOperator::Backend::Direct, SpdOperator::Backend::ConjugateGradient}) {
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(10, 10, [&]() { return gen.uniform(-1, 1); });
      const Eigen::MatrixXd spd = a * a.transpose() + 10.0 * Eigen::MatrixXd::Identity(10, 10);
      const Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(10, [&]() { return gen.uniform(-1, 1); });
      const Eigen::VectorXd x = spd.llt().solve(b);
      const SpdOperator op(spd.sparseView(), std::vector<bool>(10, false), backend);
      const std::vector<double> u = op.solve(std::vector<double>(b.data(), b.data() + 10));
      for (int i = 0; i < 10; ++i) CHECK(std::abs(u[i] - x[i]) <= 1e-10 * x.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("singular and invalid systems raise errors") {
  const Mesh mesh(1.0, 1.0, 2, 2);
  CHECK_THROWS_AS(
      {
        const SpdOperator k = assemble_elasticity(mesh, uniform_c(mesh, iso_voigt(1.0, 0.3)), kNone);
        k.solve(tip_load(mesh));
      },
      Error);
  Voigt3 bad = iso_voigt(1.0, 0.3);
  bad(2, 2) = -1.0;
  CHECK_THROWS_AS(assemble_elasticity(mesh, uniform_c(mesh, bad), kLeft), Error);
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(3, 3);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(SpdOperator(asym.sparseView(), std::vector<bool>(3, false)), Error);
  CHECK_THROWS_AS(assemble_filter(mesh, -1.0, kNone), Error);
}

TEST_CASE("load selection falls back to the nearest cell") {
  const Mesh fine(3.0, 1.0, 96, 32);
  const auto cells = select_disc_cells(fine, {2.9, 0.5}, 0.05);
  CHECK(cells.size() >= 2);
  for (auto e : cells) {
    const auto c = fine.cell_centroid(e);
    CHECK(std::hypot(c[0] - 2.9, c[1] - 0.5) <= 0.05);
  }
  const Mesh coarse(3.0, 1.0, 12, 4);
  const auto one = select_disc_cells(coarse, {2.9, 0.5}, 0.05);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == coarse.cell_index(11, 1));  // tie between rows 1 and 2 goes to the lower index
  const auto f = body_force_load(coarse, one, {0.0, -1.0});
  double total = 0.0;
  for (std::size_t v = 0; v < coarse.node_count(); ++v) total += f[2 * v + 1];
  CHECK(total == doctest::Approx(-coarse.cell_area()));
}

TEST_CASE("zero load gives zero compliance and gradient") {
  Gen gen(51);
  const Mesh mesh(3.0, 1.0, 6, 2);
  const FilterOperator filter = assemble_filter(mesh, 0.1, kTopBottom);
  const auto law = two_phase();
  const std::vector<double> zero(2 * mesh.node_count(), 0.0);
  const ComplianceResult r = compliance_and_gradient(*law, two_phase_design(mesh, gen), filter, zero, kLeft);
  CHECK(r.value == 0.0);
  for (double g : r.gradient.values()) CHECK(g == 0.0);
}

TEST_CASE("compliance is positive and scales inversely with stiffness") {
  Gen gen(52);
  const Mesh mesh(3.0, 1.0, 12, 4);
  const FilterOperator filter = assemble_filter(mesh, 0.1, kTopBottom);
  const CellField eta = two_phase_design(mesh, gen);
  const auto load = tip_load(mesh);
  const ComplianceResult once = compliance_and_gradient(*two_phase(1.0), eta, filter, load, kLeft);
  const ComplianceResult twice = compliance_and_gradient(*two_phase(2.0), eta, filter, load, kLeft);
  CHECK(once.value > 0.0);
  CHECK(std::abs(twice.value - 0.5 * once.value) <= 1e-10 * once.value);
}

TEST_CASE("compliance gradient matches central differences") {
  Gen gen(53);
  const Mesh mesh(3.0, 1.0, 12, 4);
  const FilterOperator filter = assemble_filter(mesh, 0.1, kTopBottom);
  const auto law = two_phase();
  const auto load = tip_load(mesh);
  const CellField eta = two_phase_design(mesh, gen);
  const ComplianceResult base = compliance_and_gradient(*law, eta, filter, load, kLeft);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t e = static_cast<std::size_t>(gen.integer(0, static_cast<int>(mesh.cell_count()) - 1));
    const int c = gen.integer(0, 1);
    const double h = 1e-5;
    CellField up = eta, down = eta;
    up(e, c) += h;
    down(e, c) -= h;
    const double fd = (compliance_and_gradient(*law, up, filter, load, kLeft).value -
                       compliance_and_gradient(*law, down, filter, load, kLeft).value) /
                      (2 * h);
    const double analytic = base.gradient(e, c) * mesh.cell_area();
    CHECK(std::abs(fd - analytic) <= 1e-4 * std::abs(fd));
  }
}

TEST_CASE("filtering does not increase total variation") {
  Gen gen(54);
  const Mesh mesh(3.0, 1.0, 24, 8);
  const FilterOperator filter = assemble_filter(mesh, 0.05, kNone);
  for (int trial = 0; trial < 5; ++trial) {
    CellField eta(mesh, 1);
    for (std::size_t e = 0; e < mesh.cell_count(); ++e) eta(e, 0) = gen.uniform(0, 1) > 0.5 ? 1.0 : 0.0;
    const NodalField f = filter.apply(eta);
    // cellwise mean of the filtered nodal values
    CellField smooth(mesh, 1);
    for (int j = 0; j < mesh.ny(); ++j)
      for (int i = 0; i < mesh.nx(); ++i) {
        double s = 0.0;
        for (auto v : mesh.cell_nodes(i, j)) s += 0.25 * f(v, 0);
        smooth(mesh.cell_index(i, j), 0) = s;
      }
    CHECK(total_variation(smooth) <= total_variation(eta));
  }
}
