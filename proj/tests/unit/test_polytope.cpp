#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles/oracles.hpp"
#include "simpl/error.hpp"
#include "simpl/polytope.hpp"
#include "support/generators.hpp"

using namespace simpl;
using simpl::testing::Gen;
using simpl::testing::unit_segment;
using simpl::testing::unit_square;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

double logistic(double s) { return 1.0 / (1.0 + std::exp(-s)); }

}  // namespace

TEST_CASE("softmax of equal entries is uniform and never overflows") {
  CHECK((stable_softmax(vec({0, 0, 0})) - Vector::Constant(3, 1.0 / 3)).cwiseAbs().maxCoeff() < 1e-15);
  const Vector big = stable_softmax(vec({1e6, 1e6, 1e6}));
  CHECK(big.allFinite());
  CHECK((big - Vector::Constant(3, 1.0 / 3)).cwiseAbs().maxCoeff() < 1e-15);
  const Vector spread = stable_softmax(vec({1e300, -1e300, 0}));
  CHECK(spread.allFinite());
  CHECK(spread[0] == doctest::Approx(1.0));
}

TEST_CASE("softmax of logarithms returns normalized weights") {
  const Vector s = stable_softmax(vec({std::log(1.0), std::log(2.0), std::log(3.0)}));
  CHECK(s[0] == doctest::Approx(1.0 / 6).epsilon(1e-14));
  CHECK(s[1] == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(s[2] == doctest::Approx(1.0 / 2).epsilon(1e-14));
  CHECK(std::abs(s.sum() - 1.0) < 1e-14);
}

TEST_CASE("softmax rejects non-finite input") {
  CHECK_THROWS_AS(stable_softmax(vec({0, NAN})), Error);
  CHECK_THROWS_AS(stable_softmax(vec({INFINITY, 0})), Error);
}

TEST_CASE("construction validates the vertex list") {
  CHECK_THROWS_AS(Polytope(Matrix{{0.0}}), Error);                   // one vertex
  CHECK_THROWS_AS(Polytope(Matrix{{0, 1, 0}, {0, 0, 0}}), Error);    // duplicate
  CHECK_THROWS_AS(Polytope(Matrix{{0, 1, 2}, {0, 1, 2}}), Error);    // collinear only
  CHECK_THROWS_AS(Polytope(Matrix{{0, NAN}}), Error);
  const Polytope square = unit_square();
  CHECK(square.rank() == 2);
  CHECK(square.full_dimensional());
  CHECK(square.centered_vertices().rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
  CHECK(standard_simplex(3).rank() == 2);
  CHECK_FALSE(standard_simplex(3).full_dimensional());
}

TEST_CASE("gradient map on the unit square and segment and simplex") {
  const auto sq = gradient_map(unit_square(), vec({0, 0}));
  CHECK((sq.point - vec({0.5, 0.5})).norm() < 1e-15);
  for (double s : {-3.0, 0.0, 0.7, 12.0}) {
    CHECK(gradient_map(unit_segment(), vec({s})).point[0] == doctest::Approx(logistic(s)).epsilon(1e-14));
  }
  const auto simplex = gradient_map(standard_simplex(3), vec({std::log(1.0), std::log(2.0), std::log(3.0)}));
  CHECK((simplex.point - vec({1.0 / 6, 1.0 / 3, 0.5})).norm() < 1e-14);
}

TEST_CASE("conjugate values") {
  CHECK(conjugate_value(unit_square(), vec({0, 0})) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(conjugate_value(unit_segment(), vec({0})) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  // Moving psi along a direction invisible to the simplex adds the linear term only.
  const Polytope simplex = standard_simplex(3);
  const Vector psi = vec({0.3, -0.2, 0.5});
  const double t = 1.7;
  CHECK(conjugate_value(simplex, psi + t * Vector::Ones(3)) ==
        doctest::Approx(conjugate_value(simplex, psi) + t).epsilon(1e-14));
}

TEST_CASE("entropy values") {
  CHECK(entropy_value(unit_square(), vec({0.5, 0.5})) == doctest::Approx(-std::log(4.0)).epsilon(1e-12));
  const Vector eta = vec({1.0 / 6, 1.0 / 3, 0.5});
  const double gibbs = (eta.array() * eta.array().log()).sum();
  CHECK(gibbs == doctest::Approx(-1.0114).epsilon(1e-4));
  CHECK(entropy_value(standard_simplex(3), eta) == doctest::Approx(gibbs).epsilon(1e-12));
}

TEST_CASE("entropy matches the brute-force maximum-entropy weights on a hexagon") {
  Matrix v(2, 6);
  for (int k = 0; k < 6; ++k) {
    v(0, k) = std::cos(k * M_PI / 3);
    v(1, k) = std::sin(k * M_PI / 3);
  }
  const Polytope hexagon(v);
  Gen gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector eta = gen.ball(2, 0.8);
    const Vector lambda = oracles::max_entropy_weights(v, eta);
    const double brute = (lambda.array() * lambda.array().log()).sum();
    CHECK(entropy_value(hexagon, eta) == doctest::Approx(brute).epsilon(1e-9));
  }
}

TEST_CASE("Bregman divergence") {
  Gen gen(5);
  const Polytope square = unit_square();
  const Vector v = vec({0.3, 0.6});
  CHECK(std::abs(bregman_divergence(square, v, v)) < 1e-14);

  const double y = logistic(1.0);
  CHECK(bregman_divergence(unit_segment(), vec({0.5}), vec({y})) ==
        doctest::Approx(oracles::fermi_dirac_divergence(0.5, y)).epsilon(1e-12));

  for (int trial = 0; trial < 20; ++trial) {
    const Vector a = gen.vector(2, 0.05, 0.95);
    const Vector b = gen.vector(2, 0.05, 0.95);
    CHECK(bregman_divergence(square, a, b) >= 0.0);

    // Second-order expansion with the Hessian of R = inverse of the map Jacobian.
    const Vector dir = gen.ball(2, 1.0).normalized() * 1e-4;
    const Vector psi_b = inverse_map(square, b);
    const Matrix hess = map_jacobian(square, psi_b).inverse();
    const double taylor = 0.5 * dir.dot(hess * dir);
    CHECK(bregman_divergence(square, b + dir, b) == doctest::Approx(taylor).epsilon(1e-2));
  }
}

TEST_CASE("map Jacobian") {
  const Matrix j0 = map_jacobian(unit_square(), vec({0, 0}));
  CHECK((j0 - 0.25 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);

  Gen gen(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = gen.integer(1, 3);
    const Polytope p = gen.full_polytope(n, gen.integer(n + 1, 12));
    const Vector psi = gen.ball(n, 5.0);
    const Matrix j = map_jacobian(p, psi);
    const double h = 1e-6;
    for (int c = 0; c < n; ++c) {
      Vector e = Vector::Zero(n);
      e[c] = h;
      const Vector fd = (gradient_map(p, psi + e).point - gradient_map(p, psi - e).point) / (2 * h);
      CHECK((fd - j.col(c)).cwiseAbs().maxCoeff() < 1e-6);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(j);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
  }
  // Rank-deficient: positive semidefinite with the invariant direction in the kernel.
  const Matrix js = map_jacobian(standard_simplex(3), vec({0.2, -0.4, 0.1}));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(js);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
  CHECK((js * Vector::Ones(3)).norm() < 1e-14);
}

TEST_CASE("inverse map") {
  CHECK(inverse_map(unit_square(), vec({0.5, 0.5})).norm() < 1e-14);
  const Vector logs = vec({std::log(1.0), std::log(2.0), std::log(3.0)});
  const Vector expected = logs - Vector::Constant(3, logs.mean());
  CHECK((inverse_map(standard_simplex(3), vec({1.0 / 6, 1.0 / 3, 0.5})) - expected).norm() < 1e-10);

  // Off the affine hull, or outside the polytope.
  CHECK_THROWS_AS(inverse_map(standard_simplex(3), vec({0.5, 0.5, 0.5})), Error);
  try {
    inverse_map(unit_segment(), vec({1.2}));
    FAIL("point outside the polytope accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BoundaryProximity);
    CHECK_FALSE(e.data().empty());
  }
}

TEST_CASE("roundtrip through the map for random polytopes") {
  Gen gen(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = gen.integer(1, 3);
    const Polytope p = gen.full_polytope(n, gen.integer(n + 1, 12));
    const Vector psi = gen.ball(n, 10.0);
    const Vector back = inverse_map(p, gradient_map(p, psi).point);
    CHECK((back - psi).norm() < 1e-8);
  }
  // Rank-deficient: recovers the row-space component.
  const Polytope simplex = standard_simplex(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector psi = gen.ball(4, 5.0);
    const Vector back = inverse_map(simplex, gradient_map(simplex, psi).point);
    CHECK((back - simplex.project_to_directions(psi)).norm() < 1e-8);
  }
}

TEST_CASE("interior image and translation equivariance and conjugacy") {
  Gen gen(29);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = gen.integer(1, 3);
    const Polytope p = gen.full_polytope(n, gen.integer(n + 1, 12));
    const Vector psi = gen.ball(n, 30.0);
    const auto bp = gradient_map(p, psi);
    CHECK(bp.lambda.minCoeff() > 0.0);
    CHECK(std::abs(bp.lambda.sum() - 1.0) < 1e-12);
    CHECK((bp.point - p.vertices() * bp.lambda).norm() <= 1e-12 * p.max_abs_coordinate());

    const Vector shift = gen.vector(n, -3.0, 3.0);
    const Polytope moved(p.vertices().colwise() + shift);
    CHECK((gradient_map(moved, psi).point - (bp.point + shift)).cwiseAbs().maxCoeff() < 1e-12);

    const Vector small = gen.ball(n, 10.0);
    const Vector eta = gradient_map(p, small).point;
    const Vector back = inverse_map(p, eta);
    CHECK(std::abs(entropy_value(p, eta) + conjugate_value(p, back) - back.dot(eta)) < 1e-8);
  }
}

TEST_CASE("large latent values saturate at a vertex") {
  Gen gen(31);
  for (int trial = 0; trial < 50; ++trial) {
    const Polytope p = gen.full_polytope(2, gen.integer(3, 8));
    const Vector d = gen.ball(2, 1.0).normalized();
    const Vector scores = p.vertices().transpose() * d;
    Eigen::Index best;
    const double top = scores.maxCoeff(&best);
    double second = -INFINITY;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
      if (i != best) second = std::max(second, scores[i]);
    }
    if (top - second < 0.8) continue;  // nearly tied vertices saturate slowly
    const Vector eta = gradient_map(p, 40.0 * d).point;
    CHECK((eta - p.vertices().col(best)).norm() < 1e-10);
  }
}

TEST_CASE("regular polygon with apex") {
  const Polytope oct = build_regular_polygon_with_apex(8, true);
  CHECK(oct.vertex_count() == 9);
  CHECK(oct.full_dimensional());
  for (int i = 0; i < 8; ++i) {
    const double beta = 2.0 * M_PI * i / 8.0;
    CHECK(std::abs(oct.vertices()(0, i) - std::cos(beta)) < 1e-15);
    CHECK(std::abs(oct.vertices()(1, i) - std::sin(beta)) < 1e-15);
    CHECK(oct.vertices()(2, i) == 0.0);
  }
  CHECK((oct.vertices().col(8) - Eigen::Vector3d(0, 0, 1)).norm() == 0.0);

  const Polytope motor = build_regular_polygon_with_apex(12, false);
  for (int i = 0; i < 12; ++i) {
    CHECK(std::abs(motor.vertices()(0, i) - std::cos(M_PI * i / 6.0)) < 1e-15);
    CHECK(std::abs(motor.vertices()(1, i) - std::sin(M_PI * i / 6.0)) < 1e-15);
  }

  const Polytope square = build_regular_polygon_with_apex(4, true);
  CHECK(std::abs(square.vertices()(0, 1)) < 1e-15);
  CHECK(std::abs(square.vertices()(1, 1) - 1.0) < 1e-15);

  const Polytope first = build_regular_polygon_with_apex(8, true, Eigen::Vector3d(1, 0, 0), ApexLayout::First);
  CHECK((first.vertices().col(0) - Eigen::Vector3d(1, 0, 0)).norm() == 0.0);
  CHECK(first.vertices()(0, 3) == 0.0);
  CHECK(std::abs(first.vertices()(1, 3) - std::cos(M_PI / 2)) < 1e-15);

  CHECK_THROWS_AS(build_regular_polygon_with_apex(2, true), Error);
}

TEST_CASE("polytope text format roundtrip") {
  const Polytope p = build_regular_polygon_with_apex(5, false);
  std::stringstream io;
  write_polytope(io, p);
  const Polytope q = read_polytope(io);
  CHECK((p.vertices() - q.vertices()).norm() == 0.0);

  std::istringstream bad("# header\n0 0\n1 x\n");
  CHECK_THROWS_AS(read_polytope(bad), Error);
  std::istringstream ragged("0 0\n1\n");
  CHECK_THROWS_AS(read_polytope(ragged), Error);
}
