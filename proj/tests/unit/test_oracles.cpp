#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles/oracles.hpp"

using namespace simpl::oracles;

// The reference routines are checked against closed forms so that a bug in
// an oracle cannot silently agree with the same bug in the library.

TEST_CASE("maximum-entropy weights on a segment and a simplex") {
  const MatrixXd seg{{0.0, 1.0}};
  const VectorXd w = max_entropy_weights(seg, VectorXd::Constant(1, 0.3));
  CHECK(w(0) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(w(1) == doctest::Approx(0.3).epsilon(1e-12));
  // For a simplex the weights are the coordinates.
  const MatrixXd tri = MatrixXd::Identity(3, 3);
  const VectorXd x{{0.2, 0.5, 0.3}};
  CHECK((max_entropy_weights(tri, x) - x).cwiseAbs().maxCoeff() <= 1e-12);
  // Square centroid: uniform weights.
  const MatrixXd sq{{0, 1, 1, 0}, {0, 0, 1, 1}};
  CHECK((max_entropy_weights(sq, VectorXd::Constant(2, 0.5)) - VectorXd::Constant(4, 0.25)).cwiseAbs().maxCoeff() <=
        1e-12);
}

TEST_CASE("naive design and bisection") {
  const MatrixXd seg{{0.0, 1.0}};
  CHECK(naive_design(seg, VectorXd::Constant(1, 2.0))(0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
  // sigmoid(1 - mu) = 0.5 on every cell: mu = 1
  const std::vector<VectorXd> psi(4, VectorXd::Constant(1, 1.0));
  CHECK(bisection_multiplier(seg, psi, 0.25, VectorXd::Constant(1, 1.0), 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bisection_multiplier(seg, psi, 0.25, VectorXd::Constant(1, 1.0), 0.9) == 0.0);
}

TEST_CASE("dual ascent on a separable instance") {
  // Unit square with W = I factorizes into two segments: mu_i = psi_i - logit(b_i).
  const MatrixXd sq{{0, 1, 1, 0}, {0, 0, 1, 1}};
  const VectorXd psi{{1.0, 0.5}};
  const VectorXd b{{0.3, 0.4}};
  const VectorXd mu = dual_ascent(sq, psi, 1.0, MatrixXd::Identity(2, 2), b);
  for (int i = 0; i < 2; ++i) CHECK(mu(i) == doctest::Approx(psi(i) - std::log(b(i) / (1 - b(i)))).epsilon(1e-7));
}

TEST_CASE("quadratic KKT point") {
  const VectorXd t{{0.2, 0.9, 1.4}};
  const VectorXd free = quadratic_kkt(t, 1.0, 10.0);
  CHECK(free(2) == 1.0);
  CHECK(free(0) == doctest::Approx(0.2));
  const VectorXd tight = quadratic_kkt(t, 1.0, 1.0);
  CHECK(tight.sum() == doctest::Approx(1.0).epsilon(1e-12));
  // shift nu = 0.65 gives (0, 0.25, 0.75)
  CHECK(tight(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(tight(1) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(tight(2) == doctest::Approx(0.75).epsilon(1e-10));
}

TEST_CASE("Helmholtz strip solution") {
  const double eps = 0.1;
  CHECK(helmholtz_strip(0.0, 1.0, eps) == doctest::Approx(0.0));
  CHECK(helmholtz_strip(1.0, 1.0, eps) == doctest::Approx(0.0));
  const double mid = 1.0 - 1.0 / std::cosh(0.5 / eps);
  CHECK(helmholtz_strip(0.5, 1.0, eps) == doctest::Approx(mid).epsilon(1e-14));
  // -eps^2 u'' + u = 1 by second differences
  const double y = 0.23, h = 1e-4;
  const double upp = (helmholtz_strip(y + h, 1, eps) - 2 * helmholtz_strip(y, 1, eps) + helmholtz_strip(y - h, 1, eps)) / (h * h);
  CHECK(-eps * eps * upp + helmholtz_strip(y, 1, eps) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("element stiffness oracles agree") {
  CHECK((q1_stiffness_gauss3(1, 1, 1, 0.3) - q1_stiffness_closed_form(1, 0.3)).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(q1_stiffness_closed_form(1, 0.3)(0, 0) == doctest::Approx((0.5 - 0.3 / 6) / (1 - 0.09)));
}

TEST_CASE("Voigt rotation by a quarter turn swaps the axes") {
  Eigen::Matrix3d c;
  c << 5, 0.15, 0, 0.15, 0.5, 0, 0, 0, 0.7;
  const Eigen::Matrix3d q = voigt_rotation(c, M_PI / 2);
  CHECK(q(0, 0) == doctest::Approx(0.5));
  CHECK(q(1, 1) == doctest::Approx(5.0));
  CHECK(q(2, 2) == doctest::Approx(0.7));
  CHECK((voigt_rotation(c, 0.0) - c).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Fermi-Dirac divergence") {
  CHECK(fermi_dirac_divergence(0.3, 0.3) == doctest::Approx(0.0));
  CHECK(fermi_dirac_divergence(0.5, 0.25) == doctest::Approx(0.5 * std::log(2.0) + 0.5 * std::log(0.5 / 0.75)));
}

TEST_CASE("oracle registry") {
  const auto list = names();
  CHECK(list.size() == 8);
  for (const auto& n : list) CHECK_FALSE(run(n).empty());
  CHECK_THROWS_AS(run("nope"), std::invalid_argument);
}
