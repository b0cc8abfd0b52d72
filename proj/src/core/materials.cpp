#include "simpl/materials.hpp"

#include <algorithm>
#include <cmath>

#include "simpl/error.hpp"

namespace simpl {

void IsoStack::validate() const {
  if (youngs.size() < 2) fail(ErrorCode::InvalidArgument, "material stack needs at least two phases");
  for (double e : youngs) {
    if (!(e > 0.0)) fail(ErrorCode::InvalidArgument, "Young's moduli must be positive");
  }
  if (!(p >= 1.0)) fail(ErrorCode::InvalidArgument, "SIMP exponent must be >= 1");
  if (!(nu > -1.0 && nu < 1.0)) fail(ErrorCode::InvalidArgument, "Poisson ratio must lie in (-1, 1)");
}

EffectiveModulus eff_youngs(const IsoStack& stack, std::span<const double> eta_tilde) {
  const std::size_t n = stack.youngs.size();
  if (eta_tilde.size() != n) fail(ErrorCode::InvalidArgument, "density channels != phase count");

  std::vector<double> rho(n), active(n);
  for (std::size_t i = 0; i < n; ++i) {
    rho[i] = std::clamp(eta_tilde[i], 0.0, 1.0);
    active[i] = (eta_tilde[i] > 0.0 && eta_tilde[i] < 1.0) ? 1.0 : 0.0;
  }

  EffectiveModulus out{stack.youngs[0], std::vector<double>(n, 0.0)};
  std::vector<double> dt(n);
  double S = rho[0];
  for (std::size_t j = 1; j < n; ++j) {
    S += rho[j];
    if (S <= 0.0) continue;  // (0/0) := 0 leaves E^(j) = E^(j-1)
    const double ratio = rho[j] / S;
    const double t = std::pow(ratio, stack.p);
    const double dt_dratio = stack.p * std::pow(ratio, stack.p - 1.0);
    // d ratio / d rho_i = (delta_ij - ratio) / S for i <= j.
    for (std::size_t i = 0; i <= j; ++i) {
      const double dratio = ((i == j ? 1.0 : 0.0) - ratio) / S;
      dt[i] = dt_dratio * dratio * active[i];
    }
    const double jump = stack.youngs[j] - out.value;
    for (std::size_t i = 0; i < n; ++i) {
      out.gradient[i] = out.gradient[i] * (1.0 - t) + (i <= j ? jump * dt[i] : 0.0);
    }
    out.value = out.value * (1.0 - t) + stack.youngs[j] * t;
  }
  return out;
}

Voigt3 iso_voigt(double youngs, double nu) {
  if (!(youngs > 0.0)) fail(ErrorCode::InvalidArgument, "Young's modulus must be positive");
  if (!(1.0 - nu * nu > 0.0)) fail(ErrorCode::InvalidArgument, "Poisson ratio must satisfy |nu| < 1");
  Voigt3 c;
  c << 1.0, nu, 0.0, nu, 1.0, 0.0, 0.0, 0.0, 0.5 * (1.0 - nu);
  return (youngs / (1.0 - nu * nu)) * c;
}

double OrthoSpec::shear_modulus() const noexcept {
  return std::sqrt(ex * ey) / (2.0 * (1.0 + std::sqrt(nu_xy * nu_yx())));
}

void OrthoSpec::validate() const {
  if (!(ex > 0.0) || !(ey > 0.0)) fail(ErrorCode::InvalidArgument, "orthotropic moduli must be positive");
  if (!(nu_xy >= 0.0)) fail(ErrorCode::InvalidArgument, "orthotropic Poisson ratio must be non-negative");
  if (!(1.0 - nu_xy * nu_yx() > 0.0)) {
    fail(ErrorCode::InvalidArgument, "orthotropic compliance is not positive definite (1 - nu_xy nu_yx <= 0)");
  }
  if (!(p >= 2.0) || std::fmod(p, 2.0) != 0.0) {
    fail(ErrorCode::InvalidArgument, "orientation exponent must be an even integer >= 2");
  }
}

Voigt3 ortho_voigt(const OrthoSpec& spec) {
  spec.validate();
  const double d = 1.0 - spec.nu_xy * spec.nu_yx();
  Voigt3 c = Voigt3::Zero();
  c(0, 0) = spec.ex / d;
  c(1, 1) = spec.ey / d;
  c(0, 1) = c(1, 0) = spec.nu_xy * spec.ey / d;
  c(2, 2) = spec.shear_modulus();
  return c;
}

namespace {

// Fourier coefficients of the rotated plane-stress tensor:
//   C(theta) = A0 + A2c cos 2t + A2s sin 2t + A4c cos 4t + A4s sin 4t.
struct RotationModes {
  Voigt3 a0, a2c, a2s, a4c, a4s;
};

RotationModes rotation_modes(const Voigt3& c) {
  const double q11 = c(0, 0), q22 = c(1, 1), q12 = c(0, 1), q66 = c(2, 2);
  const double u1 = (3.0 * q11 + 3.0 * q22 + 2.0 * q12 + 4.0 * q66) / 8.0;
  const double u2 = 0.5 * (q11 - q22);
  const double u3 = (q11 + q22 - 2.0 * q12 - 4.0 * q66) / 8.0;
  const double u4 = (q11 + q22 + 6.0 * q12 - 4.0 * q66) / 8.0;
  const double u5 = (q11 + q22 - 2.0 * q12 + 4.0 * q66) / 8.0;
  RotationModes m;
  m.a0 << u1, u4, 0, u4, u1, 0, 0, 0, u5;
  m.a2c << u2, 0, 0, 0, -u2, 0, 0, 0, 0;
  m.a2s << 0, 0, 0.5 * u2, 0, 0, 0.5 * u2, 0.5 * u2, 0.5 * u2, 0;
  m.a4c << u3, -u3, 0, -u3, u3, 0, 0, 0, -u3;
  m.a4s << 0, 0, u3, 0, 0, -u3, u3, -u3, 0;
  return m;
}

}  // namespace

Voigt3 rotate_voigt(const Voigt3& c, double theta) {
  const RotationModes m = rotation_modes(c);
  return m.a0 + std::cos(2 * theta) * m.a2c + std::sin(2 * theta) * m.a2s + std::cos(4 * theta) * m.a4c +
         std::sin(4 * theta) * m.a4s;
}

RotatedStiffness rotated_ortho_C(const OrthoSpec& spec, double a, double b, double s, const Voigt3& c_iso) {
  const double p = spec.p;
  RotatedStiffness out;
  out.C = std::pow(s, p) * c_iso;
  out.dC_ds = p * std::pow(s, p - 1.0) * c_iso;
  out.dC_da.setZero();
  out.dC_db.setZero();

  const double r2 = a * a + b * b;
  if (r2 == 0.0) return out;
  const double r = std::sqrt(r2);
  const RotationModes m = rotation_modes(ortho_voigt(spec));

  // r^m and d(r^m)/da = m r^(m-2) a; the m = 0 term has zero derivative.
  auto rpow = [&](double e) { return e == 0.0 ? 1.0 : std::pow(r, e); };
  auto drpow = [&](double e) { return e == 0.0 ? 0.0 : e * std::pow(r, e - 2.0); };

  const double r_p = rpow(p), r_p1 = rpow(p - 1.0), r_p2 = rpow(p - 2.0);
  const double d_p = drpow(p), d_p1 = drpow(p - 1.0), d_p2 = drpow(p - 2.0);
  const Voigt3 two = m.a2c * a + m.a2s * b;
  const Voigt3 four = m.a4c * (a * a - b * b) + m.a4s * (2.0 * a * b);

  out.C += m.a0 * r_p + two * r_p1 + four * r_p2;
  out.dC_da += m.a0 * (d_p * a) + m.a2c * r_p1 + two * (d_p1 * a) + (m.a4c * (2.0 * a) + m.a4s * (2.0 * b)) * r_p2 +
               four * (d_p2 * a);
  out.dC_db += m.a0 * (d_p * b) + m.a2s * r_p1 + two * (d_p1 * b) + (m.a4c * (-2.0 * b) + m.a4s * (2.0 * a)) * r_p2 +
               four * (d_p2 * b);
  return out;
}

IsotropicSimpLaw::IsotropicSimpLaw(IsoStack stack) : stack_(std::move(stack)) {
  stack_.validate();
  unit_ = iso_voigt(1.0, stack_.nu);
}

void IsotropicSimpLaw::evaluate(std::span<const double> eta_tilde, Voigt3& C, std::span<Voigt3> dC) const {
  const EffectiveModulus e = eff_youngs(stack_, eta_tilde);
  C = e.value * unit_;
  for (std::size_t i = 0; i < dC.size(); ++i) dC[i] = e.gradient[i] * unit_;
}

OrthotropicLaw::OrthotropicLaw(OrthoSpec spec, Voigt3 c_apex, Voigt3 floor)
    : spec_(spec), apex_(std::move(c_apex)), floor_(std::move(floor)) {
  spec_.validate();
}

void OrthotropicLaw::evaluate(std::span<const double> eta_tilde, Voigt3& C, std::span<Voigt3> dC) const {
  if (eta_tilde.size() != 3 || dC.size() != 3) fail(ErrorCode::InvalidArgument, "orthotropic law needs 3 channels");
  const RotatedStiffness rs = rotated_ortho_C(spec_, eta_tilde[1], eta_tilde[2], eta_tilde[0], apex_);
  C = rs.C + floor_;
  dC[0] = rs.dC_ds;
  dC[1] = rs.dC_da;
  dC[2] = rs.dC_db;
}

}  // namespace simpl
