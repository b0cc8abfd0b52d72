#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace simpl {

/// Plane-stress constitutive matrix in Voigt form (engineering shear strain).
using Voigt3 = Eigen::Matrix3d;

/// Isotropic multi-phase stack. Phase 1 is the void.
struct IsoStack {
  std::vector<double> youngs;  // per phase, all > 0
  double nu = 0.3;
  double p = 3.0;

  void validate() const;
};

struct EffectiveModulus {
  double value = 0.0;
  std::vector<double> gradient;  // d value / d eta_tilde_i
};

/// Multi-material SIMP through cumulative densities S_j = sum_{i<=j} eta_i:
///   E^(1) = E_1,  E^(j) = E^(j-1) [1 - (eta_j/S_j)^p] + E_j (eta_j/S_j)^p.
/// Densities are clipped to [0, 1] first (clipped entries get zero
/// derivative); a ratio with S_j = 0 is taken as 0.
EffectiveModulus eff_youngs(const IsoStack& stack, std::span<const double> eta_tilde);

Voigt3 iso_voigt(double youngs, double nu);

struct OrthoSpec {
  double ex = 5.0;
  double ey = 0.5;
  double nu_xy = 0.3;
  double p = 4.0;

  double nu_yx() const noexcept { return nu_xy * ey / ex; }
  /// sqrt(Ex Ey) / (2 (1 + sqrt(nu_xy nu_yx)))
  double shear_modulus() const noexcept;
  void validate() const;
};

Voigt3 ortho_voigt(const OrthoSpec& spec);

struct RotatedStiffness {
  Voigt3 C;
  Voigt3 dC_da;
  Voigt3 dC_db;
  Voigt3 dC_ds;
};

/// C(a, b, s) = s^p C_iso + r^p C_ani(theta) with (a, b) = r (cos 2 theta,
/// sin 2 theta), i.e. the orientation is stored at double angle so that
/// theta and theta + pi coincide. The rotated tensor is expanded in cos/sin
/// of 2 theta and 4 theta, which turns r^p C_ani(theta) into
///   A0 r^p + (A2c a + A2s b) r^(p-1) + (A4c (a^2 - b^2) + 2 A4s a b) r^(p-2),
/// smooth at r = 0 for even p >= 2.
RotatedStiffness rotated_ortho_C(const OrthoSpec& spec, double a, double b, double s, const Voigt3& c_iso);

/// Voigt matrix of the orthotropic material with its axes rotated by theta.
Voigt3 rotate_voigt(const Voigt3& c, double theta);

/// Material law evaluated at quadrature points: stiffness and its partial
/// derivatives with respect to each filtered density channel.
class MaterialLaw {
 public:
  virtual ~MaterialLaw() = default;
  virtual int channels() const = 0;
  /// `dC` has channels() entries.
  virtual void evaluate(std::span<const double> eta_tilde, Voigt3& C, std::span<Voigt3> dC) const = 0;
};

/// C = E_eff(eta_tilde) * iso_voigt(1, nu).
class IsotropicSimpLaw final : public MaterialLaw {
 public:
  explicit IsotropicSimpLaw(IsoStack stack);
  int channels() const override { return static_cast<int>(stack_.youngs.size()); }
  void evaluate(std::span<const double> eta_tilde, Voigt3& C, std::span<Voigt3> dC) const override;

 private:
  IsoStack stack_;
  Voigt3 unit_;
};

/// Channels (s, a, b): apex phase weight and the double-angle orientation
/// coordinates. C = rotated_ortho_C(spec, a, b, s, c_apex) + floor.
class OrthotropicLaw final : public MaterialLaw {
 public:
  OrthotropicLaw(OrthoSpec spec, Voigt3 c_apex, Voigt3 floor);
  int channels() const override { return 3; }
  void evaluate(std::span<const double> eta_tilde, Voigt3& C, std::span<Voigt3> dC) const override;

 private:
  OrthoSpec spec_;
  Voigt3 apex_;
  Voigt3 floor_;
};

}  // namespace simpl
