#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace xthb {

/// Isotropic thermo-elastic material of one phase.
struct MaterialPhase {
  double E = 1.0;      // Young's modulus
  double nu = 0.0;     // Poisson ratio
  double kappa = 1.0;  // conductivity
  double alpha = 0.0;  // coefficient of thermal expansion
  double T0 = 0.0;     // reference temperature
  bool void_phase = false;

  void validate() const {
    if (void_phase) return;
    if (!(E > 0.0) || !(kappa > 0.0) || !(nu > -1.0 && nu < 0.5))
      throw std::invalid_argument("material requires E > 0, kappa > 0, -1 < nu < 0.5");
  }

  friend bool operator==(const MaterialPhase&, const MaterialPhase&) = default;
};

/// Penalty constants and model switches of the stabilized weak form. Negative
/// c values select the default 2 (p+1)^2 of the owning field's degree.
struct WeakFormConfig {
  double c_D = -1.0;        // Dirichlet penalty constant
  double c_I = -1.0;        // interface penalty constant
  double gamma_G = 0.001;   // ghost multiplier of (kappa or E)
  bool ghost = true;
  bool plane_strain = false;           // plane stress otherwise
  bool inverse_weights = false;        // kappa/meas instead of meas/kappa

  double dirichlet_constant(int p) const { return c_D >= 0.0 ? c_D : 2.0 * (p + 1) * (p + 1); }
  double interface_constant(int p) const { return c_I >= 0.0 ? c_I : 2.0 * (p + 1) * (p + 1); }

  friend bool operator==(const WeakFormConfig&, const WeakFormConfig&) = default;
};

/// Constitutive matrix in Voigt order (xx, yy, xy) for the 2D reduction.
inline Eigen::Matrix3d constitutive_matrix(const MaterialPhase& mat, bool plane_strain) {
  Eigen::Matrix3d D = Eigen::Matrix3d::Zero();
  if (plane_strain) {
    const double c = mat.E / ((1.0 + mat.nu) * (1.0 - 2.0 * mat.nu));
    D(0, 0) = D(1, 1) = c * (1.0 - mat.nu);
    D(0, 1) = D(1, 0) = c * mat.nu;
    D(2, 2) = c * (1.0 - 2.0 * mat.nu) / 2.0;
  } else {
    const double c = mat.E / (1.0 - mat.nu * mat.nu);
    D(0, 0) = D(1, 1) = c;
    D(0, 1) = D(1, 0) = c * mat.nu;
    D(2, 2) = c * (1.0 - mat.nu) / 2.0;
  }
  return D;
}

/// Thermal strain in Voigt order; plane strain carries the out-of-plane
/// constraint through the effective in-plane coefficient (1 + nu) alpha.
inline Eigen::Vector3d thermal_strain(const MaterialPhase& mat, double T, bool plane_strain) {
  const double a = plane_strain ? (1.0 + mat.nu) * mat.alpha : mat.alpha;
  return {a * (T - mat.T0), a * (T - mat.T0), 0.0};
}

}  // namespace xthb
