#include "clothsim/constitutive.hpp"

#include <cmath>

namespace clothsim {

void ElasticParams::validate() const {
  if (!(E > 0.0)) throw ConfigError("Young's modulus must be > 0");
  if (!(nu >= 0.0 && nu < 0.5)) throw ConfigError("Poisson's ratio must be in [0, 0.5)");
  if (!(gamma >= 0.0)) throw ConfigError("shear stiffness must be >= 0");
  if (!(kappa >= 0.0)) throw ConfigError("normal stiffness must be >= 0");
}

Mat3 deformation_gradient(const Mat3& deformed_dirs, const Mat3& D_inv) {
  return deformed_dirs * D_inv;
}

DeformationState qr_decompose(const Mat3& F) {
  Eigen::HouseholderQR<Mat3> qr(F);
  DeformationState state;
  state.F = F;
  state.Q = qr.householderQ();
  state.R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < 3; ++k) {
    if (state.R(k, k) < 0.0) {
      state.R.row(k) = -state.R.row(k);
      state.Q.col(k) = -state.Q.col(k);
    }
    if (!(state.R(k, k) > 0.0)) {
      throw SimError("deformation gradient is singular: R(" + std::to_string(k + 1) + "," +
                     std::to_string(k + 1) + ") = " + std::to_string(state.R(k, k)));
    }
  }
  if (state.Q.determinant() < 0.0) {
    throw SimError("deformation gradient is inverted: det F = " + std::to_string(F.determinant()));
  }
  return state;
}

double psi_normal(double R33, double kappa) {
  if (R33 > 1.0) return 0.0;
  const double c = 1.0 - R33;
  return kappa / 3.0 * c * c * c;
}

double psi_shear(double R13, double R23, double gamma) {
  return 0.5 * gamma * (R13 * R13 + R23 * R23);
}

Vec2 upper2x2_singular_values(double b11, double b12, double b22) {
  // Closed form for 2x2: sigma = avg of the polar-decomposition radii.
  const double p = std::hypot(b11 + b22, b12);
  const double q = std::hypot(b11 - b22, b12);
  return Vec2(0.5 * (p + q), 0.5 * (p - q));
}

double psi_inplane(double R11, double R12, double R22, double E, double nu) {
  const Vec2 sigma = upper2x2_singular_values(R11, R12, R22);
  const double mu = E / (2.0 * (1.0 + nu));
  const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double s1 = sigma[0] - 1.0;
  const double s2 = sigma[1] - 1.0;
  const double j = sigma[0] * sigma[1] - 1.0;
  return mu * (s1 * s1 + s2 * s2) + 0.5 * lambda * j * j;
}

double psi_total(const DeformationState& state, const ElasticParams& p) {
  const Mat3& R = state.R;
  return psi_normal(R(2, 2), p.kappa) + psi_shear(R(0, 2), R(1, 2), p.gamma) +
         psi_inplane(R(0, 0), R(0, 1), R(1, 1), p.E, p.nu);
}

namespace {

// d(psi_inplane)/dB for the full 2x2 matrix B (fixed corotated form):
//   2 mu (B - polar(B)) + lambda (J - 1) J B^{-T},
// where J B^{-T} = adj(B)^T needs no inverse.
Mat2 inplane_piola(const Mat2& B, double E, double nu) {
  const double mu = E / (2.0 * (1.0 + nu));
  const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double a = B(0, 0) + B(1, 1);
  const double b = B(0, 1) - B(1, 0);
  const double scale = std::hypot(a, b);
  Mat2 rot;
  rot << a, b, -b, a;
  rot /= scale;
  const double J = B.determinant();
  Mat2 adjT;
  adjT << B(1, 1), -B(1, 0), -B(0, 1), B(0, 0);
  return 2.0 * mu * (B - rot) + lambda * (J - 1.0) * adjT;
}

}  // namespace

Mat3 first_piola(const DeformationState& state, const ElasticParams& p) {
  const Mat3& R = state.R;

  // S = dpsi/dR on the upper triangle; the lower triangle never enters
  // because dR stays upper-triangular.
  Mat3 S = Mat3::Zero();
  Mat2 B;
  B << R(0, 0), R(0, 1), 0.0, R(1, 1);
  const Mat2 P2 = inplane_piola(B, p.E, p.nu);
  S(0, 0) = P2(0, 0);
  S(0, 1) = P2(0, 1);
  S(1, 1) = P2(1, 1);
  S(0, 2) = p.gamma * R(0, 2);
  S(1, 2) = p.gamma * R(1, 2);
  if (R(2, 2) <= 1.0) {
    const double c = 1.0 - R(2, 2);
    S(2, 2) = -p.kappa * c * c;
  }

  // Chain rule through F = QR. With M = S R^T, the lower-triangular
  // correction W accounts for the rotation differential dQ:
  //   P = Q (S - W),  W_ij resolved from the antisymmetry of Q^T dQ.
  const Mat3 M = S * R.transpose();
  const double a21 = M(1, 0) - M(0, 1);
  const double a31 = M(2, 0) - M(0, 2);
  const double a32 = M(2, 1) - M(1, 2);
  Mat3 W = Mat3::Zero();
  W(1, 0) = a21 / R(0, 0);
  W(2, 1) = a32 / R(1, 1);
  W(2, 0) = (a31 - a32 * R(0, 1) / R(1, 1)) / R(0, 0);
  return state.Q * (S - W);
}

Mat3 cauchy_stress(const DeformationState& state, const ElasticParams& p) {
  const double det = state.R(0, 0) * state.R(1, 1) * state.R(2, 2);
  if (!(det > 0.0)) {
    throw SimError("cauchy stress requires det F > 0, got " + std::to_string(det));
  }
  return first_piola(state, p) * state.F.transpose() / det;
}

}  // namespace clothsim
