#pragma once

#include "clothsim/common.hpp"

namespace clothsim {

struct ElasticParams {
  double E = 100.0;      // Young's modulus
  double nu = 0.3;       // Poisson's ratio
  double gamma = 500.0;  // shear stiffness
  double kappa = 500.0;  // normal stiffness

  void validate() const;
};

/// F = Q * R with Q a rotation and R upper-triangular, positive diagonal.
struct DeformationState {
  Mat3 F = Mat3::Identity();
  Mat3 Q = Mat3::Identity();
  Mat3 R = Mat3::Identity();
};

Mat3 deformation_gradient(const Mat3& deformed_dirs, const Mat3& D_inv);

/// Householder QR with the diagonal of R forced positive.
/// Throws SimError on singular or inverted (det <= 0) input.
DeformationState qr_decompose(const Mat3& F);

// Energy densities. The total splits over the entries of R: compression
// along the normal, out-of-plane shear, and in-plane stretch.
double psi_normal(double R33, double kappa);
double psi_shear(double R13, double R23, double gamma);
double psi_inplane(double R11, double R12, double R22, double E, double nu);
double psi_total(const DeformationState& state, const ElasticParams& p);

/// dpsi/dF, differentiated analytically through the QR factorization.
Mat3 first_piola(const DeformationState& state, const ElasticParams& p);

/// sigma = (1/det F) * P * F^T. Requires det F > 0.
Mat3 cauchy_stress(const DeformationState& state, const ElasticParams& p);

/// Singular values of [[b11, b12], [0, b22]], sigma1 >= sigma2.
Vec2 upper2x2_singular_values(double b11, double b12, double b22);

}  // namespace clothsim
