#pragma once

// Quadrature-assembled reference operators. Slow and independent of the
// closed forms in bernstein.hpp; used by `check` and the test suite.

#include <Eigen/Dense>

namespace bbdg {

/// int B_a B_b over the bi-unit dim-simplex by Gauss-Jacobi quadrature.
Eigen::MatrixXd quadrature_mass(int n, int dim);

/// Volume-by-face coupling  int_f B^vol_a B^face_b  (N_p x N^f_p), with the
/// face parametrized by the reference triangle of measure 2.
Eigen::MatrixXd quadrature_face_coupling(int n, int f);

/// M^{-1} (volume-by-face coupling), both from quadrature.
Eigen::MatrixXd dense_lift_oracle(int n, int f);

/// M^{-1} (int B_a dB_b/dlambda_i): barycentric derivative i from quadrature.
Eigen::MatrixXd derivative_oracle(int n, int i);

}  // namespace bbdg
