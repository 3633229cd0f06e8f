#pragma once

// Orthonormal (modal) polynomial bases on the bi-unit simplices, built from
// normalized Jacobi polynomials in collapsed coordinates. Modes are ordered
// hierarchically: by total degree first, so the first simplex_dim<d>(m)
// columns span P^m for every m <= n.

#include "bbdg/quadrature.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace bbdg {

/// Jacobi polynomial P_n^{(alpha,beta)}(x), normalized to unit weighted L2 norm.
double jacobi_p(double x, double alpha, double beta, int n);
double grad_jacobi_p(double x, double alpha, double beta, int n);

/// Exponent triple (i,j,k) of each mode, in column order; unused slots are 0.
std::vector<std::array<int, 3>> modal_indices(int dim, int n);

/// Rows: points, columns: modes with total degree <= n.
Eigen::MatrixXd modal_basis(int dim, int n, std::span<const Point3> points);

/// Reference-coordinate gradients of the tetrahedral modes.
struct ModalGradient {
  Eigen::MatrixXd dr, ds, dt;
};
ModalGradient modal_gradient_3d(int n, std::span<const Point3> points);

}  // namespace bbdg
