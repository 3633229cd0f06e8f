#pragma once

// Collapsed-coordinate Gauss-Jacobi rules on the bi-unit reference simplices.
// A rule built for exact_degree p integrates every polynomial of total
// degree <= p exactly.

#include <array>
#include <vector>

namespace bbdg {

using Point3 = std::array<double, 3>;

struct GaussRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// q-point Gauss-Jacobi rule for the weight (1-x)^alpha (1+x)^beta on [-1,1].
GaussRule1D gauss_jacobi(int q, double alpha, double beta);

/// Gauss-Lobatto-Jacobi(0,0) points on [-1,1], ascending, q = n + 1 of them.
std::vector<double> gauss_lobatto_points(int n);

struct QuadratureRule {
  int dim = 0;
  /// Reference coordinates; only the first `dim` entries are used.
  std::vector<Point3> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

/// Interval [-1,1] (d=1), triangle r,s >= -1, r+s <= 0 (d=2) or the bi-unit
/// tetrahedron (d=3).
QuadratureRule simplex_quadrature(int dim, int exact_degree);

/// Barycentric coordinates (d+1 entries) of a reference point on a d-simplex.
std::array<double, 4> simplex_barycentric(int dim, const Point3& x);

/// Reference measure of the bi-unit d-simplex: 2, 2, 4/3.
double simplex_measure(int dim);

}  // namespace bbdg
