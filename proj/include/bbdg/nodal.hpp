#pragma once

// Lagrange (nodal) reference operators on the bi-unit tetrahedron and the
// change of basis to and from Bernstein coefficients.

#include "bbdg/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbdg {

enum class NodeKind { warp_blend, equispaced };

NodeKind parse_node_kind(const std::string& s);
std::string to_string(NodeKind kind);

/// Largest degree with a tabulated Warp & Blend parameter.
inline constexpr int kMaxWarpBlendDegree = 9;

struct NodeSet {
  int degree = 0;
  NodeKind kind = NodeKind::warp_blend;
  std::vector<Point3> points;
};

/// Interpolation nodes; warp_blend requires N <= 9 (DegreeError otherwise).
NodeSet build_nodes(int n, NodeKind kind);

/// Orthonormal modal basis on the tetrahedron evaluated at points.
Eigen::MatrixXd modal_basis_eval(int n, std::span<const Point3> points);

/// Thrown when a node set's Vandermonde matrix is too ill-conditioned.
class UnisolvenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NodalOperators {
  int degree = 0;
  NodeSet nodes;
  Eigen::MatrixXd V;
  Eigen::MatrixXd Vinv;
  /// Nodal mass (V V^T)^{-1} on the reference element.
  Eigen::MatrixXd mass;
  Eigen::MatrixXd Dr, Ds, Dt;
  /// (L^0 | L^1 | L^2 | L^3), N_p x 4 N^f_p.
  Eigen::MatrixXd lift;
  /// Node indices on face f (lambda_f = 0), in node order; column order of L^f.
  std::array<std::vector<int>, 4> face_nodes;
  double vandermonde_cond = 0.0;

  Eigen::MatrixXd face_lift(int f) const;
};

inline constexpr double kDefaultVandermondeCap = 1e8;

NodalOperators build_nodal_operators(const NodeSet& nodes, double cond_cap = kDefaultVandermondeCap);

/// Dense change of basis between nodal values and Bernstein coefficients,
/// always assembled in double precision.
struct BasisConversion {
  int degree = 0;
  /// B_alpha(node_i): Bernstein coefficients to nodal values.
  Eigen::MatrixXd to_nodal;
  /// Inverse of to_nodal.
  Eigen::MatrixXd to_bernstein;
};

BasisConversion basis_conversion(const NodeSet& nodes);

std::vector<double> nodal_to_bernstein(const BasisConversion& c, std::span<const double> nodal);
std::vector<double> bernstein_to_nodal(const BasisConversion& c, std::span<const double> bernstein);

/// One "r,s,t" line per node, 17 significant digits.
void write_nodes_csv(std::ostream& os, const NodeSet& nodes);

}  // namespace bbdg
