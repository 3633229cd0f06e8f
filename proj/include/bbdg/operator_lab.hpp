#pragma once

// Operator diagnostics: singular-value condition numbers, entry extrema,
// spectral identities of the Bernstein operators and counted operation costs.

#include "bbdg/nodal.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bbdg {

/// sigma_1 / sigma_r, singular values below rank_cut * sigma_1 treated as zero.
/// Throws std::invalid_argument for an all-zero operator.
double condition_number(const Eigen::MatrixXd& a, double rank_cut = 1e-10);

struct Extrema {
  double min_all = 0.0;
  double max_all = 0.0;
  /// Over entries with a nonzero value only.
  double min_nonzero = 0.0;
  double max_nonzero = 0.0;
};
Extrema entry_extrema(const Eigen::MatrixXd& a);

/// Operators known to report_operator. Lift and E_L refer to the face-0 block
/// (the four face blocks are row permutations of one another).
///   bernstein_d0, bernstein_dr, bernstein_lift, bernstein_EL, bernstein_L0,
///   nodal_dr, nodal_lift, bernstein_vandermonde
const std::vector<std::string>& operator_names();

/// Dense matrix of a named operator at degree n. Nodal operators use `nodes`.
Eigen::MatrixXd named_operator(const std::string& name, int n, NodeKind nodes = NodeKind::warp_blend);

struct OperatorReport {
  std::string name;
  int degree = 0;
  int rows = 0;
  int cols = 0;
  int nnz_max = 0;
  double nnz_mean = 0.0;
  double cond = 0.0;
  Extrema extrema;
};

OperatorReport report_operator(const std::string& name, int n, NodeKind nodes = NodeKind::warp_blend);

struct IdentityCheck {
  std::string name;
  int degree = 0;
  int dim = 0;
  double max_rel_error = 0.0;
  bool pass = false;
};

/// (a) mass eigenvalues and multiplicities on the dim-simplex,
/// (b) eig(L_0), (c) nonzero spectrum of M^f u = lambda M u,
/// (d) modal form of each (E^n_{n-i})^T on the dim-simplex.
/// (b) and (c) concern the tetrahedron and are included for dim = 3.
std::vector<IdentityCheck> eigen_identities(int n, int dim, double tol = 1e-8);

enum class OpKind { dense_lift, factorized_lift, optimal_lift, sparse_derivative, dense_derivative };

OpKind parse_op_kind(const std::string& s);
std::string to_string(OpKind kind);

/// Multiply-adds per element for one application, counted on the real code path.
std::uint64_t count_madds(OpKind kind, int n);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ComplexitySweep {
  OpKind kind = OpKind::optimal_lift;
  std::vector<int> degrees;
  std::vector<std::uint64_t> madds;
  double slope = 0.0;
};

ComplexitySweep complexity_sweep(int n_min, int n_max, OpKind kind);

/// Operator CSV: operator,N,cond,min,max,nnz_max,slope (slope left empty).
void write_report_header(std::ostream& os);
void write_report_row(std::ostream& os, const OperatorReport& r);
/// Complexity CSV: kind,N,madds,slope.
void write_sweep_header(std::ostream& os);
void write_sweep_rows(std::ostream& os, const ComplexitySweep& s);

/// "row col value" per stored nonzero, 17 significant digits.
void write_operator_coo(std::ostream& os, const Eigen::MatrixXd& a);

}  // namespace bbdg
