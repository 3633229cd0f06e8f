#pragma once

// Bernstein-Bezier reference operators on the tetrahedron and its faces.
//
// All operators are built in double precision from closed forms. The
// quadrature-based constructions in oracle.hpp exist to check them.

#include "bbdg/quadrature.hpp"
#include "bbdg/sparse_row_operator.hpp"
#include "bbdg/tensor_index.hpp"

#include <Eigen/Dense>

#include <array>
#include <span>
#include <vector>

namespace bbdg {

/// C^n_alpha * prod lambda_i^alpha_i for any simplex dimension.
template <int Dim>
double bernstein_value(const BaryIndex<Dim>& alpha, std::span<const double> lambda);

/// Validated evaluation on the tetrahedron: |alpha| must equal n and lambda
/// must be a barycentric point (components >= -1e-10, sum 1 within 1e-10).
double eval_bernstein(int n, const MultiIndex4& alpha, const std::array<double, 4>& lambda);

/// Rows: reference points, columns: degree-n Bernstein polynomials on the
/// dim-simplex in canonical order.
Eigen::MatrixXd bernstein_vandermonde(int dim, int n, std::span<const Point3> points);

/// Closed-form Bernstein mass matrix on the bi-unit dim-simplex:
/// |T| C^n_a C^n_b / (C^{2n}_{a+b} C(2n+dim, dim)).
Eigen::MatrixXd bernstein_mass(int n, int dim);

/// Mixed mass  int B^m_a B^n_b  between two degrees on the dim-simplex.
Eigen::MatrixXd bernstein_mixed_mass(int m, int n, int dim);

/// 2-D Bernstein mass on the reference face (measure 2).
Eigen::MatrixXd face_mass(int n);

/// i-th distinct eigenvalue of bernstein_mass(n, dim):
/// |T| (n!)^2 dim! / ((n+i+dim)! (n-i)!).
double mass_eigenvalue(int n, int i, int dim);
/// Multiplicity of mass_eigenvalue(n, i, dim): dim P^i - dim P^{i-1}.
int mass_eigenvalue_multiplicity(int i, int dim);

/// One-degree elevation E^m_{m-1} (degree m-1 coefficients to degree m) on the
/// dim-simplex; entry (beta, alpha) = beta_j / m with beta = alpha + e_j.
SparseRowOperator<double> degree_elevation(int m, int dim);
/// One-degree reduction (E^m_{m-1})^T.
SparseRowOperator<double> degree_reduction(int m, int dim);
/// Dense multi-degree reduction (E^n_{n-i})^T as a cascade of one-degree steps.
Eigen::MatrixXd cascaded_reduction(int n, int i, int dim);

/// Derivatives with respect to the four barycentric coordinates. The four
/// operators share a single values array; row alpha of D^i holds alpha_j at
/// column alpha + e_i - e_j.
template <typename Real>
struct BernsteinDerivativeSet {
  int degree = 0;
  std::array<SparseRowOperator<Real>, 4> ops;

  const SparseRowOperator<Real>& operator[](int i) const { return ops[static_cast<std::size_t>(i)]; }

  template <typename To>
  BernsteinDerivativeSet<To> cast() const {
    BernsteinDerivativeSet<To> out;
    out.degree = degree;
    auto values = std::make_shared<const std::vector<To>>(ops[0].values().begin(), ops[0].values().end());
    for (std::size_t i = 0; i < 4; ++i) {
      auto cols = std::make_shared<const std::vector<int>>(ops[i].columns().begin(), ops[i].columns().end());
      out.ops[i] = SparseRowOperator<To>(ops[i].rows(), ops[i].cols(), ops[i].width(), values, cols);
    }
    return out;
  }
};

BernsteinDerivativeSet<double> barycentric_derivatives(int n);

/// Lift scalings l_0 = 1, l_i = (-1)^i C(n,i) / (1+i).
std::vector<double> lift_scalings(int n);

/// L_0 = (n+1)^2/2 (E^{n+1}_n)^T E^{n+1}_n on the face, at most 7 entries/row.
SparseRowOperator<double> build_L0(int n);

/// Factorized Bernstein lift L^f = E_L^f L_0.
template <typename Real>
struct LiftFactorization {
  int degree = 0;
  SparseRowOperator<Real> L0;
  /// N_p x 4 N^f_p; block column f acts on face f's L_0 output.
  SparseRowOperator<Real> EL;
  /// l_0 .. l_n
  std::vector<Real> scalings;
  /// reductions[j-1] = (E^{n-j+1}_{n-j})^T for j = 1..n.
  std::vector<SparseRowOperator<Real>> reductions;
  std::array<FaceLayerOrdering, 4> layers;

  int volume_size() const { return volume_dofs(degree); }
  int face_size() const { return face_dofs(degree); }

  template <typename To>
  LiftFactorization<To> cast() const {
    LiftFactorization<To> out;
    out.degree = degree;
    out.L0 = L0.template cast<To>();
    out.EL = EL.template cast<To>();
    out.scalings.assign(scalings.begin(), scalings.end());
    for (const auto& r : reductions) out.reductions.push_back(r.template cast<To>());
    out.layers = layers;
    return out;
  }
};

LiftFactorization<double> build_EL(int n);

/// Dense single-face block E_L^f (N_p x N^f_p).
Eigen::MatrixXd face_reduction_block(int n, int f);

/// Dense face lift M^{-1} M^f (N_p x N^f_p) from the closed-form masses.
Eigen::MatrixXd bernstein_face_lift(int n, int f);
/// Column concatenation (L^0 | L^1 | L^2 | L^3).
Eigen::MatrixXd bernstein_lift(int n);

template <typename Real>
using FaceFluxes = std::array<std::span<const Real>, 4>;

/// Scratch entries needed by the apply_lift_* functions.
int lift_scratch_size(int n);

/// out = sum_f L^f flux_f via L_0 then the materialized E_L.
template <typename Real>
void apply_lift_factorized(const LiftFactorization<Real>& lf, const FaceFluxes<Real>& flux, std::span<Real> out,
                           std::span<Real> scratch, OpCounter* counter = nullptr);

/// out = sum_f L^f flux_f via L_0 and a slice-by-slice cascade of one-degree
/// reductions, writing layer j scaled by l_j.
template <typename Real>
void apply_lift_optimal(const LiftFactorization<Real>& lf, const FaceFluxes<Real>& flux, std::span<Real> out,
                        std::span<Real> scratch, OpCounter* counter = nullptr);

/// Allocating convenience overloads.
std::vector<double> apply_lift_factorized(const LiftFactorization<double>& lf, const FaceFluxes<double>& flux,
                                          OpCounter* counter = nullptr);
std::vector<double> apply_lift_optimal(const LiftFactorization<double>& lf, const FaceFluxes<double>& flux,
                                       OpCounter* counter = nullptr);

/// Modal-to-Bernstein coefficient map T_n (c^B = T c^L) for the orthonormal
/// modal family of orthopoly.hpp. Rejects n > 12.
Eigen::MatrixXd modal_transform(int n, int dim);

}  // namespace bbdg
