#pragma once

// Semi-discrete DG for the first-order acoustic wave system on affine tets,
//   (1/kappa) dp/dt + div u = 0,   rho du/dt + grad p = 0,
// with upwind fluxes, mirror (p = 0) boundaries and low-storage RK4.

#include "bbdg/bernstein.hpp"
#include "bbdg/mesh.hpp"
#include "bbdg/nodal.hpp"
#include "bbdg/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbdg {

enum class Basis { nodal, bernstein };
enum class Precision { single, dual };
enum class LiftMode { dense, factorized, optimal };
enum class Exec { serial, parallel };

Basis parse_basis(const std::string& s);
Precision parse_precision(const std::string& s);
LiftMode parse_lift_mode(const std::string& s);
std::string to_string(Basis b);
std::string to_string(Precision p);
std::string to_string(LiftMode m);

template <typename Real>
constexpr Precision precision_of() {
  return sizeof(Real) == sizeof(float) ? Precision::single : Precision::dual;
}

class BasisMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kNumFields = 4;  // p, u1, u2, u3

/// Coefficients laid out as [element][field][dof].
template <typename Real>
struct FieldState {
  int degree = 0;
  int num_elements = 0;
  int np = 0;
  Basis basis = Basis::bernstein;
  double time = 0.0;
  std::vector<Real> data;

  static constexpr Precision precision = precision_of<Real>();

  std::size_t offset(int k, int field) const {
    return (static_cast<std::size_t>(k) * kNumFields + static_cast<std::size_t>(field)) * static_cast<std::size_t>(np);
  }
  std::span<Real> block(int k, int field) { return {data.data() + offset(k, field), static_cast<std::size_t>(np)}; }
  std::span<const Real> block(int k, int field) const {
    return {data.data() + offset(k, field), static_cast<std::size_t>(np)};
  }
};

template <typename Real>
FieldState<Real> zero_state(int degree, int num_elements, Basis basis);

/// Per-element bulk modulus and density.
struct Materials {
  std::vector<double> kappa;
  std::vector<double> rho;

  static Materials uniform(int num_elements, double kappa = 1.0, double rho = 1.0);
  double c(int k) const;
  double impedance(int k) const;
  double max_c() const;
};

/// Reference operators of one basis, cast to the working precision, plus the
/// double-precision helpers for projection, errors and energy.
template <typename Real>
struct DGOperators {
  using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

  Basis basis = Basis::bernstein;
  int degree = 0;
  int np = 0;
  int nfp = 0;

  /// Nodal reference derivatives d/dr, d/ds, d/dt.
  std::array<Mat, 3> D;
  /// Bernstein barycentric derivatives (4-wide sparse rows).
  BernsteinDerivativeSet<Real> bary;
  /// Dense (L^0 | L^1 | L^2 | L^3).
  Mat lift;
  /// Bernstein only.
  LiftFactorization<Real> lift_factors;

  std::array<std::vector<int>, 4> face_positions;
  /// Reference location of each dof (lattice point or node).
  std::vector<Point3> dof_points;

  Eigen::MatrixXd mass;
  NodeSet interp_nodes;
  /// Values at interp_nodes to coefficients.
  Eigen::MatrixXd interp_to_coeff;
  QuadratureRule quad;
  /// Coefficients to values at quad points.
  Eigen::MatrixXd eval_quad;
};

/// Nodal operators use Warp & Blend nodes (N <= 9); Bernstein interpolation
/// uses the same nodes where available, the equispaced lattice beyond.
template <typename Real>
DGOperators<Real> build_dg_operators(int n, Basis basis);

/// Operators, mesh coupling and element constants in the working precision.
template <typename Real>
struct Discretization {
  const Mesh* mesh = nullptr;
  DGOperators<Real> ops;
  TraceMap traces;
  Materials materials;
  LiftMode lift_mode = LiftMode::optimal;

  std::vector<std::array<Real, 9>> G;
  std::vector<std::array<Real, 4>> face_scale;  // J^f / J^k
  std::vector<std::array<std::array<Real, 3>, 4>> normals;
  std::vector<std::array<Real, 4>> tau_p;
  std::vector<std::array<Real, 4>> tau_u;
  std::vector<Real> kappa;
  std::vector<Real> inv_rho;
  /// Offsets of field 0 in FieldState::data for the local and neighbor
  /// traces, indexed like TraceMap::vmapM.
  std::vector<int> trace_minus;
  std::vector<int> trace_plus;

  int num_elements() const { return mesh->num_elements(); }
};

/// Nodal bases accept only LiftMode::dense. The mesh must outlive the result.
template <typename Real>
Discretization<Real> make_discretization(const Mesh& mesh, int n, Basis basis, Materials materials,
                                         LiftMode lift_mode);

/// out += volume terms. Throws BasisMismatch.
template <typename Real>
void volume_rhs(const Discretization<Real>& disc, const FieldState<Real>& q, FieldState<Real>& out,
                Exec exec = Exec::parallel);

/// out += lifted upwind fluxes.
template <typename Real>
void surface_rhs(const Discretization<Real>& disc, const FieldState<Real>& q, FieldState<Real>& out,
                 Exec exec = Exec::parallel);

/// out = full time derivative. Serial and parallel paths give identical bits.
template <typename Real>
void rhs(const Discretization<Real>& disc, const FieldState<Real>& q, FieldState<Real>& out,
         Exec exec = Exec::parallel);

/// 5-stage, 4th-order low-storage Runge-Kutta (Carpenter & Kennedy).
struct LSRK4 {
  static const std::array<double, 5> a;
  static const std::array<double, 5> b;
  static const std::array<double, 5> c;
};

/// Generic low-storage step for dy/dt = f(t, y); res is the second register.
template <typename Real>
void lsrk4_step(std::span<Real> y, std::span<Real> res, double t, double dt,
                const std::function<void(double, std::span<const Real>, std::span<Real>)>& f);

/// One RK step of the DG system; work holds the rhs and residual registers.
template <typename Real>
void lsrk4_step(const Discretization<Real>& disc, FieldState<Real>& q, double dt, FieldState<Real>& k_reg,
                FieldState<Real>& res_reg, Exec exec = Exec::parallel);

inline constexpr double kDefaultCfl = 0.5;

/// cfl * h_min / (c_max * N^2).
double stable_dt(const Mesh& mesh, int n, double c_max, double cfl = kDefaultCfl);

struct ExactSolution {
  double p;
  std::array<double, 3> u;
};

/// Standing mode on [-1/2, 1/2]^3 with rho = kappa = 1.
ExactSolution exact_solution(double x, double y, double z, double t);

/// Interpolates f(x) -> (p, u) at the interpolation nodes of every element.
template <typename Real>
FieldState<Real> project(const Discretization<Real>& disc,
                         const std::function<ExactSolution(const Vec3d&)>& f);

/// Initial data exact_solution(., 0).
template <typename Real>
FieldState<Real> initial_state(const Discretization<Real>& disc);

/// L2 norm of p_h - p_exact(., q.time) with a degree 2N+2 rule.
template <typename Real>
double l2_error(const Discretization<Real>& disc, const FieldState<Real>& q,
                const std::function<double(const Vec3d&, double)>& exact_p);
template <typename Real>
double l2_error(const Discretization<Real>& disc, const FieldState<Real>& q);

/// sum_k J^k (p^T M p / kappa + rho u^T M u).
template <typename Real>
double discrete_energy(const Discretization<Real>& disc, const FieldState<Real>& q);

struct Sample {
  long step = 0;
  double time = 0.0;
  double l2_error = 0.0;
  double energy = 0.0;
};

struct RunOptions {
  double tmax = 1.0;
  double cfl = kDefaultCfl;
  /// Record a sample every this many steps (and always the last step).
  long output_every = 1;
  Exec exec = Exec::parallel;
  /// Abort when the energy exceeds this multiple of its initial value.
  double blowup_factor = 10.0;
};

struct RunResult {
  long steps = 0;
  double dt = 0.0;
  std::vector<Sample> samples;
};

/// Steps q to opts.tmax with ceil(tmax / dt_stable) equal steps.
template <typename Real>
RunResult run_wave(const Discretization<Real>& disc, FieldState<Real>& q, const RunOptions& opts);

void write_time_series_csv(std::ostream& os, std::span<const Sample> samples);

/// Text header (degree, K, basis, precision, time) then raw coefficients.
template <typename Real>
void write_checkpoint(std::ostream& os, const FieldState<Real>& q);
template <typename Real>
FieldState<Real> read_checkpoint(std::istream& is);

}  // namespace bbdg
