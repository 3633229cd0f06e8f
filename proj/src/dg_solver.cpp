#include "bbdg/dg_solver.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace bbdg {

Basis parse_basis(const std::string& s) {
  if (s == "nodal") return Basis::nodal;
  if (s == "bernstein") return Basis::bernstein;
  throw std::invalid_argument("unknown basis '" + s + "' (nodal | bernstein)");
}

Precision parse_precision(const std::string& s) {
  if (s == "single") return Precision::single;
  if (s == "double") return Precision::dual;
  throw std::invalid_argument("unknown precision '" + s + "' (single | double)");
}

LiftMode parse_lift_mode(const std::string& s) {
  if (s == "dense") return LiftMode::dense;
  if (s == "factorized") return LiftMode::factorized;
  if (s == "optimal") return LiftMode::optimal;
  throw std::invalid_argument("unknown lift mode '" + s + "' (dense | factorized | optimal)");
}

std::string to_string(Basis b) { return b == Basis::nodal ? "nodal" : "bernstein"; }
std::string to_string(Precision p) { return p == Precision::single ? "single" : "double"; }
std::string to_string(LiftMode m) {
  switch (m) {
    case LiftMode::dense: return "dense";
    case LiftMode::factorized: return "factorized";
    default: return "optimal";
  }
}

template <typename Real>
FieldState<Real> zero_state(int degree, int num_elements, Basis basis) {
  FieldState<Real> q;
  q.degree = degree;
  q.num_elements = num_elements;
  q.np = volume_dofs(degree);
  q.basis = basis;
  q.data.assign(static_cast<std::size_t>(num_elements) * kNumFields * static_cast<std::size_t>(q.np), Real(0));
  return q;
}

Materials Materials::uniform(int num_elements, double kappa, double rho) {
  if (!(kappa > 0.0) || !(rho > 0.0)) throw std::invalid_argument("materials: kappa and rho must be positive");
  Materials m;
  m.kappa.assign(static_cast<std::size_t>(num_elements), kappa);
  m.rho.assign(static_cast<std::size_t>(num_elements), rho);
  return m;
}

double Materials::c(int k) const {
  return std::sqrt(kappa[static_cast<std::size_t>(k)] / rho[static_cast<std::size_t>(k)]);
}

double Materials::impedance(int k) const { return rho[static_cast<std::size_t>(k)] * c(k); }

double Materials::max_c() const {
  double c_max = 0.0;
  for (std::size_t k = 0; k < kappa.size(); ++k) c_max = std::max(c_max, c(static_cast<int>(k)));
  return c_max;
}

template <typename Real>
DGOperators<Real> build_dg_operators(int n, Basis basis) {
  check_degree(n);
  if (basis == Basis::nodal && n > kMaxWarpBlendDegree) {
    throw DegreeError("nodal basis needs Warp & Blend nodes, available for N <= " +
                      std::to_string(kMaxWarpBlendDegree));
  }
  DGOperators<Real> ops;
  ops.basis = basis;
  ops.degree = n;
  ops.np = volume_dofs(n);
  ops.nfp = face_dofs(n);
  ops.interp_nodes = build_nodes(n, n <= kMaxWarpBlendDegree ? NodeKind::warp_blend : NodeKind::equispaced);
  ops.quad = simplex_quadrature(3, 2 * n + 2);

  if (basis == Basis::nodal) {
    const auto no = build_nodal_operators(ops.interp_nodes);
    ops.D[0] = no.Dr.template cast<Real>();
    ops.D[1] = no.Ds.template cast<Real>();
    ops.D[2] = no.Dt.template cast<Real>();
    ops.lift = no.lift.template cast<Real>();
    ops.face_positions = no.face_nodes;
    ops.dof_points = ops.interp_nodes.points;
    ops.mass = no.mass;
    ops.interp_to_coeff = Eigen::MatrixXd::Identity(ops.np, ops.np);
    ops.eval_quad = modal_basis_eval(n, ops.quad.points) * no.Vinv;
    return ops;
  }

  ops.bary = barycentric_derivatives(n).template cast<Real>();
  ops.lift = bernstein_lift(n).template cast<Real>();
  ops.lift_factors = build_EL(n).template cast<Real>();
  for (int f = 0; f < 4; ++f) ops.face_positions[static_cast<std::size_t>(f)] = face_trace_indices(n, f);
  for (const auto& a : simplex_indices<3>(n)) {
    ops.dof_points.push_back({2.0 * a[1] / n - 1.0, 2.0 * a[2] / n - 1.0, 2.0 * a[3] / n - 1.0});
  }
  ops.mass = bernstein_mass(n, 3);
  ops.interp_to_coeff = bernstein_vandermonde(3, n, ops.interp_nodes.points).partialPivLu().inverse();
  ops.eval_quad = bernstein_vandermonde(3, n, ops.quad.points);
  return ops;
}

template <typename Real>
Discretization<Real> make_discretization(const Mesh& mesh, int n, Basis basis, Materials materials,
                                         LiftMode lift_mode) {
  const int K = mesh.num_elements();
  if (static_cast<int>(materials.kappa.size()) != K || static_cast<int>(materials.rho.size()) != K) {
    throw std::invalid_argument("materials: one value per element required");
  }
  for (int k = 0; k < K; ++k) {
    if (!(materials.kappa[static_cast<std::size_t>(k)] > 0.0) || !(materials.rho[static_cast<std::size_t>(k)] > 0.0)) {
      throw std::invalid_argument("materials: kappa and rho must be positive");
    }
  }
  if (basis == Basis::nodal && lift_mode != LiftMode::dense) {
    throw std::invalid_argument("the nodal basis supports only the dense lift");
  }
  Discretization<Real> d;
  d.mesh = &mesh;
  d.ops = build_dg_operators<Real>(n, basis);
  d.traces = build_trace_maps(mesh, d.ops.face_positions, d.ops.dof_points);
  d.materials = std::move(materials);
  d.lift_mode = lift_mode;

  const auto uK = static_cast<std::size_t>(K);
  d.G.resize(uK);
  d.face_scale.resize(uK);
  d.normals.resize(uK);
  d.tau_p.resize(uK);
  d.tau_u.resize(uK);
  d.kappa.resize(uK);
  d.inv_rho.resize(uK);
  for (std::size_t k = 0; k < uK; ++k) {
    for (std::size_t i = 0; i < 9; ++i) d.G[k][i] = static_cast<Real>(mesh.G[k][i]);
    d.kappa[k] = static_cast<Real>(d.materials.kappa[k]);
    d.inv_rho[k] = static_cast<Real>(1.0 / d.materials.rho[k]);
    const double zm = d.materials.impedance(static_cast<int>(k));
    for (std::size_t f = 0; f < 4; ++f) {
      d.face_scale[k][f] = static_cast<Real>(mesh.Jf[k][f] / mesh.J[k]);
      for (std::size_t i = 0; i < 3; ++i) d.normals[k][f][i] = static_cast<Real>(mesh.normals[k][f][i]);
      const double zp = d.materials.impedance(mesh.EToE[k][f]);
      const double zavg = 0.5 * (zm + zp);
      d.tau_p[k][f] = static_cast<Real>(1.0 / zavg);
      d.tau_u[k][f] = static_cast<Real>(zavg);
    }
  }
  const int np = d.ops.np;
  auto to_offset = [np](int g) { return (g / np) * kNumFields * np + g % np; };
  d.trace_minus.resize(d.traces.vmapM.size());
  d.trace_plus.resize(d.traces.vmapP.size());
  for (std::size_t i = 0; i < d.traces.vmapM.size(); ++i) {
    d.trace_minus[i] = to_offset(d.traces.vmapM[i]);
    d.trace_plus[i] = to_offset(d.traces.vmapP[i]);
  }
  return d;
}

namespace {

template <typename Real>
using VecMap = Eigen::Map<Eigen::Matrix<Real, Eigen::Dynamic, 1>>;
template <typename Real>
using CVecMap = Eigen::Map<const Eigen::Matrix<Real, Eigen::Dynamic, 1>>;

template <typename Real>
void check_state(const Discretization<Real>& disc, const FieldState<Real>& q) {
  if (q.basis != disc.ops.basis) {
    throw BasisMismatch("state basis " + to_string(q.basis) + " does not match operators (" +
                        to_string(disc.ops.basis) + ")");
  }
  if (q.degree != disc.ops.degree || q.num_elements != disc.num_elements() ||
      q.data.size() != static_cast<std::size_t>(disc.num_elements()) * kNumFields * static_cast<std::size_t>(q.np)) {
    throw std::invalid_argument("state shape does not match the discretization");
  }
}

template <typename Real>
struct Workspace {
  int np;
  int nfp;
  std::vector<Real> tmp;      // 7 * np
  std::vector<Real> flux;     // 4 outputs x 4 faces x nfp
  std::vector<Real> lifted;   // np
  std::vector<Real> scratch;  // lift scratch

  Workspace(int np_, int nfp_)
      : np(np_), nfp(nfp_), tmp(static_cast<std::size_t>(7 * np_)),
        flux(static_cast<std::size_t>(16 * nfp_)), lifted(static_cast<std::size_t>(np_)),
        scratch(static_cast<std::size_t>(4 * nfp_)) {}

  std::span<Real> t(int i) { return {tmp.data() + static_cast<std::size_t>(i * np), static_cast<std::size_t>(np)}; }
  std::span<Real> face_flux(int out, int f) {
    return {flux.data() + static_cast<std::size_t>((out * 4 + f) * nfp), static_cast<std::size_t>(nfp)};
  }
};

template <typename Real>
void element_volume(const Discretization<Real>& disc, const FieldState<Real>& q, FieldState<Real>& out, int k,
                    Workspace<Real>& ws) {
  const auto& ops = disc.ops;
  const auto& G = disc.G[static_cast<std::size_t>(k)];
  const auto np = static_cast<Eigen::Index>(ops.np);
  const Real kap = disc.kappa[static_cast<std::size_t>(k)];
  const Real irho = disc.inv_rho[static_cast<std::size_t>(k)];

  CVecMap<Real> p(q.block(k, 0).data(), np);
  std::array<CVecMap<Real>, 3> u{CVecMap<Real>(q.block(k, 1).data(), np), CVecMap<Real>(q.block(k, 2).data(), np),
                                 CVecMap<Real>(q.block(k, 3).data(), np)};
  // Contravariant combinations w_j = sum_d G[d][j] u_d, so div u = sum_j d/dr_j w_j.
  std::array<VecMap<Real>, 3> w{VecMap<Real>(ws.t(0).data(), np), VecMap<Real>(ws.t(1).data(), np),
                                VecMap<Real>(ws.t(2).data(), np)};
  for (int j = 0; j < 3; ++j) {
    w[static_cast<std::size_t>(j)] = G[static_cast<std::size_t>(j)] * u[0] + G[static_cast<std::size_t>(3 + j)] * u[1] +
                                     G[static_cast<std::size_t>(6 + j)] * u[2];
  }
  // dr[j] = d p / d r_j
  std::array<VecMap<Real>, 3> dr{VecMap<Real>(ws.t(3).data(), np), VecMap<Real>(ws.t(4).data(), np),
                                 VecMap<Real>(ws.t(5).data(), np)};
  VecMap<Real> div(ws.t(6).data(), np);

  if (ops.basis == Basis::nodal) {
    div.noalias() = ops.D[0] * w[0];
    div.noalias() += ops.D[1] * w[1];
    div.noalias() += ops.D[2] * w[2];
    for (std::size_t j = 0; j < 3; ++j) dr[j].noalias() = ops.D[j] * p;
  } else {
    // d/dr_j = (D^{j+1} - D^0) / 2
    const auto& D = ops.bary;
    auto span_of = [np](auto& v) { return std::span<Real>(v.data(), static_cast<std::size_t>(np)); };
    auto cspan_of = [np](const auto& v) { return std::span<const Real>(v.data(), static_cast<std::size_t>(np)); };
    D[1].apply(cspan_of(w[0]), span_of(div));
    D[2].apply_add(cspan_of(w[1]), span_of(div));
    D[3].apply_add(cspan_of(w[2]), span_of(div));
    w[0] += w[1] + w[2];
    // w[1] now holds D^0 (w0 + w1 + w2).
    D[0].apply(cspan_of(w[0]), span_of(w[1]));
    div = Real(0.5) * (div - w[1]);

    D[0].apply(q.block(k, 0), span_of(w[2]));
    for (std::size_t j = 0; j < 3; ++j) {
      D[static_cast<int>(j) + 1].apply(q.block(k, 0), span_of(dr[j]));
      dr[j] = Real(0.5) * (dr[j] - w[2]);
    }
  }

  VecMap<Real>(out.block(k, 0).data(), np) -= kap * div;
  for (int d = 0; d < 3; ++d) {
    VecMap<Real> o(out.block(k, d + 1).data(), np);
    const auto r = static_cast<std::size_t>(3 * d);
    o -= irho * (G[r] * dr[0] + G[r + 1] * dr[1] + G[r + 2] * dr[2]);
  }
}

template <typename Real>
void element_surface(const Discretization<Real>& disc, const FieldState<Real>& q, FieldState<Real>& out, int k,
                     Workspace<Real>& ws) {
  const auto& ops = disc.ops;
  const auto uk = static_cast<std::size_t>(k);
  const auto nfp = static_cast<std::size_t>(ops.nfp);
  const auto np = static_cast<std::size_t>(ops.np);
  const Real* data = q.data.data();

  for (std::size_t f = 0; f < 4; ++f) {
    const Real sc = disc.face_scale[uk][f];
    const auto& n = disc.normals[uk][f];
    const Real tp = disc.tau_p[uk][f];
    const Real tu = disc.tau_u[uk][f];
    const bool mirror = disc.traces.boundary[uk * 4 + f] != 0;
    const std::size_t base = (uk * 4 + f) * nfp;
    auto fp = ws.face_flux(0, static_cast<int>(f));
    std::array<std::span<Real>, 3> fu{ws.face_flux(1, static_cast<int>(f)), ws.face_flux(2, static_cast<int>(f)),
                                      ws.face_flux(3, static_cast<int>(f))};
    for (std::size_t qi = 0; qi < nfp; ++qi) {
      const auto im = static_cast<std::size_t>(disc.trace_minus[base + qi]);
      const auto ip = static_cast<std::size_t>(disc.trace_plus[base + qi]);
      const Real pm = data[im];
      // Mirror ghost state: p+ = -p-, u+ = u-.
      const Real jp = mirror ? Real(-2) * pm : data[ip] - pm;
      Real ndu = 0;
      if (!mirror) {
        for (std::size_t d = 0; d < 3; ++d) ndu += n[d] * (data[ip + (d + 1) * np] - data[im + (d + 1) * np]);
      }
      fp[qi] = sc * Real(0.5) * (tp * jp - ndu);
      const Real fu_s = sc * Real(0.5) * (tu * ndu - jp);
      for (std::size_t d = 0; d < 3; ++d) fu[d][qi] = n[d] * fu_s;
    }
  }

  const auto nps = static_cast<Eigen::Index>(np);
  const Real kap = disc.kappa[uk];
  const Real irho = disc.inv_rho[uk];
  for (int o = 0; o < kNumFields; ++o) {
    std::span<Real> lifted(ws.lifted);
    switch (disc.lift_mode) {
      case LiftMode::dense: {
        CVecMap<Real> fl(ws.face_flux(o, 0).data(), static_cast<Eigen::Index>(4 * nfp));
        VecMap<Real>(lifted.data(), nps).noalias() = ops.lift * fl;
        break;
      }
      case LiftMode::factorized:
      case LiftMode::optimal: {
        const FaceFluxes<Real> fl{ws.face_flux(o, 0), ws.face_flux(o, 1), ws.face_flux(o, 2), ws.face_flux(o, 3)};
        if (disc.lift_mode == LiftMode::factorized) {
          apply_lift_factorized<Real>(ops.lift_factors, fl, lifted, ws.scratch);
        } else {
          apply_lift_optimal<Real>(ops.lift_factors, fl, lifted, ws.scratch);
        }
        break;
      }
    }
    VecMap<Real>(out.block(k, o).data(), nps) += (o == 0 ? kap : irho) * VecMap<Real>(lifted.data(), nps);
  }
}

enum class Terms { volume, surface, both };

template <typename Real>
void element_loop(const Discretization<Real>& disc, const FieldState<Real>& q, FieldState<Real>& out, Exec exec,
                  Terms terms, bool zero_first) {
  check_state(disc, q);
  check_state(disc, out);
  if (out.data.data() == q.data.data()) throw std::invalid_argument("rhs: output aliases input");
  const int K = disc.num_elements();
  auto body = [&](int k, Workspace<Real>& ws) {
    if (zero_first) {
      auto first = out.data.begin() + static_cast<std::ptrdiff_t>(out.offset(k, 0));
      std::fill(first, first + kNumFields * out.np, Real(0));
    }
    if (terms != Terms::surface) element_volume(disc, q, out, k, ws);
    if (terms != Terms::volume) element_surface(disc, q, out, k, ws);
  };
  if (exec == Exec::serial) {
    Workspace<Real> ws(disc.ops.np, disc.ops.nfp);
    for (int k = 0; k < K; ++k) body(k, ws);
    return;
  }
#pragma omp parallel
  {
    Workspace<Real> ws(disc.ops.np, disc.ops.nfp);
#pragma omp for schedule(static)
    for (int k = 0; k < K; ++k) body(k, ws);
  }
}

}  // namespace

template <typename Real>
void volume_rhs(const Discretization<Real>& disc, const FieldState<Real>& q, FieldState<Real>& out, Exec exec) {
  element_loop(disc, q, out, exec, Terms::volume, false);
}

template <typename Real>
void surface_rhs(const Discretization<Real>& disc, const FieldState<Real>& q, FieldState<Real>& out, Exec exec) {
  element_loop(disc, q, out, exec, Terms::surface, false);
}

template <typename Real>
void rhs(const Discretization<Real>& disc, const FieldState<Real>& q, FieldState<Real>& out, Exec exec) {
  element_loop(disc, q, out, exec, Terms::both, true);
}

const std::array<double, 5> LSRK4::a{0.0, -567301805773.0 / 1357537059087.0, -2404267990393.0 / 2016746695238.0,
                                     -3550918686646.0 / 2091501179385.0, -1275806237668.0 / 842570457699.0};
const std::array<double, 5> LSRK4::b{1432997174477.0 / 9575080441755.0, 5161836677717.0 / 13612068292357.0,
                                     1720146321549.0 / 2090206949498.0, 3134564353537.0 / 4481467310338.0,
                                     2277821191437.0 / 14882151754819.0};
const std::array<double, 5> LSRK4::c{0.0, 1432997174477.0 / 9575080441755.0, 2526269341429.0 / 6820363183585.0,
                                     2006345519317.0 / 3224310063776.0, 2802321613138.0 / 2924317926251.0};

template <typename Real>
void lsrk4_step(std::span<Real> y, std::span<Real> res, double t, double dt,
                const std::function<void(double, std::span<const Real>, std::span<Real>)>& f) {
  if (!(dt > 0.0)) throw std::invalid_argument("lsrk4_step: dt must be positive");
  if (res.size() != y.size()) throw std::invalid_argument("lsrk4_step: register sizes differ");
  std::vector<Real> k(y.size());
  for (std::size_t s = 0; s < 5; ++s) {
    f(t + LSRK4::c[s] * dt, y, k);
    const auto a = static_cast<Real>(LSRK4::a[s]);
    const auto b = static_cast<Real>(LSRK4::b[s]);
    const auto h = static_cast<Real>(dt);
    for (std::size_t i = 0; i < y.size(); ++i) {
      res[i] = (s == 0 ? Real(0) : a * res[i]) + h * k[i];
      y[i] += b * res[i];
    }
  }
}

template <typename Real>
void lsrk4_step(const Discretization<Real>& disc, FieldState<Real>& q, double dt, FieldState<Real>& k_reg,
                FieldState<Real>& res_reg, Exec exec) {
  if (!(dt > 0.0)) throw std::invalid_argument("lsrk4_step: dt must be positive");
  const auto h = static_cast<Real>(dt);
  const auto n = static_cast<std::ptrdiff_t>(q.data.size());
  for (std::size_t s = 0; s < 5; ++s) {
    rhs(disc, q, k_reg, exec);
    const auto a = static_cast<Real>(LSRK4::a[s]);
    const auto b = static_cast<Real>(LSRK4::b[s]);
    Real* y = q.data.data();
    Real* r = res_reg.data.data();
    const Real* kv = k_reg.data.data();
    const bool first = s == 0;
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      r[i] = (first ? Real(0) : a * r[i]) + h * kv[i];
      y[i] += b * r[i];
    }
  }
  q.time += dt;
}

double stable_dt(const Mesh& mesh, int n, double c_max, double cfl) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("stable_dt: cfl must lie in (0, 1]");
  if (!(c_max > 0.0)) throw std::invalid_argument("stable_dt: wave speed must be positive");
  check_degree(n);
  return cfl * mesh_stats(mesh).h_min / (c_max * n * n);
}

ExactSolution exact_solution(double x, double y, double z, double t) {
  constexpr double pi = std::numbers::pi;
  const double w = std::sqrt(3.0) * pi;
  const double cx = std::cos(pi * x), cy = std::cos(pi * y), cz = std::cos(pi * z);
  const double sx = std::sin(pi * x), sy = std::sin(pi * y), sz = std::sin(pi * z);
  const double st = std::sin(w * t) / std::sqrt(3.0);
  return {cx * cy * cz * std::cos(w * t), {sx * cy * cz * st, cx * sy * cz * st, cx * cy * sz * st}};
}

template <typename Real>
FieldState<Real> project(const Discretization<Real>& disc, const std::function<ExactSolution(const Vec3d&)>& f) {
  const auto& ops = disc.ops;
  auto q = zero_state<Real>(ops.degree, disc.num_elements(), ops.basis);
  const auto nn = static_cast<Eigen::Index>(ops.interp_nodes.points.size());
  Eigen::MatrixXd vals(nn, kNumFields);
  for (int k = 0; k < disc.num_elements(); ++k) {
    for (Eigen::Index i = 0; i < nn; ++i) {
      const auto e = f(disc.mesh->map_point(k, ops.interp_nodes.points[static_cast<std::size_t>(i)]));
      vals(i, 0) = e.p;
      for (int d = 0; d < 3; ++d) vals(i, d + 1) = e.u[static_cast<std::size_t>(d)];
    }
    const Eigen::MatrixXd coeff = ops.interp_to_coeff * vals;
    for (int fld = 0; fld < kNumFields; ++fld) {
      auto b = q.block(k, fld);
      for (Eigen::Index i = 0; i < coeff.rows(); ++i) b[static_cast<std::size_t>(i)] = static_cast<Real>(coeff(i, fld));
    }
  }
  return q;
}

template <typename Real>
FieldState<Real> initial_state(const Discretization<Real>& disc) {
  return project<Real>(disc, [](const Vec3d& x) {
    auto e = exact_solution(x[0], x[1], x[2], 0.0);
    e.u = {0.0, 0.0, 0.0};
    return e;
  });
}

template <typename Real>
double l2_error(const Discretization<Real>& disc, const FieldState<Real>& q,
                const std::function<double(const Vec3d&, double)>& exact_p) {
  check_state(disc, q);
  const auto& ops = disc.ops;
  const int K = disc.num_elements();
  std::vector<double> local(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd c(ops.np);
    const auto b = q.block(k, 0);
    for (int i = 0; i < ops.np; ++i) c(i) = static_cast<double>(b[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd ph = ops.eval_quad * c;
    double acc = 0.0;
    for (std::size_t i = 0; i < ops.quad.points.size(); ++i) {
      const double e = ph(static_cast<Eigen::Index>(i)) - exact_p(disc.mesh->map_point(k, ops.quad.points[i]), q.time);
      acc += ops.quad.weights[i] * e * e;
    }
    local[static_cast<std::size_t>(k)] = acc * disc.mesh->J[static_cast<std::size_t>(k)];
  }
  double total = 0.0;
  for (double v : local) total += v;
  return std::sqrt(total);
}

template <typename Real>
double l2_error(const Discretization<Real>& disc, const FieldState<Real>& q) {
  return l2_error<Real>(disc, q, [](const Vec3d& x, double t) { return exact_solution(x[0], x[1], x[2], t).p; });
}

template <typename Real>
double discrete_energy(const Discretization<Real>& disc, const FieldState<Real>& q) {
  check_state(disc, q);
  const auto& ops = disc.ops;
  double total = 0.0;
  Eigen::VectorXd c(ops.np);
  for (int k = 0; k < disc.num_elements(); ++k) {
    const auto uk = static_cast<std::size_t>(k);
    double e = 0.0;
    for (int fld = 0; fld < kNumFields; ++fld) {
      const auto b = q.block(k, fld);
      for (int i = 0; i < ops.np; ++i) c(i) = static_cast<double>(b[static_cast<std::size_t>(i)]);
      const double quad = c.dot(ops.mass * c);
      e += fld == 0 ? quad / disc.materials.kappa[uk] : disc.materials.rho[uk] * quad;
    }
    total += disc.mesh->J[uk] * e;
  }
  return total;
}

template <typename Real>
RunResult run_wave(const Discretization<Real>& disc, FieldState<Real>& q, const RunOptions& opts) {
  if (!(opts.tmax >= 0.0)) throw std::invalid_argument("run_wave: tmax must be non-negative");
  if (opts.output_every < 1) throw std::invalid_argument("run_wave: output cadence must be >= 1");
  RunResult result;
  const double dt0 = stable_dt(*disc.mesh, disc.ops.degree, disc.materials.max_c(), opts.cfl);
  result.steps = static_cast<long>(std::ceil(opts.tmax / dt0 - 1e-12));
  result.dt = result.steps > 0 ? opts.tmax / static_cast<double>(result.steps) : 0.0;
  const double t0 = q.time;

  auto sample = [&](long step) {
    Sample s;
    s.step = step;
    s.time = q.time;
    s.l2_error = l2_error(disc, q);
    s.energy = discrete_energy(disc, q);
    result.samples.push_back(s);
    return s.energy;
  };
  const double e0 = sample(0);
  auto k_reg = zero_state<Real>(q.degree, q.num_elements, q.basis);
  auto res_reg = k_reg;
  for (long step = 1; step <= result.steps; ++step) {
    lsrk4_step(disc, q, result.dt, k_reg, res_reg, opts.exec);
    q.time = t0 + static_cast<double>(step) * result.dt;
    if (step % opts.output_every == 0 || step == result.steps) {
      const double e = sample(step);
      if (!std::isfinite(e) || e > opts.blowup_factor * e0) {
        std::ostringstream msg;
        msg << "unstable run: energy " << e << " exceeds " << opts.blowup_factor << " x initial " << e0
            << " at step " << step << " (t = " << q.time << ")";
        throw InstabilityError(msg.str());
      }
    }
  }
  return result;
}

void write_time_series_csv(std::ostream& os, std::span<const Sample> samples) {
  const auto old = os.precision(17);
  os << "step,tau,l2_error_p,energy\n";
  for (const auto& s : samples) os << s.step << ',' << s.time << ',' << s.l2_error << ',' << s.energy << '\n';
  os.precision(old);
}

template <typename Real>
void write_checkpoint(std::ostream& os, const FieldState<Real>& q) {
  os << "bbdg-checkpoint\n"
     << "degree " << q.degree << '\n'
     << "elements " << q.num_elements << '\n'
     << "basis " << to_string(q.basis) << '\n'
     << "precision " << to_string(FieldState<Real>::precision) << '\n';
  os.precision(17);
  os << "time " << q.time << '\n' << "values " << q.data.size() << '\n';
  os.write(reinterpret_cast<const char*>(q.data.data()), static_cast<std::streamsize>(q.data.size() * sizeof(Real)));
}

template <typename Real>
FieldState<Real> read_checkpoint(std::istream& is) {
  auto fail = [](const std::string& what) { return std::runtime_error("checkpoint: " + what); };
  std::string magic;
  std::getline(is, magic);
  if (magic != "bbdg-checkpoint") throw fail("missing header");
  std::string key;
  std::string basis;
  std::string precision;
  int degree = 0;
  int K = 0;
  double time = 0.0;
  std::size_t count = 0;
  if (!(is >> key >> degree) || key != "degree") throw fail("bad degree line");
  if (!(is >> key >> K) || key != "elements") throw fail("bad elements line");
  if (!(is >> key >> basis) || key != "basis") throw fail("bad basis line");
  if (!(is >> key >> precision) || key != "precision") throw fail("bad precision line");
  if (!(is >> key >> time) || key != "time") throw fail("bad time line");
  if (!(is >> key >> count) || key != "values") throw fail("bad values line");
  is.get();
  if (parse_precision(precision) != FieldState<Real>::precision) throw fail("precision is " + precision);
  auto q = zero_state<Real>(degree, K, parse_basis(basis));
  if (count != q.data.size()) throw fail("value count does not match degree and elements");
  q.time = time;
  is.read(reinterpret_cast<char*>(q.data.data()), static_cast<std::streamsize>(count * sizeof(Real)));
  if (!is) throw fail("truncated data block");
  return q;
}

#define BBDG_INSTANTIATE(Real)                                                                                  \
  template FieldState<Real> zero_state<Real>(int, int, Basis);                                                 \
  template DGOperators<Real> build_dg_operators<Real>(int, Basis);                                             \
  template Discretization<Real> make_discretization<Real>(const Mesh&, int, Basis, Materials, LiftMode);       \
  template void volume_rhs<Real>(const Discretization<Real>&, const FieldState<Real>&, FieldState<Real>&, Exec); \
  template void surface_rhs<Real>(const Discretization<Real>&, const FieldState<Real>&, FieldState<Real>&,     \
                                  Exec);                                                                       \
  template void rhs<Real>(const Discretization<Real>&, const FieldState<Real>&, FieldState<Real>&, Exec);      \
  template void lsrk4_step<Real>(std::span<Real>, std::span<Real>, double, double,                             \
                                 const std::function<void(double, std::span<const Real>, std::span<Real>)>&);  \
  template void lsrk4_step<Real>(const Discretization<Real>&, FieldState<Real>&, double, FieldState<Real>&,     \
                                 FieldState<Real>&, Exec);                                                     \
  template FieldState<Real> project<Real>(const Discretization<Real>&,                                         \
                                          const std::function<ExactSolution(const Vec3d&)>&);                  \
  template FieldState<Real> initial_state<Real>(const Discretization<Real>&);                                  \
  template double l2_error<Real>(const Discretization<Real>&, const FieldState<Real>&,                         \
                                 const std::function<double(const Vec3d&, double)>&);                          \
  template double l2_error<Real>(const Discretization<Real>&, const FieldState<Real>&);                        \
  template double discrete_energy<Real>(const Discretization<Real>&, const FieldState<Real>&);                 \
  template RunResult run_wave<Real>(const Discretization<Real>&, FieldState<Real>&, const RunOptions&);        \
  template void write_checkpoint<Real>(std::ostream&, const FieldState<Real>&);                                \
  template FieldState<Real> read_checkpoint<Real>(std::istream&);

BBDG_INSTANTIATE(double)
BBDG_INSTANTIATE(float)

#undef BBDG_INSTANTIATE

}  // namespace bbdg
