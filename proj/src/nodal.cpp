#include "bbdg/nodal.hpp"

#include "bbdg/bernstein.hpp"
#include "bbdg/orthopoly.hpp"
#include "bbdg/tensor_index.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace bbdg {

NodeKind parse_node_kind(const std::string& s) {
  if (s == "warp_blend") return NodeKind::warp_blend;
  if (s == "equispaced") return NodeKind::equispaced;
  throw std::invalid_argument("unknown node kind '" + s + "' (expected warp_blend or equispaced)");
}

std::string to_string(NodeKind kind) { return kind == NodeKind::warp_blend ? "warp_blend" : "equispaced"; }

namespace {

// Blend parameters indexed by N - 1.
constexpr std::array<double, 15> kAlphaOpt{0.0,    0.0,    0.0,    0.1002, 1.1332, 1.5608,  1.3413, 1.2577,
                                           1.1603, 1.10153, 0.6080, 0.4523, 0.8856, 0.8717, 0.9655};

using Vec3 = Eigen::Vector3d;

// 1-D warp from equispaced to Gauss-Lobatto points, evaluated at x.
double eval_warp(int p, const std::vector<double>& gl, double x) {
  std::vector<double> xeq(static_cast<std::size_t>(p + 1));
  for (int i = 0; i <= p; ++i) xeq[static_cast<std::size_t>(i)] = -1.0 + 2.0 * (p - i) / p;
  double warp = 0.0;
  for (int i = 0; i <= p; ++i) {
    const double xi = xeq[static_cast<std::size_t>(i)];
    double d = gl[static_cast<std::size_t>(i)] - xi;
    for (int j = 1; j < p; ++j) {
      if (i != j) d *= (x - xeq[static_cast<std::size_t>(j)]) / (xi - xeq[static_cast<std::size_t>(j)]);
    }
    if (i != 0) d = -d / (xi - xeq[0]);
    if (i != p) d = d / (xi - xeq[static_cast<std::size_t>(p)]);
    warp += d;
  }
  return warp;
}

// Tangential shift of a point on an equilateral face with barycentrics l1..l3.
void eval_shift(int p, double alpha, const std::vector<double>& gl, double l1, double l2, double l3, double& dx,
                double& dy) {
  double w1 = 4.0 * eval_warp(p, gl, l3 - l2);
  double w2 = 4.0 * eval_warp(p, gl, l1 - l3);
  double w3 = 4.0 * eval_warp(p, gl, l2 - l1);
  w1 *= l2 * l3 * (1.0 + (alpha * l1) * (alpha * l1));
  w2 *= l1 * l3 * (1.0 + (alpha * l2) * (alpha * l2));
  w3 *= l1 * l2 * (1.0 + (alpha * l3) * (alpha * l3));
  const double pi = std::numbers::pi;
  dx = w1 + std::cos(2.0 * pi / 3.0) * w2 + std::cos(4.0 * pi / 3.0) * w3;
  dy = std::sin(2.0 * pi / 3.0) * w2 + std::sin(4.0 * pi / 3.0) * w3;
}

std::vector<Point3> equispaced_lattice(int n) {
  std::vector<Point3> pts;
  for (int k = 0; k <= n; ++k) {
    for (int j = 0; j <= n - k; ++j) {
      for (int i = 0; i <= n - k - j; ++i) {
        pts.push_back({-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n, -1.0 + 2.0 * k / n});
      }
    }
  }
  return pts;
}

std::vector<Point3> warp_blend(int n) {
  auto pts = equispaced_lattice(n);
  if (n < 3) return pts;  // the warp vanishes for N <= 2
  const double alpha = kAlphaOpt[static_cast<std::size_t>(n - 1)];
  std::vector<double> gl = gauss_lobatto_points(n);
  for (auto& g : gl) g = -g;

  // Equilateral tetrahedron and its face tangents.
  const double s3 = std::sqrt(3.0);
  const double s6 = std::sqrt(6.0);
  const Vec3 v1(-1.0, -1.0 / s3, -1.0 / s6);
  const Vec3 v2(1.0, -1.0 / s3, -1.0 / s6);
  const Vec3 v3(0.0, 2.0 / s3, -1.0 / s6);
  const Vec3 v4(0.0, 0.0, 3.0 / s6);
  std::array<Vec3, 4> t1{v2 - v1, v2 - v1, v3 - v2, v3 - v1};
  std::array<Vec3, 4> t2{v3 - 0.5 * (v1 + v2), v4 - 0.5 * (v1 + v2), v4 - 0.5 * (v2 + v3), v4 - 0.5 * (v1 + v3)};
  for (int f = 0; f < 4; ++f) {
    t1[static_cast<std::size_t>(f)].normalize();
    t2[static_cast<std::size_t>(f)].normalize();
  }
  Eigen::Matrix3d a;
  a.col(0) = 0.5 * (v2 - v1);
  a.col(1) = 0.5 * (v3 - v1);
  a.col(2) = 0.5 * (v4 - v1);
  const auto a_lu = a.partialPivLu();
  constexpr double tol = 1e-10;

  for (auto& p : pts) {
    const double l1 = 0.5 * (1.0 + p[2]);
    const double l2 = 0.5 * (1.0 + p[1]);
    const double l3 = -0.5 * (1.0 + p[0] + p[1] + p[2]);
    const double l4 = 0.5 * (1.0 + p[0]);
    Vec3 xyz = l3 * v1 + l4 * v2 + l2 * v3 + l1 * v4;
    Vec3 shift = Vec3::Zero();
    for (int f = 0; f < 4; ++f) {
      double la = 0.0, lb = 0.0, lc = 0.0, ld = 0.0;
      switch (f) {
        case 0: la = l1; lb = l2; lc = l3; ld = l4; break;
        case 1: la = l2; lb = l1; lc = l3; ld = l4; break;
        case 2: la = l3; lb = l1; lc = l4; ld = l2; break;
        default: la = l4; lb = l1; lc = l3; ld = l2; break;
      }
      double w1 = 0.0;
      double w2 = 0.0;
      eval_shift(n, alpha, gl, lb, lc, ld, w1, w2);
      double blend = lb * lc * ld;
      const double denom = (lb + 0.5 * la) * (lc + 0.5 * la) * (ld + 0.5 * la);
      if (denom > tol) blend = (1.0 + (alpha * la) * (alpha * la)) * blend / denom;
      const auto fs = static_cast<std::size_t>(f);
      shift += blend * w1 * t1[fs] + blend * w2 * t2[fs];
      const int positive = (lb > tol) + (lc > tol) + (ld > tol);
      if (la < tol && positive < 3) shift = w1 * t1[fs] + w2 * t2[fs];
    }
    xyz += shift;
    const Vec3 rst = a_lu.solve(xyz - 0.5 * (v2 + v3 + v4 - v1));
    p = {rst(0), rst(1), rst(2)};
  }
  return pts;
}

double two_norm_cond(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  return s(0) / s(s.size() - 1);
}

}  // namespace

NodeSet build_nodes(int n, NodeKind kind) {
  check_degree(n);
  NodeSet ns;
  ns.degree = n;
  ns.kind = kind;
  if (kind == NodeKind::warp_blend) {
    if (n > kMaxWarpBlendDegree) throw DegreeError("warp_blend nodes are tabulated only for N <= 9");
    ns.points = warp_blend(n);
  } else {
    ns.points = equispaced_lattice(n);
  }
  return ns;
}

Eigen::MatrixXd modal_basis_eval(int n, std::span<const Point3> points) { return modal_basis(3, n, points); }

Eigen::MatrixXd NodalOperators::face_lift(int f) const {
  check_face(f);
  const int nfp = face_dofs(degree);
  return lift.middleCols(f * nfp, nfp);
}

NodalOperators build_nodal_operators(const NodeSet& nodes, double cond_cap) {
  const int n = nodes.degree;
  check_degree(n);
  const int np = volume_dofs(n);
  const int nfp = face_dofs(n);
  if (static_cast<int>(nodes.points.size()) != np) throw std::invalid_argument("node set has wrong size");

  NodalOperators ops;
  ops.degree = n;
  ops.nodes = nodes;
  ops.V = modal_basis_eval(n, nodes.points);
  ops.vandermonde_cond = two_norm_cond(ops.V);
  if (!(ops.vandermonde_cond < cond_cap)) {
    throw UnisolvenceError("nodal Vandermonde condition number exceeds the cap");
  }
  ops.Vinv = ops.V.inverse();
  ops.mass = ops.Vinv.transpose() * ops.Vinv;
  const auto g = modal_gradient_3d(n, nodes.points);
  ops.Dr = g.dr * ops.Vinv;
  ops.Ds = g.ds * ops.Vinv;
  ops.Dt = g.dt * ops.Vinv;

  ops.lift = Eigen::MatrixXd::Zero(np, 4 * nfp);
  const Eigen::MatrixXd vvt = ops.V * ops.V.transpose();
  for (int f = 0; f < 4; ++f) {
    const auto fv = face_vertices(f);
    auto& ids = ops.face_nodes[static_cast<std::size_t>(f)];
    std::vector<Point3> local;
    for (int i = 0; i < np; ++i) {
      const auto& x = nodes.points[static_cast<std::size_t>(i)];
      const auto lam = ReferenceTet::barycentric(x[0], x[1], x[2]);
      if (std::abs(lam[static_cast<std::size_t>(f)]) < 1e-10) {
        ids.push_back(i);
        local.push_back({2.0 * lam[static_cast<std::size_t>(fv[1])] - 1.0, 2.0 * lam[static_cast<std::size_t>(fv[2])] - 1.0,
                         0.0});
      }
    }
    if (static_cast<int>(ids.size()) != nfp) throw UnisolvenceError("node set does not carry N^f_p nodes per face");
    const Eigen::MatrixXd v2 = modal_basis(2, n, local);
    const Eigen::MatrixXd mf = (v2 * v2.transpose()).inverse();
    Eigen::MatrixXd emb = Eigen::MatrixXd::Zero(np, nfp);
    for (int q = 0; q < nfp; ++q) emb.row(ids[static_cast<std::size_t>(q)]) = mf.row(q);
    ops.lift.middleCols(f * nfp, nfp) = vvt * emb;
  }
  return ops;
}

BasisConversion basis_conversion(const NodeSet& nodes) {
  BasisConversion c;
  c.degree = nodes.degree;
  c.to_nodal = bernstein_vandermonde(3, nodes.degree, nodes.points);
  c.to_bernstein = c.to_nodal.partialPivLu().inverse();
  return c;
}

std::vector<double> nodal_to_bernstein(const BasisConversion& c, std::span<const double> nodal) {
  if (static_cast<Eigen::Index>(nodal.size()) != c.to_bernstein.cols()) {
    throw std::invalid_argument("nodal_to_bernstein: size mismatch");
  }
  const Eigen::VectorXd out =
      c.to_bernstein * Eigen::Map<const Eigen::VectorXd>(nodal.data(), static_cast<Eigen::Index>(nodal.size()));
  return {out.data(), out.data() + out.size()};
}

std::vector<double> bernstein_to_nodal(const BasisConversion& c, std::span<const double> bernstein) {
  if (static_cast<Eigen::Index>(bernstein.size()) != c.to_nodal.cols()) {
    throw std::invalid_argument("bernstein_to_nodal: size mismatch");
  }
  const Eigen::VectorXd out =
      c.to_nodal * Eigen::Map<const Eigen::VectorXd>(bernstein.data(), static_cast<Eigen::Index>(bernstein.size()));
  return {out.data(), out.data() + out.size()};
}

void write_nodes_csv(std::ostream& os, const NodeSet& nodes) {
  os << "r,s,t\n";
  os << std::setprecision(17);
  for (const auto& p : nodes.points) os << p[0] << ',' << p[1] << ',' << p[2] << '\n';
}

}  // namespace bbdg
