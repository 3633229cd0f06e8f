#include "bbdg/bernstein.hpp"
#include "bbdg/nodal.hpp"
#include "bbdg/operator_lab.hpp"
#include "bbdg/orthopoly.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <sstream>

using namespace bbdg;
using bbdg::testing::rel_diff;

namespace {

Point3 to_reference(const std::array<double, 4>& lam) {
  return {2.0 * lam[1] - 1.0, 2.0 * lam[2] - 1.0, 2.0 * lam[3] - 1.0};
}

}  // namespace

TEST_CASE("node sets") {
  for (auto kind : {NodeKind::warp_blend, NodeKind::equispaced}) {
    const auto nodes = build_nodes(1, kind);
    REQUIRE(nodes.points.size() == 4);
    for (std::size_t v = 0; v < 4; ++v) {
      const auto& ref = ReferenceTet::vertices[v];
      bool found = false;
      for (const auto& p : nodes.points) {
        found = found || (std::abs(p[0] - ref[0]) + std::abs(p[1] - ref[1]) + std::abs(p[2] - ref[2]) < 1e-14);
      }
      CHECK(found);
    }
  }
  const auto eq = build_nodes(3, NodeKind::equispaced);
  CHECK(eq.points.size() == 20);
  for (const auto& p : eq.points) {
    for (double x : p) {
      const double i = (x + 1.0) * 1.5;
      CHECK(std::abs(i - std::round(i)) < 1e-14);
    }
  }
  for (int n = 1; n <= kMaxWarpBlendDegree; ++n) {
    const auto nodes = build_nodes(n, NodeKind::warp_blend);
    CHECK(static_cast<int>(nodes.points.size()) == volume_dofs(n));
    const auto ops = build_nodal_operators(nodes);
    for (int f = 0; f < 4; ++f) CHECK(static_cast<int>(ops.face_nodes[static_cast<std::size_t>(f)].size()) == face_dofs(n));
  }
  CHECK_THROWS_AS(build_nodes(10, NodeKind::warp_blend), DegreeError);
  CHECK_NOTHROW(build_nodes(12, NodeKind::equispaced));
  CHECK(parse_node_kind("equispaced") == NodeKind::equispaced);
  CHECK_THROWS(parse_node_kind("gauss"));
}

TEST_CASE("warp and blend improves the Vandermonde") {
  const auto wb = build_nodal_operators(build_nodes(6, NodeKind::warp_blend));
  const auto eq = build_nodal_operators(build_nodes(6, NodeKind::equispaced));
  CHECK(wb.vandermonde_cond < eq.vandermonde_cond);
  CHECK_THROWS_AS(build_nodal_operators(build_nodes(6, NodeKind::equispaced), 10.0), UnisolvenceError);
}

TEST_CASE("modal basis is orthonormal") {
  for (int n = 0; n <= 9; ++n) {
    const auto rule = simplex_quadrature(3, 2 * n);
    const Eigen::MatrixXd v = modal_basis_eval(n, rule.points);
    CHECK(v.cols() == simplex_dim<3>(n));
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), static_cast<Eigen::Index>(rule.weights.size()));
    const Eigen::MatrixXd gram = v.transpose() * w.asDiagonal() * v;
    CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(v(0, 0) == doctest::Approx(1.0 / std::sqrt(4.0 / 3.0)).epsilon(1e-14));
  }
}

TEST_CASE("nodal operators") {
  for (int n = 1; n <= kMaxWarpBlendDegree; ++n) {
    const auto ops = build_nodal_operators(build_nodes(n, NodeKind::warp_blend));
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(volume_dofs(n));
    CHECK((ops.Dr * one).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((ops.Ds * one).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((ops.Dt * one).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((ops.V * ops.Vinv - Eigen::MatrixXd::Identity(ops.V.rows(), ops.V.cols())).cwiseAbs().maxCoeff() < 1e-10);

    // Derivative of the linear field r + 2s - t.
    Eigen::VectorXd f(volume_dofs(n));
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      const auto& p = ops.nodes.points[static_cast<std::size_t>(i)];
      f(i) = p[0] + 2.0 * p[1] - p[2];
    }
    CHECK(((ops.Dr * f).array() - 1.0).abs().maxCoeff() < 1e-9);
    CHECK(((ops.Ds * f).array() - 2.0).abs().maxCoeff() < 1e-9);
    CHECK(((ops.Dt * f).array() + 1.0).abs().maxCoeff() < 1e-9);

    // Nodes on face f are exactly those with lambda_f = 0.
    for (int fc = 0; fc < 4; ++fc) {
      for (int i : ops.face_nodes[static_cast<std::size_t>(fc)]) {
        const auto& p = ops.nodes.points[static_cast<std::size_t>(i)];
        CHECK(std::abs(ReferenceTet::barycentric(p[0], p[1], p[2])[static_cast<std::size_t>(fc)]) < 1e-10);
      }
    }
  }
}

TEST_CASE("nodal lift equals the Bernstein lift after a change of basis") {
  for (int n = 1; n <= 7; ++n) {
    const auto nodes = build_nodes(n, NodeKind::warp_blend);
    const auto ops = build_nodal_operators(nodes);
    const auto conv = basis_conversion(nodes);
    for (int f = 0; f < 4; ++f) {
      // Face conversion: Bernstein face coefficients to values at the face nodes.
      const auto trace = face_trace_indices(n, f);
      const auto& fn = ops.face_nodes[static_cast<std::size_t>(f)];
      Eigen::MatrixXd face_vb(face_dofs(n), face_dofs(n));
      for (std::size_t a = 0; a < fn.size(); ++a) {
        for (std::size_t b = 0; b < trace.size(); ++b) {
          face_vb(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
              conv.to_nodal(fn[a], trace[b]);
        }
      }
      const Eigen::MatrixXd expected = conv.to_nodal * bernstein_face_lift(n, f) * face_vb.inverse();
      CHECK(rel_diff(ops.face_lift(f), expected) < 1e-9);
    }
  }
}

TEST_CASE("nodal lift diagnostics") {
  const auto l3 = build_nodal_operators(build_nodes(3, NodeKind::warp_blend)).face_lift(0);
  const auto ex = entry_extrema(l3);
  CHECK(ex.min_all == doctest::Approx(-13.5).epsilon(0.05));
  CHECK(ex.max_all == doctest::Approx(9.0).epsilon(0.05));
  // Computed regression values (face 0 lift, Warp & Blend).
  CHECK(condition_number(build_nodal_operators(build_nodes(4, NodeKind::warp_blend)).face_lift(0)) ==
        doctest::Approx(5.08895).epsilon(1e-3));
  CHECK(condition_number(build_nodal_operators(build_nodes(9, NodeKind::warp_blend)).Dr) ==
        doctest::Approx(178.895).epsilon(1e-3));
}

TEST_CASE("basis conversion") {
  for (int n = 1; n <= 9; ++n) {
    const auto nodes = build_nodes(n, NodeKind::warp_blend);
    const auto conv = basis_conversion(nodes);
    const std::vector<double> ones(static_cast<std::size_t>(volume_dofs(n)), 3.25);
    const auto b = nodal_to_bernstein(conv, ones);
    for (double v : b) CHECK(v == doctest::Approx(3.25).epsilon(1e-11));
    const auto back = bernstein_to_nodal(conv, b);
    for (double v : back) CHECK(v == doctest::Approx(3.25).epsilon(1e-12));

    const auto nodal = testing::random_vector(static_cast<std::size_t>(volume_dofs(n)));
    const auto coeff = nodal_to_bernstein(conv, nodal);
    CHECK(rel_diff(bernstein_to_nodal(conv, coeff), nodal) < 1e-6);

    // Bernstein evaluation agrees with the nodal interpolant at random points.
    const auto ops = build_nodal_operators(nodes);
    const auto idx = canonical_ordering(n);
    for (int trial = 0; trial < 20; ++trial) {
      const auto lam = testing::random_barycentric();
      const Point3 x = to_reference(lam);
      double vb = 0.0;
      for (std::size_t a = 0; a < idx.size(); ++a) vb += coeff[a] * eval_bernstein(n, idx[a], lam);
      const Eigen::RowVectorXd phi = modal_basis_eval(n, std::span<const Point3>(&x, 1)) * ops.Vinv;
      const double vn = phi.dot(testing::as_eigen(nodal));
      CHECK(std::abs(vb - vn) <= 1e-8 * std::max(1.0, std::abs(vn)));
    }
  }
  const double cond9 = condition_number(basis_conversion(build_nodes(9, NodeKind::warp_blend)).to_nodal);
  CHECK(cond9 > 1e2);
  CHECK(cond9 < 1e4);
}

TEST_CASE("nodal derivative is worse conditioned than the Bernstein one") {
  for (int n = 2; n <= 9; ++n) {
    const auto ops = build_nodal_operators(build_nodes(n, NodeKind::warp_blend));
    const double nodal = condition_number(ops.Dr);
    const double bern = condition_number(barycentric_derivatives(n)[0].to_dense());
    CHECK(nodal > bern);
  }
}

TEST_CASE("node csv") {
  std::ostringstream os;
  write_nodes_csv(os, build_nodes(2, NodeKind::equispaced));
  const auto s = os.str();
  CHECK(s.rfind("r,s,t\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 11);
}
