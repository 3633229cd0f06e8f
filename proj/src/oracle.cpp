#include "bbdg/oracle.hpp"

#include "bbdg/bernstein.hpp"
#include "bbdg/quadrature.hpp"
#include "bbdg/tensor_index.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace bbdg {

namespace {

Eigen::VectorXd weights_of(const QuadratureRule& rule) {
  return Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), static_cast<Eigen::Index>(rule.weights.size()));
}

Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& m, const Eigen::MatrixXd& rhs) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw std::runtime_error("oracle: mass matrix is singular");
  return llt.solve(rhs);
}

}  // namespace

Eigen::MatrixXd quadrature_mass(int n, int dim) {
  check_degree(n);
  const auto rule = simplex_quadrature(dim, 2 * n + 1);
  const Eigen::MatrixXd b = bernstein_vandermonde(dim, n, rule.points);
  return b.transpose() * weights_of(rule).asDiagonal() * b;
}

Eigen::MatrixXd quadrature_face_coupling(int n, int f) {
  check_degree(n);
  check_face(f);
  const auto rule = simplex_quadrature(2, 2 * n + 1);
  const auto fv = face_vertices(f);
  const auto vol = simplex_indices<3>(n);
  const auto face = simplex_indices<2>(n);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(vol.size()), static_cast<Eigen::Index>(face.size()));
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto mu = simplex_barycentric(2, rule.points[q]);
    std::array<double, 4> lam{};
    for (int k = 0; k < 3; ++k) lam[static_cast<std::size_t>(fv[static_cast<std::size_t>(k)])] = mu[static_cast<std::size_t>(k)];
    for (std::size_t a = 0; a < vol.size(); ++a) {
      const double ba = bernstein_value<3>(vol[a], lam);
      if (ba == 0.0) continue;
      for (std::size_t b = 0; b < face.size(); ++b) {
        c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
            rule.weights[q] * ba * bernstein_value<2>(face[b], std::span<const double>(mu.data(), 3));
      }
    }
  }
  return c;
}

Eigen::MatrixXd dense_lift_oracle(int n, int f) {
  return solve_spd(quadrature_mass(n, 3), quadrature_face_coupling(n, f));
}

Eigen::MatrixXd derivative_oracle(int n, int i) {
  check_degree(n);
  if (i < 0 || i > 3) throw std::invalid_argument("derivative_oracle: i must be 0..3");
  const auto rule = simplex_quadrature(3, 2 * n + 1);
  const auto idx = simplex_indices<3>(n);
  const Eigen::MatrixXd b = bernstein_vandermonde(3, n, rule.points);
  Eigen::MatrixXd db(static_cast<Eigen::Index>(rule.size()), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto lam = simplex_barycentric(3, rule.points[q]);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      // d/dlambda_i of C_a prod lambda^a, the lambdas treated as independent.
      const int ai = idx[a][i];
      double v = 0.0;
      if (ai > 0) {
        v = multinomial<3>(idx[a]) * ai;
        for (int k = 0; k < 4; ++k) {
          const int e = idx[a][k] - (k == i ? 1 : 0);
          if (e > 0) v *= std::pow(lam[static_cast<std::size_t>(k)], e);
        }
      }
      db(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(a)) = v;
    }
  }
  const Eigen::VectorXd w = weights_of(rule);
  return solve_spd(b.transpose() * w.asDiagonal() * b, b.transpose() * w.asDiagonal() * db);
}

}  // namespace bbdg
