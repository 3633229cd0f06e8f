#include "bbdg/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bbdg {

GaussRule1D gauss_jacobi(int q, double alpha, double beta) {
  if (q < 1) throw std::invalid_argument("gauss_jacobi: need at least one point");
  // Golub-Welsch on the symmetric Jacobi matrix of the orthogonal family.
  Eigen::VectorXd diag(q);
  Eigen::VectorXd sub(std::max(q - 1, 1));
  const double ab = alpha + beta;
  for (int n = 0; n < q; ++n) {
    const double h = 2.0 * n + ab;
    diag(n) = (n == 0) ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / (h * (h + 2.0));
  }
  for (int n = 1; n < q; ++n) {
    const double h = 2.0 * n + ab;
    const double num = 4.0 * n * (n + alpha) * (n + beta) * (n + ab);
    const double den = h * h * (h + 1.0) * (h - 1.0);
    sub(n - 1) = std::sqrt(num / den);
  }
  GaussRule1D rule;
  rule.nodes.resize(static_cast<std::size_t>(q));
  rule.weights.resize(static_cast<std::size_t>(q));
  const double mu0 = std::pow(2.0, ab + 1.0) * std::exp(std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) -
                                                         std::lgamma(ab + 2.0));
  if (q == 1) {
    rule.nodes[0] = diag(0);
    rule.weights[0] = mu0;
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub.head(q - 1), Eigen::ComputeEigenvectors);
  for (int i = 0; i < q; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
  }
  return rule;
}

std::vector<double> gauss_lobatto_points(int n) {
  if (n < 1) throw std::invalid_argument("gauss_lobatto_points: n >= 1 required");
  std::vector<double> x{-1.0};
  if (n > 1) {
    const auto interior = gauss_jacobi(n - 1, 1.0, 1.0);
    x.insert(x.end(), interior.nodes.begin(), interior.nodes.end());
  }
  x.push_back(1.0);
  return x;
}

QuadratureRule simplex_quadrature(int dim, int exact_degree) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("simplex_quadrature: dim must be 1, 2 or 3");
  const int q = std::max(exact_degree, 0) / 2 + 1;
  QuadratureRule rule;
  rule.dim = dim;
  const auto ga = gauss_jacobi(q, 0.0, 0.0);
  if (dim == 1) {
    for (int i = 0; i < q; ++i) {
      rule.points.push_back({ga.nodes[static_cast<std::size_t>(i)], 0.0, 0.0});
      rule.weights.push_back(ga.weights[static_cast<std::size_t>(i)]);
    }
    return rule;
  }
  const auto gb = gauss_jacobi(q, 1.0, 0.0);
  if (dim == 2) {
    for (int i = 0; i < q; ++i) {
      for (int j = 0; j < q; ++j) {
        const double a = ga.nodes[static_cast<std::size_t>(i)];
        const double b = gb.nodes[static_cast<std::size_t>(j)];
        rule.points.push_back({0.5 * (1.0 + a) * (1.0 - b) - 1.0, b, 0.0});
        rule.weights.push_back(0.5 * ga.weights[static_cast<std::size_t>(i)] * gb.weights[static_cast<std::size_t>(j)]);
      }
    }
    return rule;
  }
  const auto gc = gauss_jacobi(q, 2.0, 0.0);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      for (int k = 0; k < q; ++k) {
        const double a = ga.nodes[static_cast<std::size_t>(i)];
        const double b = gb.nodes[static_cast<std::size_t>(j)];
        const double c = gc.nodes[static_cast<std::size_t>(k)];
        const double r = 0.25 * (1.0 + a) * (1.0 - b) * (1.0 - c) - 1.0;
        const double s = 0.5 * (1.0 + b) * (1.0 - c) - 1.0;
        rule.points.push_back({r, s, c});
        rule.weights.push_back(0.125 * ga.weights[static_cast<std::size_t>(i)] *
                               gb.weights[static_cast<std::size_t>(j)] * gc.weights[static_cast<std::size_t>(k)]);
      }
    }
  }
  return rule;
}

std::array<double, 4> simplex_barycentric(int dim, const Point3& x) {
  std::array<double, 4> lam{};
  double sum = 0.0;
  for (int i = 0; i < dim; ++i) {
    lam[static_cast<std::size_t>(i + 1)] = 0.5 * (1.0 + x[static_cast<std::size_t>(i)]);
    sum += lam[static_cast<std::size_t>(i + 1)];
  }
  lam[0] = 1.0 - sum;
  return lam;
}

double simplex_measure(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return 2.0;
    case 3: return 4.0 / 3.0;
    default: throw std::invalid_argument("simplex_measure: dim must be 1, 2 or 3");
  }
}

}  // namespace bbdg
