#include "bbdg/orthopoly.hpp"

#include <cmath>
#include <stdexcept>

namespace bbdg {

double jacobi_p(double x, double alpha, double beta, int n) {
  const double ab = alpha + beta;
  const double gamma0 = std::pow(2.0, ab + 1.0) / (ab + 1.0) *
                        std::exp(std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) - std::lgamma(ab + 1.0));
  double p_prev = 1.0 / std::sqrt(gamma0);
  if (n == 0) return p_prev;
  const double gamma1 = (alpha + 1.0) * (beta + 1.0) / (ab + 3.0) * gamma0;
  double p = ((ab + 2.0) * x / 2.0 + (alpha - beta) / 2.0) / std::sqrt(gamma1);
  double a_old = 2.0 / (2.0 + ab) * std::sqrt((alpha + 1.0) * (beta + 1.0) / (ab + 3.0));
  for (int i = 1; i < n; ++i) {
    const double h1 = 2.0 * i + ab;
    const double a_new = 2.0 / (h1 + 2.0) *
                         std::sqrt((i + 1.0) * (i + 1.0 + ab) * (i + 1.0 + alpha) * (i + 1.0 + beta) / (h1 + 1.0) /
                                   (h1 + 3.0));
    const double b_new = -(alpha * alpha - beta * beta) / h1 / (h1 + 2.0);
    const double p_next = (-a_old * p_prev + (x - b_new) * p) / a_new;
    p_prev = p;
    p = p_next;
    a_old = a_new;
  }
  return p;
}

double grad_jacobi_p(double x, double alpha, double beta, int n) {
  if (n == 0) return 0.0;
  return std::sqrt(n * (n + alpha + beta + 1.0)) * jacobi_p(x, alpha + 1.0, beta + 1.0, n - 1);
}

std::vector<std::array<int, 3>> modal_indices(int dim, int n) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("modal_indices: dim must be 1, 2 or 3");
  std::vector<std::array<int, 3>> out;
  for (int total = 0; total <= n; ++total) {
    if (dim == 1) {
      out.push_back({total, 0, 0});
    } else if (dim == 2) {
      for (int i = total; i >= 0; --i) out.push_back({i, total - i, 0});
    } else {
      for (int i = total; i >= 0; --i) {
        for (int j = total - i; j >= 0; --j) out.push_back({i, j, total - i - j});
      }
    }
  }
  return out;
}

namespace {

// Collapsed coordinates of a reference point.
void collapse_2d(double r, double s, double& a, double& b) {
  a = (std::abs(1.0 - s) > 1e-14) ? 2.0 * (1.0 + r) / (1.0 - s) - 1.0 : -1.0;
  b = s;
}

void collapse_3d(double r, double s, double t, double& a, double& b, double& c) {
  a = (std::abs(s + t) > 1e-14) ? 2.0 * (1.0 + r) / (-s - t) - 1.0 : -1.0;
  b = (std::abs(1.0 - t) > 1e-14) ? 2.0 * (1.0 + s) / (1.0 - t) - 1.0 : -1.0;
  c = t;
}

}  // namespace

Eigen::MatrixXd modal_basis(int dim, int n, std::span<const Point3> points) {
  const auto modes = modal_indices(dim, n);
  Eigen::MatrixXd v(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(modes.size()));
  for (std::size_t q = 0; q < points.size(); ++q) {
    const auto& x = points[q];
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const int i = modes[m][0];
      const int j = modes[m][1];
      const int k = modes[m][2];
      double val = 0.0;
      if (dim == 1) {
        val = jacobi_p(x[0], 0.0, 0.0, i);
      } else if (dim == 2) {
        double a = 0.0;
        double b = 0.0;
        collapse_2d(x[0], x[1], a, b);
        val = std::sqrt(2.0) * jacobi_p(a, 0.0, 0.0, i) * jacobi_p(b, 2.0 * i + 1.0, 0.0, j) * std::pow(1.0 - b, i);
      } else {
        double a = 0.0;
        double b = 0.0;
        double c = 0.0;
        collapse_3d(x[0], x[1], x[2], a, b, c);
        val = 2.0 * std::sqrt(2.0) * jacobi_p(a, 0.0, 0.0, i) * jacobi_p(b, 2.0 * i + 1.0, 0.0, j) *
              std::pow(1.0 - b, i) * jacobi_p(c, 2.0 * (i + j) + 2.0, 0.0, k) * std::pow(1.0 - c, i + j);
      }
      v(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(m)) = val;
    }
  }
  return v;
}

ModalGradient modal_gradient_3d(int n, std::span<const Point3> points) {
  const auto modes = modal_indices(3, n);
  const auto rows = static_cast<Eigen::Index>(points.size());
  const auto cols = static_cast<Eigen::Index>(modes.size());
  ModalGradient g{Eigen::MatrixXd(rows, cols), Eigen::MatrixXd(rows, cols), Eigen::MatrixXd(rows, cols)};
  for (Eigen::Index q = 0; q < rows; ++q) {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    const auto& x = points[static_cast<std::size_t>(q)];
    collapse_3d(x[0], x[1], x[2], a, b, c);
    for (Eigen::Index m = 0; m < cols; ++m) {
      const int id = modes[static_cast<std::size_t>(m)][0];
      const int jd = modes[static_cast<std::size_t>(m)][1];
      const int kd = modes[static_cast<std::size_t>(m)][2];
      const double fa = jacobi_p(a, 0.0, 0.0, id);
      const double dfa = grad_jacobi_p(a, 0.0, 0.0, id);
      const double gb = jacobi_p(b, 2.0 * id + 1.0, 0.0, jd);
      const double dgb = grad_jacobi_p(b, 2.0 * id + 1.0, 0.0, jd);
      const double hc = jacobi_p(c, 2.0 * (id + jd) + 2.0, 0.0, kd);
      const double dhc = grad_jacobi_p(c, 2.0 * (id + jd) + 2.0, 0.0, kd);
      const double hb = 0.5 * (1.0 - b);
      const double hcc = 0.5 * (1.0 - c);

      double vr = dfa * gb * hc;
      if (id > 0) vr *= std::pow(hb, id - 1);
      if (id + jd > 0) vr *= std::pow(hcc, id + jd - 1);

      double vs = 0.5 * (1.0 + a) * vr;
      double tmp = dgb * std::pow(hb, id);
      if (id > 0) tmp += -0.5 * id * gb * std::pow(hb, id - 1);
      if (id + jd > 0) tmp *= std::pow(hcc, id + jd - 1);
      tmp = fa * tmp * hc;
      vs += tmp;

      double vt = 0.5 * (1.0 + a) * vr + 0.5 * (1.0 + b) * tmp;
      tmp = dhc * std::pow(hcc, id + jd);
      if (id + jd > 0) tmp -= 0.5 * (id + jd) * hc * std::pow(hcc, id + jd - 1);
      tmp = fa * gb * tmp * std::pow(hb, id);
      vt += tmp;

      const double scale = std::pow(2.0, 2 * id + jd + 1.5);
      g.dr(q, m) = vr * scale;
      g.ds(q, m) = vs * scale;
      g.dt(q, m) = vt * scale;
    }
  }
  return g;
}

}  // namespace bbdg
