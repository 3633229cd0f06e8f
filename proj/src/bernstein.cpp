#include "bbdg/bernstein.hpp"

#include "bbdg/orthopoly.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace bbdg {

template <int Dim>
double bernstein_value(const BaryIndex<Dim>& alpha, std::span<const double> lambda) {
  double v = multinomial<Dim>(alpha);
  for (int i = 0; i <= Dim; ++i) {
    const int a = alpha[i];
    if (a > 0) v *= std::pow(lambda[static_cast<std::size_t>(i)], a);
  }
  return v;
}

template double bernstein_value<1>(const BaryIndex<1>&, std::span<const double>);
template double bernstein_value<2>(const BaryIndex<2>&, std::span<const double>);
template double bernstein_value<3>(const BaryIndex<3>&, std::span<const double>);

double eval_bernstein(int n, const MultiIndex4& alpha, const std::array<double, 4>& lambda) {
  if (alpha.degree() != n) throw std::invalid_argument("eval_bernstein: |alpha| != N");
  constexpr double eps = 1e-10;
  double sum = 0.0;
  for (double l : lambda) {
    if (l < -eps) throw std::invalid_argument("eval_bernstein: lambda outside the simplex");
    sum += l;
  }
  if (std::abs(sum - 1.0) > eps) throw std::invalid_argument("eval_bernstein: lambda does not sum to 1");
  return bernstein_value<3>(alpha, lambda);
}

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
}

template <int Dim>
Eigen::MatrixXd vandermonde_impl(int n, std::span<const Point3> points) {
  const auto idx = simplex_indices<Dim>(n);
  Eigen::MatrixXd v(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t q = 0; q < points.size(); ++q) {
    const auto lam = simplex_barycentric(Dim, points[q]);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      v(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(a)) = bernstein_value<Dim>(idx[a], lam);
    }
  }
  return v;
}

template <int Dim>
Eigen::MatrixXd mixed_mass_impl(int m, int n) {
  const auto ia = simplex_indices<Dim>(m);
  const auto ib = simplex_indices<Dim>(n);
  const double scale = simplex_measure(Dim) / static_cast<double>(binomial(m + n + Dim, Dim));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ia.size()), static_cast<Eigen::Index>(ib.size()));
  for (std::size_t a = 0; a < ia.size(); ++a) {
    const double ca = multinomial<Dim>(ia[a]);
    for (std::size_t b = 0; b < ib.size(); ++b) {
      BaryIndex<Dim> sum;
      for (int i = 0; i <= Dim; ++i) sum[i] = ia[a][i] + ib[b][i];
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          scale * (ca * multinomial<Dim>(ib[b])) / multinomial<Dim>(sum);
    }
  }
  return out;
}

template <int Dim>
SparseRowOperator<double> elevation_impl(int m) {
  const auto rows = simplex_indices<Dim>(m);
  const int width = Dim + 1;
  std::vector<double> vals(rows.size() * static_cast<std::size_t>(width), 0.0);
  std::vector<int> cols(rows.size() * static_cast<std::size_t>(width), 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int j = 0; j <= Dim; ++j) {
      if (rows[r][j] == 0) continue;
      auto alpha = rows[r];
      alpha[j] -= 1;
      const auto slot = r * static_cast<std::size_t>(width) + static_cast<std::size_t>(j);
      vals[slot] = static_cast<double>(rows[r][j]) / m;
      cols[slot] = index_of<Dim>(alpha);
    }
  }
  return SparseRowOperator<double>(static_cast<int>(rows.size()), simplex_dim<Dim>(m - 1), width, std::move(vals),
                                   std::move(cols));
}

template <int Dim>
SparseRowOperator<double> reduction_impl(int m) {
  const auto rows = simplex_indices<Dim>(m - 1);
  const int width = Dim + 1;
  std::vector<double> vals(rows.size() * static_cast<std::size_t>(width), 0.0);
  std::vector<int> cols(rows.size() * static_cast<std::size_t>(width), 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int j = 0; j <= Dim; ++j) {
      auto beta = rows[r];
      beta[j] += 1;
      const auto slot = r * static_cast<std::size_t>(width) + static_cast<std::size_t>(j);
      vals[slot] = static_cast<double>(beta[j]) / m;
      cols[slot] = index_of<Dim>(beta);
    }
  }
  return SparseRowOperator<double>(static_cast<int>(rows.size()), simplex_dim<Dim>(m), width, std::move(vals),
                                   std::move(cols));
}

}  // namespace

Eigen::MatrixXd bernstein_vandermonde(int dim, int n, std::span<const Point3> points) {
  check_dim(dim);
  switch (dim) {
    case 1: return vandermonde_impl<1>(n, points);
    case 2: return vandermonde_impl<2>(n, points);
    default: return vandermonde_impl<3>(n, points);
  }
}

Eigen::MatrixXd bernstein_mixed_mass(int m, int n, int dim) {
  check_dim(dim);
  if (m < 0 || n < 0) throw DegreeError("bernstein_mixed_mass: negative degree");
  switch (dim) {
    case 1: return mixed_mass_impl<1>(m, n);
    case 2: return mixed_mass_impl<2>(m, n);
    default: return mixed_mass_impl<3>(m, n);
  }
}

Eigen::MatrixXd bernstein_mass(int n, int dim) {
  check_degree(n);
  return bernstein_mixed_mass(n, n, dim);
}

Eigen::MatrixXd face_mass(int n) { return bernstein_mass(n, 2); }

double mass_eigenvalue(int n, int i, int dim) {
  check_dim(dim);
  if (i < 0 || i > n) throw std::invalid_argument("mass_eigenvalue: need 0 <= i <= N");
  // |T| d! * [N!/(N-i)!] * [N!/(N+i+d)!] as running products.
  long double v = simplex_measure(dim);
  for (int k = 2; k <= dim; ++k) v *= k;
  for (int k = n - i + 1; k <= n; ++k) v *= k;
  for (int k = n + 1; k <= n + i + dim; ++k) v /= k;
  return static_cast<double>(v);
}

int mass_eigenvalue_multiplicity(int i, int dim) {
  check_dim(dim);
  return static_cast<int>(binomial(i + dim - 1, dim - 1));
}

SparseRowOperator<double> degree_elevation(int m, int dim) {
  check_dim(dim);
  if (m < 1) throw DegreeError("degree_elevation: m >= 1 required");
  switch (dim) {
    case 1: return elevation_impl<1>(m);
    case 2: return elevation_impl<2>(m);
    default: return elevation_impl<3>(m);
  }
}

SparseRowOperator<double> degree_reduction(int m, int dim) {
  check_dim(dim);
  if (m < 1) throw DegreeError("degree_reduction: m >= 1 required");
  switch (dim) {
    case 1: return reduction_impl<1>(m);
    case 2: return reduction_impl<2>(m);
    default: return reduction_impl<3>(m);
  }
}

Eigen::MatrixXd cascaded_reduction(int n, int i, int dim) {
  check_dim(dim);
  if (i < 0 || i > n) throw std::invalid_argument("cascaded_reduction: need 0 <= i <= N");
  const auto size = [dim](int m) {
    return dim == 1 ? simplex_dim<1>(m) : (dim == 2 ? simplex_dim<2>(m) : simplex_dim<3>(m));
  };
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(size(n), size(n));
  for (int m = n; m > n - i; --m) r = degree_reduction(m, dim).to_dense() * r;
  return r;
}

BernsteinDerivativeSet<double> barycentric_derivatives(int n) {
  check_degree(n);
  const auto idx = simplex_indices<3>(n);
  const int np = static_cast<int>(idx.size());
  auto values = std::make_shared<std::vector<double>>(static_cast<std::size_t>(np) * 4, 0.0);
  for (int r = 0; r < np; ++r) {
    for (int j = 0; j < 4; ++j) (*values)[static_cast<std::size_t>(r * 4 + j)] = idx[static_cast<std::size_t>(r)][j];
  }
  std::shared_ptr<const std::vector<double>> shared = values;

  BernsteinDerivativeSet<double> out;
  out.degree = n;
  for (int i = 0; i < 4; ++i) {
    auto cols = std::make_shared<std::vector<int>>(static_cast<std::size_t>(np) * 4, 0);
    for (int r = 0; r < np; ++r) {
      for (int j = 0; j < 4; ++j) {
        const auto& alpha = idx[static_cast<std::size_t>(r)];
        if (alpha[j] == 0) continue;  // value alpha_j is 0: sentinel slot
        auto beta = alpha;
        beta[i] += 1;
        beta[j] -= 1;
        (*cols)[static_cast<std::size_t>(r * 4 + j)] = index_of<3>(beta);
      }
    }
    out.ops[static_cast<std::size_t>(i)] = SparseRowOperator<double>(np, np, 4, shared, std::move(cols));
  }
  return out;
}

std::vector<double> lift_scalings(int n) {
  check_degree(n);
  std::vector<double> l(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    l[static_cast<std::size_t>(i)] = sign * static_cast<double>(binomial(n, i)) / (1.0 + i);
  }
  return l;
}

SparseRowOperator<double> build_L0(int n) {
  check_degree(n);
  const Eigen::MatrixXd e = degree_elevation(n + 1, 2).to_dense();
  const Eigen::MatrixXd l0 = 0.5 * (n + 1.0) * (n + 1.0) * (e.transpose() * e);
  return SparseRowOperator<double>::from_dense(l0);
}

Eigen::MatrixXd face_reduction_block(int n, int f) {
  check_degree(n);
  check_face(f);
  const auto layers = face_layer_ordering(n, f);
  const auto ell = lift_scalings(n);
  Eigen::MatrixXd el = Eigen::MatrixXd::Zero(volume_dofs(n), face_dofs(n));
  for (int j = 0; j <= n; ++j) {
    const Eigen::MatrixXd r = cascaded_reduction(n, j, 2);
    const auto& layer = layers.layers[static_cast<std::size_t>(j)];
    for (std::size_t q = 0; q < layer.size(); ++q) {
      el.row(layer[q]) = ell[static_cast<std::size_t>(j)] * r.row(static_cast<Eigen::Index>(q));
    }
  }
  return el;
}

LiftFactorization<double> build_EL(int n) {
  check_degree(n);
  LiftFactorization<double> lf;
  lf.degree = n;
  lf.L0 = build_L0(n);
  const int np = volume_dofs(n);
  const int nfp = face_dofs(n);
  Eigen::MatrixXd el(np, 4 * nfp);
  for (int f = 0; f < 4; ++f) el.middleCols(f * nfp, nfp) = face_reduction_block(n, f);
  lf.EL = SparseRowOperator<double>::from_dense(el);
  lf.scalings = lift_scalings(n);
  for (int j = 1; j <= n; ++j) lf.reductions.push_back(degree_reduction(n - j + 1, 2));
  for (int f = 0; f < 4; ++f) lf.layers[static_cast<std::size_t>(f)] = face_layer_ordering(n, f);
  return lf;
}

Eigen::MatrixXd bernstein_face_lift(int n, int f) {
  check_degree(n);
  check_face(f);
  const Eigen::MatrixXd mf = face_mass(n);
  const auto trace = face_trace_indices(n, f);
  Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(volume_dofs(n), face_dofs(n));
  for (std::size_t q = 0; q < trace.size(); ++q) coupling.row(trace[q]) = mf.row(static_cast<Eigen::Index>(q));
  return bernstein_mass(n, 3).llt().solve(coupling);
}

Eigen::MatrixXd bernstein_lift(int n) {
  const int nfp = face_dofs(n);
  Eigen::MatrixXd l(volume_dofs(n), 4 * nfp);
  for (int f = 0; f < 4; ++f) l.middleCols(f * nfp, nfp) = bernstein_face_lift(n, f);
  return l;
}

int lift_scratch_size(int n) { return 4 * face_dofs(n); }

namespace {

template <typename Real>
void check_lift_sizes(const LiftFactorization<Real>& lf, const FaceFluxes<Real>& flux, std::span<Real> out,
                      std::span<Real> scratch) {
  const auto nfp = static_cast<std::size_t>(lf.face_size());
  for (const auto& fl : flux) {
    if (fl.size() != nfp) throw std::invalid_argument("lift: face flux has wrong size");
  }
  if (out.size() != static_cast<std::size_t>(lf.volume_size())) throw std::invalid_argument("lift: output size");
  if (scratch.size() < static_cast<std::size_t>(lift_scratch_size(lf.degree))) {
    throw std::invalid_argument("lift: scratch too small");
  }
}

}  // namespace

template <typename Real>
void apply_lift_factorized(const LiftFactorization<Real>& lf, const FaceFluxes<Real>& flux, std::span<Real> out,
                           std::span<Real> scratch, OpCounter* counter) {
  check_lift_sizes(lf, flux, out, scratch);
  const auto nfp = static_cast<std::size_t>(lf.face_size());
  for (std::size_t f = 0; f < 4; ++f) lf.L0.apply(flux[f], scratch.subspan(f * nfp, nfp), counter);
  lf.EL.apply(std::span<const Real>(scratch.data(), 4 * nfp), out, counter);
}

template <typename Real>
void apply_lift_optimal(const LiftFactorization<Real>& lf, const FaceFluxes<Real>& flux, std::span<Real> out,
                        std::span<Real> scratch, OpCounter* counter) {
  check_lift_sizes(lf, flux, out, scratch);
  const int n = lf.degree;
  const auto nfp = static_cast<std::size_t>(lf.face_size());
  std::fill(out.begin(), out.end(), Real(0));
  std::uint64_t writes = 0;
  for (std::size_t f = 0; f < 4; ++f) {
    const auto& layers = lf.layers[f].layers;
    std::span<Real> cur = scratch.subspan(0, nfp);
    std::span<Real> next = scratch.subspan(nfp, nfp);
    lf.L0.apply(flux[f], cur, counter);
    for (std::size_t q = 0; q < layers[0].size(); ++q) out[static_cast<std::size_t>(layers[0][q])] += cur[q];
    writes += layers[0].size();
    for (int j = 1; j <= n; ++j) {
      const auto& red = lf.reductions[static_cast<std::size_t>(j - 1)];
      auto dst = next.subspan(0, static_cast<std::size_t>(red.rows()));
      red.apply(std::span<const Real>(cur.data(), static_cast<std::size_t>(red.cols())), dst, counter);
      const Real s = lf.scalings[static_cast<std::size_t>(j)];
      const auto& layer = layers[static_cast<std::size_t>(j)];
      for (std::size_t q = 0; q < layer.size(); ++q) out[static_cast<std::size_t>(layer[q])] += s * dst[q];
      writes += layer.size();
      std::swap(cur, next);
    }
  }
  if (counter) counter->add(writes);
}

template void apply_lift_factorized<double>(const LiftFactorization<double>&, const FaceFluxes<double>&,
                                            std::span<double>, std::span<double>, OpCounter*);
template void apply_lift_factorized<float>(const LiftFactorization<float>&, const FaceFluxes<float>&,
                                           std::span<float>, std::span<float>, OpCounter*);
template void apply_lift_optimal<double>(const LiftFactorization<double>&, const FaceFluxes<double>&,
                                         std::span<double>, std::span<double>, OpCounter*);
template void apply_lift_optimal<float>(const LiftFactorization<float>&, const FaceFluxes<float>&, std::span<float>,
                                        std::span<float>, OpCounter*);

std::vector<double> apply_lift_factorized(const LiftFactorization<double>& lf, const FaceFluxes<double>& flux,
                                          OpCounter* counter) {
  std::vector<double> out(static_cast<std::size_t>(lf.volume_size()));
  std::vector<double> scratch(static_cast<std::size_t>(lift_scratch_size(lf.degree)));
  apply_lift_factorized<double>(lf, flux, out, scratch, counter);
  return out;
}

std::vector<double> apply_lift_optimal(const LiftFactorization<double>& lf, const FaceFluxes<double>& flux,
                                       OpCounter* counter) {
  std::vector<double> out(static_cast<std::size_t>(lf.volume_size()));
  std::vector<double> scratch(static_cast<std::size_t>(lift_scratch_size(lf.degree)));
  apply_lift_optimal<double>(lf, flux, out, scratch, counter);
  return out;
}

Eigen::MatrixXd modal_transform(int n, int dim) {
  check_dim(dim);
  if (n < 0) throw DegreeError("modal_transform: negative degree");
  if (n > 12) throw DegreeError("modal_transform: inversion is ill-conditioned beyond N = 12");
  // L2 projection of each modal function onto the Bernstein basis.
  const auto rule = simplex_quadrature(dim, 2 * n);
  const Eigen::MatrixXd b = bernstein_vandermonde(dim, n, rule.points);
  const Eigen::MatrixXd l = modal_basis(dim, n, rule.points);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(),
                                                              static_cast<Eigen::Index>(rule.weights.size()));
  const Eigen::MatrixXd g = b.transpose() * w.asDiagonal() * l;
  return bernstein_mixed_mass(n, n, dim).llt().solve(g);
}

}  // namespace bbdg
