#include "bbdg/operator_lab.hpp"

#include "bbdg/bernstein.hpp"
#include "bbdg/orthopoly.hpp"
#include "bbdg/tensor_index.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace bbdg {

double condition_number(const Eigen::MatrixXd& a, double rank_cut) {
  if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0) {
    throw std::invalid_argument("condition_number: operator is zero");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  const double s1 = s(0);
  double sr = s1;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rank_cut * s1) sr = s(i);
  }
  return s1 / sr;
}

Extrema entry_extrema(const Eigen::MatrixXd& a) {
  Extrema e;
  e.min_all = a.minCoeff();
  e.max_all = a.maxCoeff();
  e.min_nonzero = std::numeric_limits<double>::infinity();
  e.max_nonzero = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double v = a(i, j);
      if (v == 0.0) continue;
      e.min_nonzero = std::min(e.min_nonzero, v);
      e.max_nonzero = std::max(e.max_nonzero, v);
    }
  }
  if (!std::isfinite(e.min_nonzero)) e.min_nonzero = e.max_nonzero = 0.0;
  return e;
}

const std::vector<std::string>& operator_names() {
  static const std::vector<std::string> names{"bernstein_d0", "bernstein_dr",   "bernstein_lift",
                                              "bernstein_EL", "bernstein_L0",   "nodal_dr",
                                              "nodal_lift",   "bernstein_vandermonde"};
  return names;
}

Eigen::MatrixXd named_operator(const std::string& name, int n, NodeKind nodes) {
  check_degree(n);
  if (name == "bernstein_d0") return barycentric_derivatives(n)[0].to_dense();
  if (name == "bernstein_dr") {
    const auto d = barycentric_derivatives(n);
    return 0.5 * (d[1].to_dense() - d[0].to_dense());
  }
  if (name == "bernstein_lift") return bernstein_face_lift(n, 0);
  if (name == "bernstein_EL") return face_reduction_block(n, 0);
  if (name == "bernstein_L0") return build_L0(n).to_dense();
  if (name == "nodal_dr") return build_nodal_operators(build_nodes(n, nodes)).Dr;
  if (name == "nodal_lift") return build_nodal_operators(build_nodes(n, nodes)).face_lift(0);
  if (name == "bernstein_vandermonde") return basis_conversion(build_nodes(n, nodes)).to_nodal;
  throw std::invalid_argument("unknown operator '" + name + "'");
}

OperatorReport report_operator(const std::string& name, int n, NodeKind nodes) {
  const Eigen::MatrixXd a = named_operator(name, n, nodes);
  OperatorReport r;
  r.name = name;
  r.degree = n;
  r.rows = static_cast<int>(a.rows());
  r.cols = static_cast<int>(a.cols());
  long total = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const int nnz = static_cast<int>((a.row(i).array() != 0.0).count());
    r.nnz_max = std::max(r.nnz_max, nnz);
    total += nnz;
  }
  r.nnz_mean = static_cast<double>(total) / static_cast<double>(a.rows());
  r.cond = condition_number(a);
  r.extrema = entry_extrema(a);
  return r;
}

namespace {

std::vector<double> sorted_symmetric_eigenvalues(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(v.begin(), v.end());
  return v;
}

double max_rel_mismatch(const std::vector<double>& got, const std::vector<double>& expected) {
  if (got.size() != expected.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    worst = std::max(worst, std::abs(got[k] - expected[k]) / std::abs(expected[k]));
  }
  return worst;
}

int simplex_size(int dim, int n) {
  return dim == 1 ? simplex_dim<1>(n) : (dim == 2 ? simplex_dim<2>(n) : simplex_dim<3>(n));
}

}  // namespace

std::vector<IdentityCheck> eigen_identities(int n, int dim, double tol) {
  check_degree(n);
  if (dim < 1 || dim > 3) throw std::invalid_argument("eigen_identities: dim must be 1, 2 or 3");
  std::vector<IdentityCheck> out;
  auto record = [&](const std::string& name, double err) {
    out.push_back({name, n, dim, err, err <= tol});
  };

  {
    std::vector<double> expected;
    for (int i = 0; i <= n; ++i) {
      for (int k = 0; k < mass_eigenvalue_multiplicity(i, dim); ++k) expected.push_back(mass_eigenvalue(n, i, dim));
    }
    std::sort(expected.begin(), expected.end());
    record("mass_eigenvalues", max_rel_mismatch(sorted_symmetric_eigenvalues(bernstein_mass(n, dim)), expected));
  }

  if (dim == 3) {
    std::vector<double> expected;
    for (int i = 0; i <= n; ++i) {
      for (int k = 0; k <= i; ++k) expected.push_back(0.5 * (n + i + 3.0) * (n + 1.0 - i));
    }
    std::sort(expected.begin(), expected.end());
    const auto l0 = sorted_symmetric_eigenvalues(build_L0(n).to_dense());
    record("L0_eigenvalues", max_rel_mismatch(l0, expected));

    const int np = volume_dofs(n);
    const auto tr = face_trace_indices(n, 0);
    const Eigen::MatrixXd mf = face_mass(n);
    Eigen::MatrixXd mfe = Eigen::MatrixXd::Zero(np, np);
    for (std::size_t a = 0; a < tr.size(); ++a) {
      for (std::size_t b = 0; b < tr.size(); ++b) {
        mfe(tr[a], tr[b]) = mf(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      }
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(mfe, bernstein_mass(n, 3), Eigen::EigenvaluesOnly);
    const double scale = ges.eigenvalues().cwiseAbs().maxCoeff();
    std::vector<double> nz;
    for (Eigen::Index k = 0; k < ges.eigenvalues().size(); ++k) {
      if (std::abs(ges.eigenvalues()(k)) > 1e-10 * scale) nz.push_back(ges.eigenvalues()(k));
    }
    std::sort(nz.begin(), nz.end());
    record("generalized_face_spectrum", max_rel_mismatch(nz, l0));
  }

  if (n <= 12) {
    const auto modes = modal_indices(dim, n);
    const Eigen::MatrixXd tn = modal_transform(n, dim);
    double worst = 0.0;
    for (int i = 1; i <= n; ++i) {
      const Eigen::MatrixXd s = modal_transform(n - i, dim).inverse() * cascaded_reduction(n, i, dim) * tn;
      const int lo = simplex_size(dim, n - i);
      for (Eigen::Index r = 0; r < s.rows(); ++r) {
        for (Eigen::Index c = 0; c < s.cols(); ++c) {
          double expected = 0.0;
          if (r == c && r < lo) {
            const auto& m = modes[static_cast<std::size_t>(r)];
            const int g = m[0] + m[1] + m[2];
            expected = mass_eigenvalue(n - i, g, dim) / mass_eigenvalue(n, g, dim);
          }
          worst = std::max(worst, std::abs(s(r, c) - expected));
        }
      }
    }
    record("modal_reduction_diagonal", worst);
  }
  return out;
}

OpKind parse_op_kind(const std::string& s) {
  if (s == "dense_lift") return OpKind::dense_lift;
  if (s == "factorized_lift") return OpKind::factorized_lift;
  if (s == "optimal_lift") return OpKind::optimal_lift;
  if (s == "sparse_derivative") return OpKind::sparse_derivative;
  if (s == "dense_derivative") return OpKind::dense_derivative;
  throw std::invalid_argument("unknown operation kind '" + s + "'");
}

std::string to_string(OpKind kind) {
  switch (kind) {
    case OpKind::dense_lift: return "dense_lift";
    case OpKind::factorized_lift: return "factorized_lift";
    case OpKind::optimal_lift: return "optimal_lift";
    case OpKind::sparse_derivative: return "sparse_derivative";
    case OpKind::dense_derivative: return "dense_derivative";
  }
  return "unknown";
}

std::uint64_t count_madds(OpKind kind, int n) {
  check_degree(n);
  const auto np = static_cast<std::size_t>(volume_dofs(n));
  const auto nfp = static_cast<std::size_t>(face_dofs(n));
  OpCounter counter;
  std::vector<double> vol(np, 1.0);
  std::vector<double> out(np, 0.0);
  std::array<std::vector<double>, 4> faces;
  for (auto& f : faces) f.assign(nfp, 1.0);
  const FaceFluxes<double> flux{faces[0], faces[1], faces[2], faces[3]};

  switch (kind) {
    case OpKind::dense_lift: {
      // Every stored entry of the N_p x 4 N^f_p matrix is used.
      const auto l = SparseRowOperator<double>::from_dense(bernstein_lift(n), -1.0);
      std::vector<double> stacked(4 * nfp, 1.0);
      l.apply(stacked, out, &counter);
      break;
    }
    case OpKind::factorized_lift:
      apply_lift_factorized(build_EL(n), flux, &counter);
      break;
    case OpKind::optimal_lift:
      apply_lift_optimal(build_EL(n), flux, &counter);
      break;
    case OpKind::sparse_derivative: {
      const auto d = barycentric_derivatives(n);
      for (int i = 0; i < 4; ++i) d[i].apply(vol, out, &counter);
      break;
    }
    case OpKind::dense_derivative: {
      const auto d = barycentric_derivatives(n);
      const Eigen::MatrixXd d0 = d[0].to_dense();
      for (int i = 1; i < 4; ++i) {
        const auto dense = SparseRowOperator<double>::from_dense(0.5 * (d[i].to_dense() - d0), -1.0);
        dense.apply(vol, out, &counter);
      }
      break;
    }
  }
  return counter.madds;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 matching points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ComplexitySweep complexity_sweep(int n_min, int n_max, OpKind kind) {
  if (n_min > n_max) throw std::invalid_argument("complexity_sweep: empty degree range");
  ComplexitySweep s;
  s.kind = kind;
  std::vector<double> x;
  std::vector<double> y;
  for (int n = n_min; n <= n_max; ++n) {
    s.degrees.push_back(n);
    s.madds.push_back(count_madds(kind, n));
    x.push_back(n);
    y.push_back(static_cast<double>(s.madds.back()));
  }
  s.slope = x.size() >= 2 ? loglog_slope(x, y) : std::numeric_limits<double>::quiet_NaN();
  return s;
}

void write_report_header(std::ostream& os) { os << "operator,N,cond,min,max,nnz_max,slope\n"; }

void write_report_row(std::ostream& os, const OperatorReport& r) {
  os << std::setprecision(17) << r.name << ',' << r.degree << ',' << r.cond << ',' << r.extrema.min_all << ','
     << r.extrema.max_all << ',' << r.nnz_max << ",\n";
}

void write_sweep_header(std::ostream& os) { os << "kind,N,madds,slope\n"; }

void write_sweep_rows(std::ostream& os, const ComplexitySweep& s) {
  for (std::size_t i = 0; i < s.degrees.size(); ++i) {
    os << std::setprecision(17) << to_string(s.kind) << ',' << s.degrees[i] << ',' << s.madds[i] << ',' << s.slope
       << '\n';
  }
}

void write_operator_coo(std::ostream& os, const Eigen::MatrixXd& a) {
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) os << i << ' ' << j << ' ' << a(i, j) << '\n';
    }
  }
}

}  // namespace bbdg
