#include "bbdg/bernstein.hpp"
#include "bbdg/oracle.hpp"
#include "bbdg/orthopoly.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>

using namespace bbdg;
using bbdg::testing::rel_diff;

namespace {

std::vector<double> sorted_eigenvalues(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(v.begin(), v.end());
  return v;
}

int dim_size(int dim, int n) {
  return dim == 1 ? simplex_dim<1>(n) : (dim == 2 ? simplex_dim<2>(n) : simplex_dim<3>(n));
}

}  // namespace

TEST_CASE("eval_bernstein") {
  CHECK(eval_bernstein(1, {{1, 0, 0, 0}}, {1, 0, 0, 0}) == 1.0);
  CHECK(eval_bernstein(2, {{1, 1, 0, 0}}, {0.5, 0.5, 0, 0}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(eval_bernstein(3, {{1, 1, 0, 0}}, {0.5, 0.5, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(eval_bernstein(2, {{1, 1, 0, 0}}, {0.6, 0.5, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(eval_bernstein(2, {{1, 1, 0, 0}}, {1.1, -0.1, 0, 0}), std::invalid_argument);
  for (int n = 1; n <= 9; ++n) {
    const auto lam = testing::random_barycentric();
    double sum = 0.0;
    for (const auto& a : canonical_ordering(n)) sum += eval_bernstein(n, a, lam);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("closed-form mass agrees with quadrature") {
  Eigen::MatrixXd m1(2, 2);
  m1 << 2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0;
  CHECK(rel_diff(bernstein_mass(1, 1), m1) < 1e-15);
  CHECK(rel_diff(quadrature_mass(1, 1), m1) < 1e-14);
  for (int dim = 1; dim <= 3; ++dim) {
    for (int n = 1; n <= 9; ++n) {
      const Eigen::MatrixXd m = bernstein_mass(n, dim);
      CHECK(rel_diff(m, quadrature_mass(n, dim)) < 1e-12);
      CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
      // Every Bernstein polynomial has the same integral.
      const double expected = simplex_measure(dim) / static_cast<double>(binomial(n + dim, dim));
      CHECK((m.rowwise().sum().array() - expected).abs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("mass eigenvalues and multiplicities") {
  const auto e = sorted_eigenvalues(bernstein_mass(1, 1));
  CHECK(e[0] == doctest::Approx(1.0 / 3.0));
  CHECK(e[1] == doctest::Approx(1.0));
  for (int dim = 1; dim <= 3; ++dim) {
    for (int n = 1; n <= 9; ++n) {
      std::vector<double> expected;
      for (int i = 0; i <= n; ++i) {
        for (int k = 0; k < mass_eigenvalue_multiplicity(i, dim); ++k) expected.push_back(mass_eigenvalue(n, i, dim));
      }
      std::sort(expected.begin(), expected.end());
      const auto got = sorted_eigenvalues(bernstein_mass(n, dim));
      REQUIRE(got.size() == expected.size());
      double worst = 0.0;
      for (std::size_t k = 0; k < got.size(); ++k) worst = std::max(worst, std::abs(got[k] / expected[k] - 1.0));
      CHECK(worst < 1e-8);
    }
  }
}

TEST_CASE("face mass") {
  const Eigen::MatrixXd m = face_mass(1);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(m(i, j) == doctest::Approx(i == j ? 1.0 / 3.0 : 1.0 / 6.0));
  }
  for (int n = 1; n <= 6; ++n) {
    const Eigen::MatrixXd mf = face_mass(n);
    CHECK(mf == mf.transpose());
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        const Eigen::MatrixXd ei = cascaded_reduction(n, i, 2).transpose();
        const Eigen::MatrixXd ej = cascaded_reduction(n, j, 2).transpose();
        CHECK(rel_diff(ei.transpose() * mf * ej, bernstein_mixed_mass(n - i, n - j, 2)) < 1e-12);
      }
    }
  }
}

TEST_CASE("degree elevation") {
  const Eigen::MatrixXd e1 = degree_elevation(1, 1).to_dense();
  CHECK(e1.rows() == 2);
  CHECK(e1.cols() == 1);
  CHECK(e1(0, 0) == 1.0);
  CHECK(e1(1, 0) == 1.0);
  for (int m = 1; m <= 9; ++m) {
    const auto e = degree_elevation(m, 2);
    CHECK(e.max_row_nnz() <= 3);
    CHECK((e.to_dense().rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-15);
    CHECK(degree_reduction(m, 2).to_dense() == e.to_dense().transpose());
  }
  for (int m = 1; m <= 9; ++m) {
    const auto e = degree_elevation(m, 3);
    const auto c = testing::random_vector(static_cast<std::size_t>(volume_dofs(m - 1)));
    std::vector<double> ce(static_cast<std::size_t>(volume_dofs(m)));
    e.apply(c, ce);
    const auto lo = simplex_indices<3>(m - 1);
    const auto hi = simplex_indices<3>(m);
    for (int q = 0; q < 20; ++q) {
      const auto lam = testing::random_barycentric();
      double a = 0.0;
      double b = 0.0;
      for (std::size_t k = 0; k < lo.size(); ++k) a += c[k] * bernstein_value<3>(lo[k], lam);
      for (std::size_t k = 0; k < hi.size(); ++k) b += ce[k] * bernstein_value<3>(hi[k], lam);
      CHECK(std::abs(a - b) <= 1e-13);
    }
  }
}

TEST_CASE("barycentric derivative structure") {
  const auto d = barycentric_derivatives(2);
  const Eigen::MatrixXd d0 = d[0].to_dense();
  const int col = index_of<3>(MultiIndex4{{1, 1, 0, 0}});
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(10);
  expected(index_of<3>(MultiIndex4{{1, 1, 0, 0}})) = 1;
  expected(index_of<3>(MultiIndex4{{0, 2, 0, 0}})) = 2;
  expected(index_of<3>(MultiIndex4{{0, 1, 1, 0}})) = 1;
  expected(index_of<3>(MultiIndex4{{0, 1, 0, 1}})) = 1;
  CHECK(d0.col(col) == expected);

  for (int n = 1; n <= 9; ++n) {
    const auto ds = barycentric_derivatives(n);
    const auto np = static_cast<std::size_t>(volume_dofs(n));
    for (int i = 0; i < 4; ++i) {
      CHECK(ds[i].width() == 4);
      CHECK(ds[i].max_row_nnz() <= 4);
      CHECK(ds[i].values_storage() == ds[0].values_storage());
      const Eigen::MatrixXd dense = ds[i].to_dense();
      CHECK((dense.array() != 0.0).colwise().count().maxCoeff() <= 4);
      std::vector<double> ones(np, 1.0);
      std::vector<double> out(np);
      ds[i].apply(ones, out);
      for (double v : out) CHECK(v == static_cast<double>(n));
    }
  }
}

TEST_CASE("barycentric derivatives agree with the quadrature oracle") {
  for (int n = 1; n <= 6; ++n) {
    const auto ds = barycentric_derivatives(n);
    for (int i = 0; i < 4; ++i) CHECK(rel_diff(ds[i].to_dense(), derivative_oracle(n, i)) < 1e-10);
  }
}

TEST_CASE("chain rule reproduces analytic reference derivatives") {
  // Random polynomials in monomials r^a s^b t^c, interpolated into Bernstein form.
  for (int n = 1; n <= 9; ++n) {
    const auto idx = simplex_indices<3>(n);
    std::vector<Point3> lattice;
    for (const auto& a : idx) {
      std::array<double, 4> lam{};
      for (int k = 0; k < 4; ++k) lam[static_cast<std::size_t>(k)] = static_cast<double>(a[k]) / n;
      const auto x = ReferenceTet::reference(lam);
      lattice.push_back({x[0], x[1], x[2]});
    }
    const Eigen::MatrixXd vb = bernstein_vandermonde(3, n, lattice);
    const auto lu = vb.partialPivLu();
    const auto ds = barycentric_derivatives(n);
    const auto np = static_cast<std::size_t>(volume_dofs(n));

    std::vector<std::array<int, 3>> mono;
    for (int a = 0; a <= n; ++a) {
      for (int b = 0; a + b <= n; ++b) {
        for (int c = 0; a + b + c <= n; ++c) mono.push_back({a, b, c});
      }
    }
    auto ipow = [](double x, int e) { return e <= 0 ? 1.0 : std::pow(x, e); };
    double worst = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
      const auto coef = testing::random_vector(mono.size());
      auto value = [&](const Point3& x, int which) {
        double v = 0.0;
        for (std::size_t m = 0; m < mono.size(); ++m) {
          const auto [a, b, c] = mono[m];
          const int e[3] = {a, b, c};
          double term = coef[m];
          for (int k = 0; k < 3; ++k) {
            if (k == which) {
              term *= e[k] == 0 ? 0.0 : e[k] * ipow(x[static_cast<std::size_t>(k)], e[k] - 1);
            } else {
              term *= ipow(x[static_cast<std::size_t>(k)], e[k]);
            }
          }
          v += term;
        }
        return v;
      };
      Eigen::VectorXd samples(static_cast<Eigen::Index>(np));
      for (std::size_t k = 0; k < np; ++k) samples(static_cast<Eigen::Index>(k)) = value(lattice[k], -1);
      const Eigen::VectorXd c = lu.solve(samples);
      std::array<std::vector<double>, 4> dl;
      for (int i = 0; i < 4; ++i) {
        dl[static_cast<std::size_t>(i)].resize(np);
        ds[i].apply(std::span<const double>(c.data(), np), dl[static_cast<std::size_t>(i)]);
      }
      for (int q = 0; q < 5; ++q) {
        const auto lam = testing::random_barycentric();
        const auto xr = ReferenceTet::reference(lam);
        const Point3 x{xr[0], xr[1], xr[2]};
        for (int k = 0; k < 3; ++k) {
          double got = 0.0;
          for (std::size_t a = 0; a < np; ++a) {
            const double diff = dl[static_cast<std::size_t>(k + 1)][a] - dl[0][a];
            got += 0.5 * diff * bernstein_value<3>(idx[a], lam);
          }
          const double exact = value(x, k);
          worst = std::max(worst, std::abs(got - exact) / std::max(1.0, std::abs(exact)));
        }
      }
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("L0 structure and spectrum") {
  for (int n = 1; n <= 9; ++n) {
    const auto l0 = build_L0(n);
    CHECK(l0.rows() == face_dofs(n));
    CHECK(l0.max_row_nnz() <= 7);
    const Eigen::MatrixXd d = l0.to_dense();
    CHECK((d - d.transpose()).cwiseAbs().maxCoeff() < 1e-13);
    std::vector<double> expected;
    for (int i = 0; i <= n; ++i) {
      for (int k = 0; k <= i; ++k) expected.push_back(0.5 * (n + i + 3.0) * (n + 1.0 - i));
    }
    std::sort(expected.begin(), expected.end());
    const auto got = sorted_eigenvalues(d);
    CHECK(got.front() > 0.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < got.size(); ++k) worst = std::max(worst, std::abs(got[k] / expected[k] - 1.0));
    CHECK(worst < 1e-8);

    // Nonzero eigenvalues of M^{-1} M^f (face block embedded) are those of L0.
    const int np = volume_dofs(n);
    const auto tr = face_trace_indices(n, 0);
    Eigen::MatrixXd mfe = Eigen::MatrixXd::Zero(np, np);
    const Eigen::MatrixXd mf = face_mass(n);
    for (std::size_t a = 0; a < tr.size(); ++a) {
      for (std::size_t b = 0; b < tr.size(); ++b) mfe(tr[a], tr[b]) = mf(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(mfe, bernstein_mass(n, 3));
    std::vector<double> nz;
    for (Eigen::Index k = 0; k < ges.eigenvalues().size(); ++k) {
      if (std::abs(ges.eigenvalues()(k)) > 1e-8) nz.push_back(ges.eigenvalues()(k));
    }
    std::sort(nz.begin(), nz.end());
    REQUIRE(nz.size() == got.size());
    for (std::size_t k = 0; k < nz.size(); ++k) CHECK(nz[k] == doctest::Approx(got[k]).epsilon(1e-8));
  }
}

TEST_CASE("lift scalings and E_L") {
  const auto l = lift_scalings(4);
  CHECK(l[1] == doctest::Approx(-2.0));
  CHECK(l[2] == doctest::Approx(2.0));
  CHECK(l[3] == doctest::Approx(-1.0));
  CHECK(l[4] == doctest::Approx(0.2));

  const Eigen::MatrixXd el9 = build_EL(9).EL.to_dense();
  CHECK(el9.minCoeff() == doctest::Approx(-21.0).epsilon(1e-12));
  CHECK(el9.maxCoeff() == doctest::Approx(25.2).epsilon(1e-12));

  for (int n = 1; n <= 9; ++n) {
    const auto lf = build_EL(n);
    const int nfp = face_dofs(n);
    CHECK(lf.EL.width() <= nfp + 3);
    for (const auto& r : lf.reductions) CHECK(r.max_row_nnz() <= 3);
    CHECK(static_cast<int>(lf.reductions.size()) == n);
    const Eigen::MatrixXd el = lf.EL.to_dense();
    // Block columns are row permutations of one another.
    auto sorted_rows = [&](int f) {
      std::vector<std::vector<double>> rows;
      for (int r = 0; r < el.rows(); ++r) {
        const Eigen::VectorXd row = el.block(r, f * nfp, 1, nfp).transpose();
        rows.emplace_back(row.data(), row.data() + row.size());
      }
      std::sort(rows.begin(), rows.end());
      return rows;
    };
    const auto ref = sorted_rows(0);
    for (int f = 1; f < 4; ++f) CHECK(sorted_rows(f) == ref);
  }
}

TEST_CASE("factorized lift agrees with the dense oracle") {
  for (int n = 1; n <= 6; ++n) {
    const Eigen::MatrixXd l0 = build_L0(n).to_dense();
    for (int f = 0; f < 4; ++f) {
      const Eigen::MatrixXd oracle = dense_lift_oracle(n, f);
      CHECK(rel_diff(face_reduction_block(n, f) * l0, oracle) < 1e-10);
      CHECK(rel_diff(bernstein_face_lift(n, f), oracle) < 1e-10);
    }
  }
}

TEST_CASE("Bernstein lift entry extrema") {
  const Eigen::MatrixXd l6 = bernstein_lift(6);
  CHECK(l6.minCoeff() == doctest::Approx(-142.5).epsilon(1e-9));
  CHECK(l6.maxCoeff() == doctest::Approx(137.5).epsilon(1e-9));
  const Eigen::MatrixXd l9 = bernstein_lift(9);
  CHECK(l9.minCoeff() == doctest::Approx(-1176.0).epsilon(1e-6));
  CHECK(l9.maxCoeff() == doctest::Approx(1386.0).epsilon(1e-6));
}

TEST_CASE("face lifts are row permutations of one another") {
  for (int n = 1; n <= 5; ++n) {
    const int nfp = face_dofs(n);
    auto rows_of = [&](int f) {
      const Eigen::MatrixXd l = dense_lift_oracle(n, f);
      std::vector<std::vector<double>> rows;
      for (int r = 0; r < l.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(nfp));
        for (int c = 0; c < nfp; ++c) row[static_cast<std::size_t>(c)] = std::round(l(r, c) * 1e8) / 1e8;
        rows.push_back(row);
      }
      std::sort(rows.begin(), rows.end());
      return rows;
    };
    const auto ref = rows_of(0);
    for (int f = 1; f < 4; ++f) CHECK(rows_of(f) == ref);
  }
}

TEST_CASE("lift application paths") {
  for (int n = 1; n <= 9; ++n) {
    const auto lf = build_EL(n);
    const int nfp = face_dofs(n);
    const Eigen::MatrixXd dense = bernstein_lift(n);

    std::array<std::vector<double>, 4> zero;
    for (auto& z : zero) z.assign(static_cast<std::size_t>(nfp), 0.0);
    FaceFluxes<double> zf{zero[0], zero[1], zero[2], zero[3]};
    for (double v : apply_lift_factorized(lf, zf)) CHECK(v == 0.0);
    for (double v : apply_lift_optimal(lf, zf)) CHECK(v == 0.0);

    auto onehot = zero;
    onehot[0][static_cast<std::size_t>(nfp / 2)] = 1.0;
    FaceFluxes<double> of{onehot[0], onehot[1], onehot[2], onehot[3]};
    const auto col = apply_lift_factorized(lf, of);
    const Eigen::VectorXd expected_col = dense.col(nfp / 2);
    CHECK(rel_diff(testing::as_eigen(col), expected_col) < 1e-10);

    std::array<std::vector<double>, 4> rnd;
    Eigen::VectorXd stacked(4 * nfp);
    for (int f = 0; f < 4; ++f) {
      rnd[static_cast<std::size_t>(f)] = testing::random_vector(static_cast<std::size_t>(nfp));
      stacked.segment(f * nfp, nfp) = testing::as_eigen(rnd[static_cast<std::size_t>(f)]);
    }
    FaceFluxes<double> rf{rnd[0], rnd[1], rnd[2], rnd[3]};
    const auto a = apply_lift_factorized(lf, rf);
    const auto b = apply_lift_optimal(lf, rf);
    const Eigen::VectorXd ref = dense * stacked;
    CHECK(rel_diff(testing::as_eigen(a), ref) < 1e-8);
    CHECK(rel_diff(b, a) < 1e-12);
  }
}

TEST_CASE("lift application rejects bad sizes") {
  const auto lf = build_EL(3);
  std::vector<double> f(10, 0.0);
  std::vector<double> g(9, 0.0);
  FaceFluxes<double> bad{f, f, g, f};
  CHECK_THROWS_AS(apply_lift_optimal(lf, bad), std::invalid_argument);
  CHECK_THROWS_AS(apply_lift_factorized(lf, bad), std::invalid_argument);
}

TEST_CASE("single-precision operators track double") {
  const auto lf = build_EL(5).cast<float>();
  const auto lfd = build_EL(5);
  const int nfp = face_dofs(5);
  std::array<std::vector<float>, 4> fl;
  std::array<std::vector<double>, 4> dl;
  for (int f = 0; f < 4; ++f) {
    const auto r = testing::random_vector(static_cast<std::size_t>(nfp));
    dl[static_cast<std::size_t>(f)] = r;
    fl[static_cast<std::size_t>(f)].assign(r.begin(), r.end());
  }
  std::vector<float> out(static_cast<std::size_t>(volume_dofs(5)));
  std::vector<float> scratch(static_cast<std::size_t>(lift_scratch_size(5)));
  apply_lift_optimal<float>(lf, {fl[0], fl[1], fl[2], fl[3]}, out, scratch);
  const auto ref = apply_lift_optimal(lfd, {dl[0], dl[1], dl[2], dl[3]});
  std::vector<double> outd(out.begin(), out.end());
  CHECK(rel_diff(outd, ref) < 1e-5);

  const auto dsf = barycentric_derivatives(4).cast<float>();
  CHECK(dsf[3].values_storage() == dsf[0].values_storage());
}

TEST_CASE("modal transform separates modes under degree reduction") {
  const Eigen::MatrixXd t0 = modal_transform(3, 3);
  const Eigen::VectorXd c0 = t0.col(0);
  CHECK((c0.array() - c0(0)).abs().maxCoeff() < 1e-13);
  CHECK_THROWS_AS(modal_transform(13, 2), DegreeError);

  for (int n = 2; n <= 6; ++n) {
    const auto modes = modal_indices(2, n);
    const Eigen::MatrixXd tn = modal_transform(n, 2);
    for (int i = 1; i <= n; ++i) {
      const Eigen::MatrixXd red = cascaded_reduction(n, i, 2);
      const Eigen::MatrixXd tl = modal_transform(n - i, 2);
      const Eigen::MatrixXd s = tl.inverse() * red * tn;
      const int lo = dim_size(2, n - i);
      Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(lo, tn.cols());
      for (int k = 0; k < lo; ++k) {
        const int g = modes[static_cast<std::size_t>(k)][0] + modes[static_cast<std::size_t>(k)][1];
        expected(k, k) = mass_eigenvalue(n - i, g, 2) / mass_eigenvalue(n, g, 2);
      }
      CHECK((s - expected).cwiseAbs().maxCoeff() <= 1e-8);

      const Eigen::MatrixXd ee = tn.inverse() * red.transpose() * red * tn;
      Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(tn.cols(), tn.cols());
      diag.topLeftCorner(lo, lo) = expected.leftCols(lo);
      CHECK((ee - diag).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}
