#include "bbdg/operator_lab.hpp"
#include "bbdg/tensor_index.hpp"

#include <doctest.h>

#include <sstream>

using namespace bbdg;

TEST_CASE("condition number") {
  CHECK(condition_number(Eigen::MatrixXd::Identity(5, 5)) == doctest::Approx(1.0));
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d(0, 0) = 4.0;
  d(1, 1) = 0.5;
  CHECK(condition_number(d) == doctest::Approx(8.0));  // sigma_3 = 0 is cut
  CHECK_THROWS(condition_number(Eigen::MatrixXd::Zero(3, 3)));
}

TEST_CASE("entry extrema") {
  const auto e = entry_extrema(Eigen::MatrixXd::Identity(3, 3));
  CHECK(e.min_all == 0.0);
  CHECK(e.max_all == 1.0);
  CHECK(e.min_nonzero == 1.0);
  Eigen::MatrixXd a(1, 3);
  a << -2.0, 0.0, 3.0;
  const auto f = entry_extrema(a);
  CHECK(f.min_all == -2.0);
  CHECK(f.max_all == 3.0);
}

TEST_CASE("figure regression values") {
  // Sparse D^0, lift, single-face E_L and L_0.
  CHECK(report_operator("bernstein_d0", 9).cond == doctest::Approx(2.32379).epsilon(1e-3));
  CHECK(report_operator("bernstein_lift", 4).cond == doctest::Approx(15.1262).epsilon(1e-3));
  CHECK(report_operator("bernstein_EL", 4).cond == doctest::Approx(4.75395).epsilon(1e-3));
  CHECK(report_operator("bernstein_L0", 1).cond == doctest::Approx(1.6).epsilon(1e-3));
  CHECK(report_operator("bernstein_L0", 4).cond == doctest::Approx(3.18182).epsilon(1e-3));
  const auto lift6 = report_operator("bernstein_lift", 6);
  CHECK(lift6.extrema.min_all == doctest::Approx(-142.5).epsilon(1e-3));
  CHECK(lift6.extrema.max_all == doctest::Approx(137.5).epsilon(1e-3));
  CHECK(report_operator("bernstein_L0", 9).extrema.max_all == doctest::Approx(51.0).epsilon(1e-3));
  CHECK(report_operator("bernstein_L0", 4).nnz_max <= 7);
  CHECK(report_operator("bernstein_d0", 5).nnz_max <= 4);
  CHECK_THROWS(named_operator("no_such_operator", 3));
  for (const auto& name : operator_names()) {
    const auto r = report_operator(name, 3);
    CHECK(r.cond >= 1.0);
    CHECK(r.extrema.min_all <= r.extrema.max_all);
  }
}

TEST_CASE("eigen identities") {
  for (int dim = 1; dim <= 3; ++dim) {
    for (int n = 1; n <= 9; ++n) {
      for (const auto& c : eigen_identities(n, dim)) {
        INFO(c.name << " N=" << n << " d=" << dim << " err=" << c.max_rel_error);
        CHECK(c.pass);
      }
    }
  }
  const auto checks = eigen_identities(1, 3);
  bool has_l0 = false;
  for (const auto& c : checks) has_l0 = has_l0 || c.name == "L0_eigenvalues";
  CHECK(has_l0);
}

TEST_CASE("operation counts") {
  for (int n = 1; n <= 9; ++n) {
    CHECK(count_madds(OpKind::sparse_derivative, n) == static_cast<std::uint64_t>(16 * volume_dofs(n)));
    CHECK(count_madds(OpKind::dense_lift, n) ==
          static_cast<std::uint64_t>(volume_dofs(n)) * 4 * static_cast<std::uint64_t>(face_dofs(n)));
    if (n >= 3) CHECK(count_madds(OpKind::optimal_lift, n) < count_madds(OpKind::factorized_lift, n));
  }
  const auto dense = complexity_sweep(3, 9, OpKind::dense_lift);
  const auto opt = complexity_sweep(3, 9, OpKind::optimal_lift);
  CHECK(dense.degrees.size() == 7);
  CHECK(opt.slope < dense.slope);
  CHECK(loglog_slope({1, 2, 4}, {3, 12, 48}) == doctest::Approx(2.0));
  CHECK(parse_op_kind("optimal_lift") == OpKind::optimal_lift);
  CHECK_THROWS(parse_op_kind("fast"));
}

TEST_CASE("csv writers") {
  std::ostringstream os;
  write_report_header(os);
  write_report_row(os, report_operator("bernstein_L0", 4));
  CHECK(os.str().rfind("operator,N,cond,min,max,nnz_max,slope\nbernstein_L0,4,", 0) == 0);
  std::ostringstream coo;
  write_operator_coo(coo, Eigen::MatrixXd::Identity(2, 2));
  CHECK(coo.str() == "0 0 1\n1 1 1\n");
}
