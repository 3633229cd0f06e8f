#include "commands.hpp"

#include "bbdg/bernstein.hpp"
#include "bbdg/dg_solver.hpp"
#include "bbdg/mesh.hpp"
#include "bbdg/nodal.hpp"
#include "bbdg/operator_lab.hpp"
#include "bbdg/oracle.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <random>
#include <sstream>

namespace bbdg::cli {

namespace fs = std::filesystem;

std::vector<int> DegreeRange::values() const {
  std::vector<int> v;
  for (int n = lo; n <= hi; ++n) v.push_back(n);
  return v;
}

DegreeRange parse_degree_range(const std::string& s, int min_degree, int max_degree) {
  DegreeRange r;
  const auto dots = s.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      r.lo = r.hi = std::stoi(s, &used);
      if (used != s.size()) throw UsageError("");
    } else {
      r.lo = std::stoi(s.substr(0, dots), &used);
      if (used != dots) throw UsageError("");
      const auto tail = s.substr(dots + 2);
      r.hi = std::stoi(tail, &used);
      if (used != tail.size()) throw UsageError("");
    }
  } catch (const std::exception&) {
    throw UsageError("bad degree range '" + s + "' (expected N or A..B)");
  }
  if (r.lo > r.hi) throw UsageError("empty degree range '" + s + "'");
  if (r.lo < min_degree || r.hi > max_degree) {
    throw UsageError("degree range '" + s + "' outside " + std::to_string(min_degree) + ".." +
                     std::to_string(max_degree));
  }
  return r;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw UsageError("");
    } catch (const std::exception&) {
      throw UsageError("bad integer list '" + s + "'");
    }
  }
  return out;
}

void configure_threads() {
  if (const char* env = std::getenv("BBDG_NUM_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) omp_set_num_threads(t);
  }
}

namespace {

std::ofstream open_output(const std::string& dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const auto path = fs::path(dir) / name;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << std::setprecision(17);
  return os;
}

// ---------------------------------------------------------------- ops

struct OpsConfig {
  std::string degrees = "1..9";
  std::string basis = "all";
  std::string nodes = "warp_blend";
  std::string out = "out";
  std::vector<std::string> coo;
  bool node_csv = false;
};

int cmd_ops(const OpsConfig& cfg, std::ostream& out) {
  const auto kind = parse_node_kind(cfg.nodes);
  const int max_n = cfg.basis == "bernstein" ? kMaxDegree : kMaxWarpBlendDegree;
  const auto range = parse_degree_range(cfg.degrees, 1, max_n);
  if (cfg.basis != "all" && cfg.basis != "bernstein" && cfg.basis != "nodal") {
    throw UsageError("unknown basis '" + cfg.basis + "' (bernstein | nodal | all)");
  }
  std::vector<std::string> names;
  for (const auto& name : operator_names()) {
    const bool nodal = name.rfind("nodal", 0) == 0;
    if (cfg.basis == "all" || (cfg.basis == "nodal") == nodal) names.push_back(name);
  }
  if (kind == NodeKind::equispaced) out << "notice: equispaced nodes; nodal values are not figure-comparable\n";

  for (const auto& name : names) {
    auto os = open_output(cfg.out, "ops_" + name + ".csv");
    write_report_header(os);
    for (int n : range.values()) {
      const auto r = report_operator(name, n, kind);
      write_report_row(os, r);
      out << std::setw(22) << std::left << name << " N=" << n << std::right << "  cond=" << std::setprecision(6)
          << r.cond << "  min=" << r.extrema.min_all << "  max=" << r.extrema.max_all << "  nnz_max=" << r.nnz_max
          << '\n';
    }
  }
  if (range.hi > range.lo && cfg.basis != "nodal") {
    auto os = open_output(cfg.out, "complexity.csv");
    write_sweep_header(os);
    for (auto k : {OpKind::dense_lift, OpKind::factorized_lift, OpKind::optimal_lift, OpKind::sparse_derivative,
                   OpKind::dense_derivative}) {
      const auto sweep = complexity_sweep(range.lo, range.hi, k);
      write_sweep_rows(os, sweep);
      out << "complexity " << to_string(k) << " slope=" << std::setprecision(4) << sweep.slope << '\n';
    }
  }
  for (const auto& name : cfg.coo) {
    for (int n : range.values()) {
      auto os = open_output(cfg.out, name + "_N" + std::to_string(n) + ".coo");
      write_operator_coo(os, named_operator(name, n, kind));
    }
  }
  if (cfg.node_csv) {
    for (int n : range.values()) {
      auto os = open_output(cfg.out, "nodes_N" + std::to_string(n) + ".csv");
      write_nodes_csv(os, build_nodes(n, kind));
    }
  }
  return kSuccess;
}

// ---------------------------------------------------------------- check

struct CheckConfig {
  std::vector<std::string> suites;
  std::string degrees = "1..9";
  unsigned long seed = 20240611;
  double perturb_d0 = 0.0;
};

struct SuiteLine {
  std::string suite;
  int degree;
  double error;
  double tol;
};

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"mass", "derivative", "lift", "eigen", "basis", "lift_modes"};
  return names;
}

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

std::vector<SuiteLine> run_suite(const std::string& suite, const std::vector<int>& degrees, const CheckConfig& cfg) {
  std::vector<SuiteLine> lines;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  if (suite == "mass") {
    for (int n : degrees) {
      double e = 0.0;
      for (int dim = 1; dim <= 3; ++dim) e = std::max(e, rel_err(bernstein_mass(n, dim), quadrature_mass(n, dim)));
      lines.push_back({suite, n, e, 1e-12});
    }
  } else if (suite == "derivative") {
    for (int n : degrees) {
      if (n > 6) continue;
      const auto d = barycentric_derivatives(n);
      double e = 0.0;
      for (int i = 0; i < 4; ++i) {
        Eigen::MatrixXd a = d[i].to_dense();
        if (i == 0 && cfg.perturb_d0 != 0.0) a(0, 0) += cfg.perturb_d0;  // mutation hook
        e = std::max(e, rel_err(a, derivative_oracle(n, i)));
      }
      lines.push_back({suite, n, e, 1e-10});
    }
  } else if (suite == "lift") {
    for (int n : degrees) {
      const auto lf = build_EL(n);
      const int nfp = face_dofs(n);
      double e = 0.0;
      for (int f = 0; f < 4; ++f) {
        const Eigen::MatrixXd oracle = dense_lift_oracle(n, f);
        Eigen::MatrixXd fact(volume_dofs(n), nfp);
        Eigen::MatrixXd opt(volume_dofs(n), nfp);
        std::vector<double> zero(static_cast<std::size_t>(nfp), 0.0);
        std::vector<double> unit(static_cast<std::size_t>(nfp), 0.0);
        for (int c = 0; c < nfp; ++c) {
          std::fill(unit.begin(), unit.end(), 0.0);
          unit[static_cast<std::size_t>(c)] = 1.0;
          FaceFluxes<double> fl{zero, zero, zero, zero};
          fl[static_cast<std::size_t>(f)] = unit;
          const auto a = apply_lift_factorized(lf, fl);
          const auto b = apply_lift_optimal(lf, fl);
          fact.col(c) = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
          opt.col(c) = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
        }
        e = std::max({e, rel_err(fact, oracle), rel_err(opt, oracle)});
      }
      lines.push_back({suite, n, e, 1e-8});
    }
  } else if (suite == "eigen") {
    for (int n : degrees) {
      double e = 0.0;
      bool pass = true;
      for (int dim = 1; dim <= 3; ++dim) {
        for (const auto& c : eigen_identities(n, dim)) {
          e = std::max(e, c.max_rel_error);
          pass = pass && c.pass;
        }
      }
      lines.push_back({suite, n, pass ? e : std::max(e, 1.0), 1e-8});
    }
  } else if (suite == "basis" || suite == "lift_modes") {
    const auto mesh = build_cube_mesh(2);
    const int K = mesh.num_elements();
    for (int n : degrees) {
      if (suite == "basis" && n > 6) continue;
      const auto db = make_discretization<double>(mesh, n, Basis::bernstein, Materials::uniform(K), LiftMode::optimal);
      auto q = zero_state<double>(n, K, Basis::bernstein);
      for (auto& v : q.data) v = uni(rng);
      auto rb = q;
      rhs(db, q, rb);
      double e = 0.0;
      if (suite == "basis") {
        const auto dn = make_discretization<double>(mesh, n, Basis::nodal, Materials::uniform(K), LiftMode::dense);
        const auto conv = basis_conversion(dn.ops.interp_nodes);
        auto qn = zero_state<double>(n, K, Basis::nodal);
        auto rn = qn;
        for (int k = 0; k < K; ++k) {
          for (int f = 0; f < kNumFields; ++f) {
            const auto v = bernstein_to_nodal(conv, q.block(k, f));
            std::copy(v.begin(), v.end(), qn.block(k, f).begin());
          }
        }
        rhs(dn, qn, rn);
        Eigen::MatrixXd got(rn.data.size(), 1);
        Eigen::MatrixXd want(rn.data.size(), 1);
        for (int k = 0; k < K; ++k) {
          for (int f = 0; f < kNumFields; ++f) {
            const auto v = bernstein_to_nodal(conv, rb.block(k, f));
            for (int i = 0; i < rn.np; ++i) {
              got(static_cast<Eigen::Index>(rn.offset(k, f)) + i, 0) = v[static_cast<std::size_t>(i)];
              want(static_cast<Eigen::Index>(rn.offset(k, f)) + i, 0) = rn.block(k, f)[static_cast<std::size_t>(i)];
            }
          }
        }
        e = rel_err(got, want);
        lines.push_back({suite, n, e, 1e-9});
      } else {
        const Eigen::Map<const Eigen::MatrixXd> ref(rb.data.data(), static_cast<Eigen::Index>(rb.data.size()), 1);
        for (auto mode : {LiftMode::dense, LiftMode::factorized}) {
          const auto d = make_discretization<double>(mesh, n, Basis::bernstein, Materials::uniform(K), mode);
          auto r = q;
          rhs(d, q, r);
          e = std::max(e, rel_err(Eigen::Map<const Eigen::MatrixXd>(r.data.data(), ref.rows(), 1), ref));
        }
        lines.push_back({suite, n, e, 1e-8});
      }
    }
  } else {
    throw UsageError("unknown suite '" + suite + "'");
  }
  return lines;
}

int cmd_check(const CheckConfig& cfg, std::ostream& out) {
  const auto range = parse_degree_range(cfg.degrees, 1, kMaxWarpBlendDegree);
  const auto& suites = cfg.suites.empty() ? suite_names() : cfg.suites;
  for (const auto& s : suites) {
    if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end()) {
      throw UsageError("unknown suite '" + s + "'");
    }
  }
  int failures = 0;
  for (const auto& s : suites) {
    int suite_fail = 0;
    for (const auto& line : run_suite(s, range.values(), cfg)) {
      const bool ok = line.error <= line.tol;
      suite_fail += ok ? 0 : 1;
      out << std::left << std::setw(11) << line.suite << std::right << " N=" << line.degree
          << "  max_rel_err=" << std::scientific << std::setprecision(3) << line.error << "  tol=" << line.tol
          << std::defaultfloat << "  " << (ok ? "PASS" : "FAIL") << '\n';
    }
    out << "suite " << s << ": " << (suite_fail == 0 ? "PASS" : "FAIL") << '\n';
    failures += suite_fail;
  }
  out << (failures == 0 ? "all suites passed" : std::to_string(failures) + " check(s) failed") << '\n';
  return failures == 0 ? kSuccess : kNumericalFailure;
}

// ---------------------------------------------------------------- solve

struct SolveConfig {
  int degree = 3;
  int mesh = 4;
  std::string mesh_file;
  std::string basis = "bernstein";
  std::string lift = "auto";
  std::string precision = "double";
  double cfl = kDefaultCfl;
  double tmax = 0.5;
  long every = 10;
  std::string out = "out";
  bool checkpoint = false;
};

LiftMode resolve_lift(const std::string& lift, Basis basis) {
  if (lift == "auto") return basis == Basis::nodal ? LiftMode::dense : LiftMode::optimal;
  return parse_lift_mode(lift);
}

void print_mesh_record(std::ostream& out, const Mesh& mesh) {
  const auto st = mesh_stats(mesh);
  out << "mesh K=" << st.num_elements << " h_min=" << std::setprecision(6) << st.h_min << " h_max=" << st.h_max
      << " volume=" << st.volume << '\n';
}

template <typename Real>
int solve_impl(const SolveConfig& cfg, const Mesh& mesh, std::ostream& out) {
  const auto basis = parse_basis(cfg.basis);
  const auto disc = make_discretization<Real>(mesh, cfg.degree, basis, Materials::uniform(mesh.num_elements()),
                                              resolve_lift(cfg.lift, basis));
  auto q = initial_state(disc);
  RunOptions opts;
  opts.tmax = cfg.tmax;
  opts.cfl = cfg.cfl;
  opts.output_every = cfg.every;
  RunResult r;
  try {
    r = run_wave(disc, q, opts);
  } catch (const InstabilityError& e) {
    out << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  auto os = open_output(cfg.out, "timeseries.csv");
  write_time_series_csv(os, r.samples);
  if (cfg.checkpoint) {
    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    std::ofstream chk(fs::path(cfg.out) / "final.chk", std::ios::binary);
    if (!chk) throw std::runtime_error("cannot write checkpoint in " + cfg.out);
    write_checkpoint(chk, q);
  }
  const auto& last = r.samples.back();
  out << "solve basis=" << to_string(basis) << " lift=" << to_string(disc.lift_mode)
      << " precision=" << to_string(precision_of<Real>()) << " N=" << cfg.degree << " steps=" << r.steps
      << " dt=" << std::setprecision(6) << r.dt << '\n'
      << "final tau=" << last.time << " l2_error_p=" << std::setprecision(10) << last.l2_error
      << " energy=" << last.energy << " (initial " << r.samples.front().energy << ")\n";
  return kSuccess;
}

Mesh load_mesh(const std::string& file, int n) {
  if (file.empty()) return build_cube_mesh(n);
  std::ifstream is(file);
  if (!is) throw UsageError("cannot read mesh file " + file);
  return read_mesh(is);
}

int cmd_solve(const SolveConfig& cfg, std::ostream& out) {
  if (cfg.tmax < 0.0) throw UsageError("--tmax must be non-negative");
  if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0)) throw UsageError("--cfl must lie in (0, 1]");
  if (cfg.every < 1) throw UsageError("--every must be >= 1");
  const auto basis = parse_basis(cfg.basis);
  parse_degree_range(std::to_string(cfg.degree), 1, basis == Basis::nodal ? kMaxWarpBlendDegree : kMaxDegree);
  if (basis == Basis::nodal && resolve_lift(cfg.lift, basis) != LiftMode::dense) {
    throw UsageError("the nodal basis supports only --lift dense");
  }
  const auto mesh = load_mesh(cfg.mesh_file, cfg.mesh);
  print_mesh_record(out, mesh);
  return parse_precision(cfg.precision) == Precision::single ? solve_impl<float>(cfg, mesh, out)
                                                            : solve_impl<double>(cfg, mesh, out);
}

// ---------------------------------------------------------------- convergence

struct ConvergenceConfig {
  int degree = 2;
  std::string meshes = "2,4";
  std::string basis = "bernstein";
  std::string precision = "double";
  double tmax = 0.5;
  double cfl = kDefaultCfl;
  std::string out = "out";
};

template <typename Real>
double final_error(const ConvergenceConfig& cfg, const Mesh& mesh) {
  const auto basis = parse_basis(cfg.basis);
  const auto disc = make_discretization<Real>(mesh, cfg.degree, basis, Materials::uniform(mesh.num_elements()),
                                              resolve_lift("auto", basis));
  auto q = initial_state(disc);
  RunOptions opts;
  opts.tmax = cfg.tmax;
  opts.cfl = cfg.cfl;
  opts.output_every = 1L << 40;
  return run_wave(disc, q, opts).samples.back().l2_error;
}

int cmd_convergence(const ConvergenceConfig& cfg, std::ostream& out) {
  const auto meshes = parse_int_list(cfg.meshes);
  if (meshes.size() < 2) throw UsageError("convergence needs at least two mesh resolutions");
  for (int n : meshes) {
    if (n < 1) throw UsageError("mesh resolutions must be positive");
  }
  const auto basis = parse_basis(cfg.basis);
  parse_degree_range(std::to_string(cfg.degree), 1, basis == Basis::nodal ? kMaxWarpBlendDegree : kMaxDegree);
  const bool single = parse_precision(cfg.precision) == Precision::single;

  std::vector<double> h;
  std::vector<double> err;
  auto os = open_output(cfg.out, "convergence.csv");
  os << "mesh,K,h,l2_error,rate\n";
  out << "convergence basis=" << cfg.basis << " N=" << cfg.degree << " tau=" << cfg.tmax << '\n';
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    const auto mesh = build_cube_mesh(meshes[i]);
    h.push_back(1.0 / meshes[i]);
    err.push_back(single ? final_error<float>(cfg, mesh) : final_error<double>(cfg, mesh));
    const double rate = i == 0 ? std::nan("") : std::log(err[i - 1] / err[i]) / std::log(h[i - 1] / h[i]);
    os << meshes[i] << ',' << mesh.num_elements() << ',' << h[i] << ',' << err[i] << ',';
    if (i > 0) os << rate;
    os << '\n';
    out << "  n=" << meshes[i] << " K=" << mesh.num_elements() << " l2_error=" << std::setprecision(6) << err[i];
    if (i > 0) out << " rate=" << std::fixed << std::setprecision(2) << rate << std::defaultfloat;
    out << '\n';
  }
  const double order = loglog_slope(h, err);
  out << "observed order " << std::fixed << std::setprecision(2) << order << std::defaultfloat << '\n';
  return kSuccess;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bernstein-Bezier and nodal DG acoustic wave experiments"};
  app.require_subcommand(1);

  OpsConfig ops;
  auto* ops_cmd = app.add_subcommand("ops", "operator conditioning, extrema and complexity tables");
  ops_cmd->add_option("--n", ops.degrees, "degree or range A..B")->capture_default_str();
  ops_cmd->add_option("--basis", ops.basis, "bernstein | nodal | all")->capture_default_str();
  ops_cmd->add_option("--nodes", ops.nodes, "warp_blend | equispaced")->capture_default_str();
  ops_cmd->add_option("--out", ops.out, "output directory")->capture_default_str();
  ops_cmd->add_option("--coo", ops.coo, "dump the named operator as a COO file per degree");
  ops_cmd->add_flag("--nodes-csv", ops.node_csv, "write the interpolation nodes per degree");

  CheckConfig chk;
  auto* chk_cmd = app.add_subcommand("check", "oracle and equivalence suites");
  chk_cmd->add_option("--suite", chk.suites, "mass | derivative | lift | eigen | basis | lift_modes (repeatable)");
  chk_cmd->add_option("--n", chk.degrees, "degree or range A..B")->capture_default_str();
  chk_cmd->add_option("--seed", chk.seed, "seed for random states")->capture_default_str();
  chk_cmd->add_option("--perturb-d0", chk.perturb_d0, "add this to D^0(0,0) (mutation test hook)")->group("");

  SolveConfig sol;
  auto* sol_cmd = app.add_subcommand("solve", "run the standing-wave problem");
  sol_cmd->add_option("--n", sol.degree, "polynomial degree")->capture_default_str();
  sol_cmd->add_option("--mesh", sol.mesh, "cells per axis of the cube mesh")->capture_default_str();
  sol_cmd->add_option("--mesh-file", sol.mesh_file, "ASCII tet mesh instead of the cube");
  sol_cmd->add_option("--basis", sol.basis, "bernstein | nodal")->capture_default_str();
  sol_cmd->add_option("--lift", sol.lift, "auto | dense | factorized | optimal")->capture_default_str();
  sol_cmd->add_option("--precision", sol.precision, "single | double")->capture_default_str();
  sol_cmd->add_option("--cfl", sol.cfl, "CFL number")->capture_default_str();
  sol_cmd->add_option("--tmax", sol.tmax, "final time")->capture_default_str();
  sol_cmd->add_option("--every", sol.every, "sample cadence in steps")->capture_default_str();
  sol_cmd->add_option("--out", sol.out, "output directory")->capture_default_str();
  sol_cmd->add_flag("--checkpoint", sol.checkpoint, "write final.chk");

  ConvergenceConfig conv;
  auto* conv_cmd = app.add_subcommand("convergence", "spatial convergence study");
  conv_cmd->add_option("--n", conv.degree, "polynomial degree")->capture_default_str();
  conv_cmd->add_option("--mesh", conv.meshes, "comma-separated cells per axis")->capture_default_str();
  conv_cmd->add_option("--basis", conv.basis, "bernstein | nodal")->capture_default_str();
  conv_cmd->add_option("--precision", conv.precision, "single | double")->capture_default_str();
  conv_cmd->add_option("--tmax", conv.tmax, "final time")->capture_default_str();
  conv_cmd->add_option("--cfl", conv.cfl, "CFL number")->capture_default_str();
  conv_cmd->add_option("--out", conv.out, "output directory")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  configure_threads();
  try {
    if (*ops_cmd) return cmd_ops(ops, out);
    if (*chk_cmd) return cmd_check(chk, out);
    if (*sol_cmd) return cmd_solve(sol, out);
    return cmd_convergence(conv, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace bbdg::cli
