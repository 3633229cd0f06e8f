#include "bbdg/bernstein.hpp"
#include "bbdg/mesh.hpp"
#include "bbdg/nodal.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <sstream>

using namespace bbdg;

namespace {

std::vector<Point3> lattice_points(int n) {
  std::vector<Point3> pts;
  for (const auto& a : canonical_ordering(n)) pts.push_back({2.0 * a[1] / n - 1.0, 2.0 * a[2] / n - 1.0, 2.0 * a[3] / n - 1.0});
  return pts;
}

std::array<std::vector<int>, 4> bernstein_faces(int n) {
  std::array<std::vector<int>, 4> out;
  for (int f = 0; f < 4; ++f) out[static_cast<std::size_t>(f)] = face_trace_indices(n, f);
  return out;
}

std::vector<Vec3d> reference_vertices() {
  std::vector<Vec3d> v;
  for (const auto& p : ReferenceTet::vertices) v.push_back({p[0], p[1], p[2]});
  return v;
}

}  // namespace

TEST_CASE("geometric factors") {
  const auto ref = make_mesh(reference_vertices(), {{0, 1, 2, 3}});
  CHECK(ref.J[0] == doctest::Approx(1.0));
  for (int i = 0; i < 9; ++i) CHECK(ref.G[0][static_cast<std::size_t>(i)] == doctest::Approx(i % 4 == 0 ? 1.0 : 0.0));
  CHECK(ref.Jf[0][1] == doctest::Approx(1.0));
  CHECK(ref.Jf[0][0] == doctest::Approx(std::sqrt(3.0)));
  CHECK(ref.normals[0][1][0] == doctest::Approx(-1.0));
  CHECK(ref.normals[0][0][0] == doctest::Approx(1.0 / std::sqrt(3.0)));

  auto scaled = reference_vertices();
  for (auto& v : scaled) {
    for (auto& x : v) x *= 0.25;
  }
  const auto s = make_mesh(scaled, {{0, 1, 2, 3}});
  CHECK(s.J[0] == doctest::Approx(0.25 * 0.25 * 0.25));
  CHECK(s.G[0][0] == doctest::Approx(4.0));
  CHECK(s.G[0][4] == doctest::Approx(4.0));

  // A negatively oriented tet is flipped.
  const auto flipped = make_mesh(reference_vertices(), {{0, 2, 1, 3}});
  CHECK(flipped.J[0] > 0.0);
  auto flat = reference_vertices();
  flat[3] = {-1.0 / 3.0, -1.0 / 3.0, -1.0};
  CHECK_THROWS_AS(make_mesh(flat, {{0, 1, 2, 3}}), MeshError);
}

TEST_CASE("cube mesh") {
  for (int n : {1, 2, 3}) {
    const auto m = build_cube_mesh(n);
    const auto st = mesh_stats(m);
    CHECK(st.num_elements == 6 * n * n * n);
    CHECK(st.volume == doctest::Approx(1.0).epsilon(1e-12));
    int boundary = 0;
    for (int k = 0; k < m.num_elements(); ++k) {
      CHECK(m.J[static_cast<std::size_t>(k)] > 0.0);
      for (int f = 0; f < 4; ++f) {
        if (m.is_boundary(k, f)) {
          ++boundary;
          continue;
        }
        const int k2 = m.EToE[static_cast<std::size_t>(k)][static_cast<std::size_t>(f)];
        const int f2 = m.EToF[static_cast<std::size_t>(k)][static_cast<std::size_t>(f)];
        CHECK(m.EToE[static_cast<std::size_t>(k2)][static_cast<std::size_t>(f2)] == k);
        for (int i = 0; i < 3; ++i) {
          CHECK(m.normals[static_cast<std::size_t>(k)][static_cast<std::size_t>(f)][static_cast<std::size_t>(i)] ==
                doctest::Approx(-m.normals[static_cast<std::size_t>(k2)][static_cast<std::size_t>(f2)][static_cast<std::size_t>(i)]));
        }
        CHECK(m.Jf[static_cast<std::size_t>(k)][static_cast<std::size_t>(f)] ==
              doctest::Approx(m.Jf[static_cast<std::size_t>(k2)][static_cast<std::size_t>(f2)]));
      }
    }
    // Two triangles per cell face on the six sides.
    CHECK(boundary == 12 * n * n);
  }
  Box box;
  box.lo = {0.0, 0.0, 0.0};
  box.hi = {2.0, 1.0, 1.0};
  CHECK(mesh_stats(build_cube_mesh(2, box)).volume == doctest::Approx(2.0));
  CHECK_THROWS_AS(build_cube_mesh(0), MeshError);
}

TEST_CASE("discrete divergence theorem") {
  // sum_f J^f * 2 * n_f = 0 for a closed element.
  const auto m = build_cube_mesh(2);
  for (int k = 0; k < m.num_elements(); ++k) {
    for (int i = 0; i < 3; ++i) {
      double s = 0.0;
      for (int f = 0; f < 4; ++f) {
        s += m.Jf[static_cast<std::size_t>(k)][static_cast<std::size_t>(f)] *
             m.normals[static_cast<std::size_t>(k)][static_cast<std::size_t>(f)][static_cast<std::size_t>(i)];
      }
      CHECK(std::abs(s) < 1e-14);
    }
  }
}

TEST_CASE("mesh file round trip") {
  const auto m = build_cube_mesh(2);
  std::stringstream ss;
  write_mesh(ss, m);
  const auto back = read_mesh(ss);
  CHECK(back.tets == m.tets);
  CHECK(back.EToE == m.EToE);
  std::istringstream bad("4 1\n0 0 0\n1 0 0\n");
  CHECK_THROWS_AS(read_mesh(bad), MeshError);
  std::istringstream missing("4 1\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n0 1 2 7\n");
  CHECK_THROWS_AS(read_mesh(missing), MeshError);
}

TEST_CASE("trace maps") {
  // Two reference-shaped tets glued on face 0 of the first.
  auto verts = reference_vertices();
  verts.push_back({1.0, 1.0, 1.0});
  const int n = 3;
  const auto pts = lattice_points(n);
  const auto faces = bernstein_faces(n);

  SUBCASE("identity orientation") {
    // Second tet lists the shared vertices 1,2,3 in the same positions.
    const auto m = make_mesh(verts, {{0, 1, 2, 3}, {4, 1, 3, 2}});
    const auto m2 = make_mesh(verts, {{0, 1, 2, 3}, {4, 1, 2, 3}});
    for (const auto* mm : {&m, &m2}) {
      const auto tm = build_trace_maps(*mm, faces, pts);
      CHECK(tm.boundary[0] == 0);
      const int f2 = mm->EToF[0][0];
      for (int q = 0; q < tm.nfp; ++q) {
        const int g = tm.vmapP[static_cast<std::size_t>(q)];
        const auto x1 = mm->map_point(0, pts[static_cast<std::size_t>(faces[0][static_cast<std::size_t>(q)])]);
        const auto x2 = mm->map_point(g / tm.np, pts[static_cast<std::size_t>(g % tm.np)]);
        for (int i = 0; i < 3; ++i) CHECK(x1[static_cast<std::size_t>(i)] == doctest::Approx(x2[static_cast<std::size_t>(i)]));
        CHECK(g / tm.np == 1);
        CHECK(std::find(faces[static_cast<std::size_t>(f2)].begin(), faces[static_cast<std::size_t>(f2)].end(), g % tm.np) !=
              faces[static_cast<std::size_t>(f2)].end());
      }
    }
  }

  SUBCASE("rotated face ordering gives a nontrivial permutation") {
    const auto a = make_mesh(verts, {{0, 1, 2, 3}, {1, 4, 2, 3}});
    const auto b = make_mesh(verts, {{0, 1, 2, 3}, {2, 4, 3, 1}});
    const auto ta = build_trace_maps(a, faces, pts);
    const auto tb = build_trace_maps(b, faces, pts);
    bool differs = false;
    for (int q = 0; q < ta.nfp; ++q) differs = differs || (ta.vmapP[static_cast<std::size_t>(q)] % ta.np != tb.vmapP[static_cast<std::size_t>(q)] % tb.np);
    CHECK(differs);
  }

  SUBCASE("boundary faces map to themselves") {
    const auto m = make_mesh(reference_vertices(), {{0, 1, 2, 3}});
    const auto tm = build_trace_maps(m, faces, pts);
    CHECK(tm.vmapP == tm.vmapM);
    for (auto b : tm.boundary) CHECK(b == 1);
  }

  SUBCASE("non-conforming points are rejected") {
    const auto m = make_mesh(verts, {{0, 1, 2, 3}, {4, 1, 2, 3}});
    auto bad = pts;
    bad[static_cast<std::size_t>(faces[0][1])][0] += 1e-3;
    CHECK_THROWS_AS(build_trace_maps(m, faces, bad), MeshError);
  }
}

TEST_CASE("traces agree across every interior face") {
  // Random polynomial data projected elementwise; both traces evaluated at random face points.
  const int n = 4;
  const auto mesh = build_cube_mesh(2);
  const auto pts = lattice_points(n);
  const auto faces = bernstein_faces(n);
  const auto tm = build_trace_maps(mesh, faces, pts);
  const auto nodes = build_nodes(n, NodeKind::warp_blend);
  const auto conv = basis_conversion(nodes);
  const auto w = testing::random_vector(10);
  // A global degree-n polynomial, so the elementwise interpolants are continuous.
  auto poly = [&](const Vec3d& x) {
    return w[6] + w[7] * x[0] * x[0] * x[1] + w[8] * x[2] * x[2] * x[2] * x[0] + w[9] * x[1] * x[2];
  };
  const int K = mesh.num_elements();
  std::vector<double> coeff(static_cast<std::size_t>(K * tm.np));
  for (int k = 0; k < K; ++k) {
    std::vector<double> vals;
    for (const auto& p : nodes.points) vals.push_back(poly(mesh.map_point(k, p)));
    const auto c = nodal_to_bernstein(conv, vals);
    std::copy(c.begin(), c.end(), coeff.begin() + static_cast<std::ptrdiff_t>(k * tm.np));
  }
  const auto face_idx = simplex_indices<2>(n);
  for (int k = 0; k < K; ++k) {
    for (int f = 0; f < 4; ++f) {
      if (mesh.is_boundary(k, f)) continue;
      const std::size_t base = (static_cast<std::size_t>(k) * 4 + static_cast<std::size_t>(f)) * static_cast<std::size_t>(tm.nfp);
      for (int trial = 0; trial < 10; ++trial) {
        // Local face coordinates -> both traces; the neighbor's coefficients are pulled through vmapP.
        auto mu = testing::random_barycentric();
        const std::array<double, 3> m3{mu[0] + mu[3], mu[1], mu[2]};
        double vm = 0.0;
        double vp = 0.0;
        for (std::size_t q = 0; q < face_idx.size(); ++q) {
          const double b = bernstein_value<2>(face_idx[q], m3);
          vm += b * coeff[static_cast<std::size_t>(tm.vmapM[base + q])];
          vp += b * coeff[static_cast<std::size_t>(tm.vmapP[base + q])];
        }
        CHECK(std::abs(vm - vp) <= 1e-9 * std::max(1.0, std::abs(vm)));
      }
    }
  }
}
