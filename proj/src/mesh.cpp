#include "bbdg/mesh.hpp"

#include "bbdg/tensor_index.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <string>

namespace bbdg {

namespace {

Eigen::Vector3d vec(const Vec3d& v) { return {v[0], v[1], v[2]}; }

Eigen::Matrix3d jacobian(const Mesh& m, const std::array<int, 4>& t) {
  const Eigen::Vector3d x0 = vec(m.vertices[static_cast<std::size_t>(t[0])]);
  Eigen::Matrix3d a;
  for (int j = 0; j < 3; ++j) a.col(j) = 0.5 * (vec(m.vertices[static_cast<std::size_t>(t[j + 1])]) - x0);
  return a;
}

double face_area(const Mesh& m, const std::array<int, 4>& t, int f) {
  const auto fv = face_vertices(f);
  const Eigen::Vector3d a = vec(m.vertices[static_cast<std::size_t>(t[static_cast<std::size_t>(fv[0])])]);
  const Eigen::Vector3d b = vec(m.vertices[static_cast<std::size_t>(t[static_cast<std::size_t>(fv[1])])]);
  const Eigen::Vector3d c = vec(m.vertices[static_cast<std::size_t>(t[static_cast<std::size_t>(fv[2])])]);
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

Vec3d Mesh::map_point(int k, const std::array<double, 3>& rst) const {
  const auto lam = ReferenceTet::barycentric(rst[0], rst[1], rst[2]);
  Vec3d x{0.0, 0.0, 0.0};
  const auto& t = tets[static_cast<std::size_t>(k)];
  for (int v = 0; v < 4; ++v) {
    const auto& p = vertices[static_cast<std::size_t>(t[static_cast<std::size_t>(v)])];
    for (int i = 0; i < 3; ++i) x[static_cast<std::size_t>(i)] += lam[static_cast<std::size_t>(v)] * p[static_cast<std::size_t>(i)];
  }
  return x;
}

Mesh make_mesh(std::vector<Vec3d> vertices, std::vector<std::array<int, 4>> tets) {
  Mesh m;
  m.vertices = std::move(vertices);
  m.tets = std::move(tets);
  const auto nv = static_cast<int>(m.vertices.size());
  const auto K = m.tets.size();
  m.G.resize(K);
  m.J.resize(K);
  m.normals.resize(K);
  m.Jf.resize(K);
  m.EToE.resize(K);
  m.EToF.resize(K);

  // Reference gradients of the barycentric coordinates.
  const std::array<Eigen::Vector3d, 4> grad_ref{Eigen::Vector3d(-0.5, -0.5, -0.5), Eigen::Vector3d(0.5, 0.0, 0.0),
                                                Eigen::Vector3d(0.0, 0.5, 0.0), Eigen::Vector3d(0.0, 0.0, 0.5)};
  for (std::size_t k = 0; k < K; ++k) {
    auto& t = m.tets[k];
    for (int v : t) {
      if (v < 0 || v >= nv) throw MeshError("tet " + std::to_string(k) + " references a missing vertex");
    }
    Eigen::Matrix3d a = jacobian(m, t);
    double det = a.determinant();
    const double scale = std::pow(a.cwiseAbs().maxCoeff(), 3);
    if (!(std::abs(det) > 1e-12 * scale)) throw MeshError("tet " + std::to_string(k) + " is degenerate");
    if (det < 0.0) {
      std::swap(t[2], t[3]);
      a = jacobian(m, t);
      det = a.determinant();
    }
    m.J[k] = det;
    const Eigen::Matrix3d g = a.inverse().transpose();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m.G[k][static_cast<std::size_t>(3 * i + j)] = g(i, j);
    }
    for (int f = 0; f < 4; ++f) {
      const Eigen::Vector3d n = -(g * grad_ref[static_cast<std::size_t>(f)]).normalized();
      m.normals[k][static_cast<std::size_t>(f)] = {n(0), n(1), n(2)};
      m.Jf[k][static_cast<std::size_t>(f)] = 0.5 * face_area(m, t, f);
    }
  }

  std::map<std::array<int, 3>, std::pair<int, int>> open;
  for (std::size_t k = 0; k < K; ++k) {
    for (int f = 0; f < 4; ++f) {
      m.EToE[k][static_cast<std::size_t>(f)] = static_cast<int>(k);
      m.EToF[k][static_cast<std::size_t>(f)] = f;
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    for (int f = 0; f < 4; ++f) {
      const auto fv = face_vertices(f);
      std::array<int, 3> key{};
      for (int i = 0; i < 3; ++i) key[static_cast<std::size_t>(i)] = m.tets[k][static_cast<std::size_t>(fv[static_cast<std::size_t>(i)])];
      std::sort(key.begin(), key.end());
      auto it = open.find(key);
      if (it == open.end()) {
        open.emplace(key, std::make_pair(static_cast<int>(k), f));
        continue;
      }
      const auto [k2, f2] = it->second;
      if (k2 < 0) throw MeshError("a face is shared by more than two tets");
      m.EToE[k][static_cast<std::size_t>(f)] = k2;
      m.EToF[k][static_cast<std::size_t>(f)] = f2;
      m.EToE[static_cast<std::size_t>(k2)][static_cast<std::size_t>(f2)] = static_cast<int>(k);
      m.EToF[static_cast<std::size_t>(k2)][static_cast<std::size_t>(f2)] = f;
      it->second = {-1, -1};
    }
  }
  return m;
}

Mesh build_cube_mesh(int n, const Box& box) {
  if (n < 1) throw MeshError("build_cube_mesh: need at least one cell per axis");
  std::vector<Vec3d> verts;
  const int nv1 = n + 1;
  for (int k = 0; k <= n; ++k) {
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) {
        const std::array<int, 3> ijk{i, j, k};
        Vec3d x{};
        for (int d = 0; d < 3; ++d) {
          const auto ds = static_cast<std::size_t>(d);
          x[ds] = box.lo[ds] + (box.hi[ds] - box.lo[ds]) * ijk[ds] / n;
        }
        verts.push_back(x);
      }
    }
  }
  auto vid = [nv1](int i, int j, int k) { return i + nv1 * (j + nv1 * k); };
  // Six tets per cell, one per axis permutation, all sharing the cell diagonal.
  constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  std::vector<std::array<int, 4>> tets;
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        for (const auto& p : perms) {
          std::array<int, 3> c{i, j, k};
          std::array<int, 4> t{};
          t[0] = vid(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            c[static_cast<std::size_t>(p[static_cast<std::size_t>(s)])] += 1;
            t[static_cast<std::size_t>(s + 1)] = vid(c[0], c[1], c[2]);
          }
          tets.push_back(t);
        }
      }
    }
  }
  return make_mesh(std::move(verts), std::move(tets));
}

MeshStats mesh_stats(const Mesh& mesh) {
  MeshStats s;
  s.num_elements = mesh.num_elements();
  s.h_min = std::numeric_limits<double>::infinity();
  s.h_max = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const double vol = mesh.J[static_cast<std::size_t>(k)] * ReferenceTet::volume;
    double area = 0.0;
    for (double jf : mesh.Jf[static_cast<std::size_t>(k)]) area += 2.0 * jf;
    const double h = 3.0 * vol / area;
    s.h_min = std::min(s.h_min, h);
    s.h_max = std::max(s.h_max, h);
    s.volume += vol;
  }
  return s;
}

Mesh read_mesh(std::istream& is) {
  long nv = 0;
  long nt = 0;
  if (!(is >> nv >> nt) || nv < 4 || nt < 1) throw MeshError("mesh file: bad header (expected 'nv nt')");
  std::vector<Vec3d> verts(static_cast<std::size_t>(nv));
  for (auto& v : verts) {
    if (!(is >> v[0] >> v[1] >> v[2])) throw MeshError("mesh file: truncated vertex list");
  }
  std::vector<std::array<int, 4>> tets(static_cast<std::size_t>(nt));
  for (auto& t : tets) {
    if (!(is >> t[0] >> t[1] >> t[2] >> t[3])) throw MeshError("mesh file: truncated tet list");
  }
  return make_mesh(std::move(verts), std::move(tets));
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << mesh.vertices.size() << ' ' << mesh.tets.size() << '\n' << std::setprecision(17);
  for (const auto& v : mesh.vertices) os << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  for (const auto& t : mesh.tets) os << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
}

TraceMap build_trace_maps(const Mesh& mesh, const std::array<std::vector<int>, 4>& face_positions,
                          std::span<const std::array<double, 3>> reference_points) {
  TraceMap tm;
  tm.np = static_cast<int>(reference_points.size());
  tm.nfp = static_cast<int>(face_positions[0].size());
  for (const auto& fp : face_positions) {
    if (static_cast<int>(fp.size()) != tm.nfp) throw MeshError("trace maps: faces carry different point counts");
  }
  const int K = mesh.num_elements();
  const auto nfp = static_cast<std::size_t>(tm.nfp);
  tm.vmapM.resize(static_cast<std::size_t>(K) * 4 * nfp);
  tm.vmapP.resize(tm.vmapM.size());
  tm.boundary.resize(static_cast<std::size_t>(K) * 4);
  const double tol = 1e-10 * mesh_stats(mesh).h_min;

  auto face_points = [&](int k, int f) {
    std::vector<Vec3d> pts;
    for (int pos : face_positions[static_cast<std::size_t>(f)]) {
      pts.push_back(mesh.map_point(k, reference_points[static_cast<std::size_t>(pos)]));
    }
    return pts;
  };

  for (int k = 0; k < K; ++k) {
    for (int f = 0; f < 4; ++f) {
      const std::size_t base = (static_cast<std::size_t>(k) * 4 + static_cast<std::size_t>(f)) * nfp;
      const auto& fpos = face_positions[static_cast<std::size_t>(f)];
      for (std::size_t q = 0; q < nfp; ++q) tm.vmapM[base + q] = k * tm.np + fpos[q];
      if (mesh.is_boundary(k, f)) {
        tm.boundary[static_cast<std::size_t>(k) * 4 + static_cast<std::size_t>(f)] = 1;
        for (std::size_t q = 0; q < nfp; ++q) tm.vmapP[base + q] = tm.vmapM[base + q];
        continue;
      }
      const int k2 = mesh.EToE[static_cast<std::size_t>(k)][static_cast<std::size_t>(f)];
      const int f2 = mesh.EToF[static_cast<std::size_t>(k)][static_cast<std::size_t>(f)];
      const auto mine = face_points(k, f);
      const auto theirs = face_points(k2, f2);
      const auto& fpos2 = face_positions[static_cast<std::size_t>(f2)];
      for (std::size_t q = 0; q < nfp; ++q) {
        int match = -1;
        for (std::size_t q2 = 0; q2 < nfp; ++q2) {
          double d = 0.0;
          for (int i = 0; i < 3; ++i) d = std::max(d, std::abs(mine[q][static_cast<std::size_t>(i)] - theirs[q2][static_cast<std::size_t>(i)]));
          if (d <= tol) {
            match = static_cast<int>(q2);
            break;
          }
        }
        if (match < 0) throw MeshError("trace maps: unmatched face point (non-conforming mesh)");
        tm.vmapP[base + q] = k2 * tm.np + fpos2[static_cast<std::size_t>(match)];
      }
    }
  }
  return tm;
}

}  // namespace bbdg
