#pragma once

// Affine tetrahedral meshes: box generation, geometric factors,
// face connectivity and coordinate-matched trace maps.

#include <array>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace bbdg {

using Vec3d = std::array<double, 3>;

struct Box {
  Vec3d lo{-0.5, -0.5, -0.5};
  Vec3d hi{0.5, 0.5, 0.5};
};

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Mesh {
  std::vector<Vec3d> vertices;
  std::vector<std::array<int, 4>> tets;

  /// G^k, row-major: G[k][3*i + j] = d(r_j)/d(x_i) with (r_0,r_1,r_2) = (r,s,t).
  std::vector<std::array<double, 9>> G;
  /// det(dx/dr); physical volume = J * 4/3.
  std::vector<double> J;
  /// Outward unit normal of face f (the face where lambda_f = 0).
  std::vector<std::array<Vec3d, 4>> normals;
  /// Physical face area / 2 (the reference face measure).
  std::vector<std::array<double, 4>> Jf;
  /// Neighbor element and its local face; a boundary face maps to itself.
  std::vector<std::array<int, 4>> EToE;
  std::vector<std::array<int, 4>> EToF;

  int num_elements() const { return static_cast<int>(tets.size()); }
  bool is_boundary(int k, int f) const {
    return EToE[static_cast<std::size_t>(k)][static_cast<std::size_t>(f)] == k &&
           EToF[static_cast<std::size_t>(k)][static_cast<std::size_t>(f)] == f;
  }
  /// Physical point of reference coordinates (r,s,t) in element k.
  Vec3d map_point(int k, const std::array<double, 3>& rst) const;
};

/// Builds geometric factors and connectivity. Negatively oriented tets are
/// reoriented by swapping their last two vertices; degenerate tets and faces
/// shared by more than two tets raise MeshError.
Mesh make_mesh(std::vector<Vec3d> vertices, std::vector<std::array<int, 4>> tets);

/// n^3 hexahedral cells, each split into 6 tets around the main diagonal.
Mesh build_cube_mesh(int n, const Box& box = {});

struct MeshStats {
  int num_elements = 0;
  /// Smallest / largest element inradius 3 V / (sum of face areas).
  double h_min = 0.0;
  double h_max = 0.0;
  double volume = 0.0;
};

MeshStats mesh_stats(const Mesh& mesh);

/// ASCII format: "nv nt", nv lines "x y z", nt lines "a b c d" (0-based).
Mesh read_mesh(std::istream& is);
void write_mesh(std::ostream& os, const Mesh& mesh);

/// Face-to-face coupling of volume degrees of freedom.
struct TraceMap {
  int np = 0;
  int nfp = 0;
  /// Indexed by (k*4 + f)*nfp + q: global dof k*np + pos of the local trace
  /// point q, and of the matching point in the neighbor (itself on the boundary).
  std::vector<int> vmapM;
  std::vector<int> vmapP;
  /// Indexed by k*4 + f.
  std::vector<unsigned char> boundary;
};

/// face_positions[f] lists the volume positions that carry face f's trace, in
/// face order; reference_points gives the reference location of each volume
/// position. Points are matched physically to within 1e-10 * h_min.
TraceMap build_trace_maps(const Mesh& mesh, const std::array<std::vector<int>, 4>& face_positions,
                          std::span<const std::array<double, 3>> reference_points);

}  // namespace bbdg
