#pragma once

// Barycentric multi-indices, the canonical ordering every operator is stored
// against, and the reference tetrahedron.
//
// Canonical ordering: graded reverse-lexicographic, component 0 varies
// slowest and counts down from N. For N = 2, d = 3 this gives
//   (2,0,0,0) (1,1,0,0) (1,0,1,0) (1,0,0,1) (0,2,0,0) (0,1,1,0) ...
// The same rule is applied to face (d = 2) and edge (d = 1) indices. Face f is
// the face on which lambda_f vanishes; its local indices are the remaining
// three exponents in increasing component order.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbdg {

inline constexpr int kMinDegree = 1;
inline constexpr int kMaxDegree = 20;
inline constexpr int kFacesPerTet = 4;

class DegreeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FaceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws DegreeError unless kMinDegree <= n <= kMaxDegree.
void check_degree(int n);
void check_face(int f);

/// Exact binomial coefficient; returns 0 when k < 0 or k > n.
std::uint64_t binomial(int n, int k);

/// Exponent tuple over the d+1 barycentric coordinates of a d-simplex.
template <int Dim>
struct BaryIndex {
  static_assert(Dim >= 1 && Dim <= 3);
  std::array<int, Dim + 1> e{};

  constexpr int degree() const {
    int s = 0;
    for (int v : e) s += v;
    return s;
  }
  constexpr int& operator[](int i) { return e[static_cast<std::size_t>(i)]; }
  constexpr int operator[](int i) const { return e[static_cast<std::size_t>(i)]; }
  friend constexpr bool operator==(const BaryIndex&, const BaryIndex&) = default;
};

using MultiIndex4 = BaryIndex<3>;
using MultiIndex3 = BaryIndex<2>;
using MultiIndex2 = BaryIndex<1>;

/// Number of multi-indices with |alpha| = n on a Dim-simplex, C(n+Dim, Dim).
template <int Dim>
constexpr int simplex_dim(int n) {
  if (n < 0) return 0;
  std::uint64_t r = 1;
  for (int k = 1; k <= Dim; ++k) r = r * static_cast<std::uint64_t>(n + k) / static_cast<std::uint64_t>(k);
  return static_cast<int>(r);
}

inline constexpr int volume_dofs(int n) { return simplex_dim<3>(n); }
inline constexpr int face_dofs(int n) { return simplex_dim<2>(n); }

/// All |alpha| = n tuples in canonical order; n >= 0.
template <int Dim>
std::vector<BaryIndex<Dim>> simplex_indices(int n);

/// Position of alpha inside simplex_indices<Dim>(alpha.degree()). Exact inverse.
template <int Dim>
int index_of(const BaryIndex<Dim>& alpha);

/// Multinomial coefficient |alpha|! / prod alpha_i!, in floating point.
template <int Dim>
double multinomial(const BaryIndex<Dim>& alpha);

/// Tetrahedral canonical ordering with the supported-degree check.
std::vector<MultiIndex4> canonical_ordering(int n);

/// Remove component f (face-local tuple) / insert value at component f.
MultiIndex3 drop_component(const MultiIndex4& alpha, int f);
MultiIndex4 insert_component(const MultiIndex3& beta, int f, int value);

/// Positions of volume indices with alpha_f = 0, in 2-D canonical order of the
/// remaining exponents. Length (n+1)(n+2)/2.
std::vector<int> face_trace_indices(int n, int f);

struct FaceLayerOrdering {
  int degree = 0;
  int face = 0;
  /// layers[j] holds the volume positions with alpha_f = j, ordered by the
  /// 2-D canonical order of the remaining exponents (degree n - j).
  std::vector<std::vector<int>> layers;
};

FaceLayerOrdering face_layer_ordering(int n, int f);

/// Bi-unit reference tetrahedron with vertices (-1,-1,-1), (1,-1,-1),
/// (-1,1,-1), (-1,-1,1). Vertex v sits where lambda_v = 1.
struct ReferenceTet {
  static constexpr double volume = 4.0 / 3.0;
  /// Reference measure used for every face mass matrix (the axis faces' area).
  static constexpr double face_measure = 2.0;
  static constexpr std::array<std::array<double, 3>, 4> vertices{
      {{-1.0, -1.0, -1.0}, {1.0, -1.0, -1.0}, {-1.0, 1.0, -1.0}, {-1.0, -1.0, 1.0}}};

  static std::array<double, 4> barycentric(double r, double s, double t) {
    return {-0.5 * (1.0 + r + s + t), 0.5 * (1.0 + r), 0.5 * (1.0 + s), 0.5 * (1.0 + t)};
  }
  static std::array<double, 3> reference(const std::array<double, 4>& lam) {
    return {2.0 * lam[1] - 1.0, 2.0 * lam[2] - 1.0, 2.0 * lam[3] - 1.0};
  }
};

/// The three vertices of face f in increasing order.
std::array<int, 3> face_vertices(int f);

std::string to_string(const MultiIndex4& alpha);

}  // namespace bbdg
