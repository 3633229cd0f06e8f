#include "bbdg/tensor_index.hpp"

#include <sstream>

namespace bbdg {

void check_degree(int n) {
  if (n < kMinDegree || n > kMaxDegree) {
    throw DegreeError("degree " + std::to_string(n) + " outside supported range [" +
                      std::to_string(kMinDegree) + ", " + std::to_string(kMaxDegree) + "]");
  }
}

void check_face(int f) {
  if (f < 0 || f >= kFacesPerTet) throw FaceError("invalid face id " + std::to_string(f));
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  // r * (n - k + i) is divisible by i at every step.
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

namespace {

template <int Dim>
void append_indices(int n, BaryIndex<Dim>& cur, int slot, std::vector<BaryIndex<Dim>>& out) {
  if (slot == Dim) {
    cur[Dim] = n;
    out.push_back(cur);
    return;
  }
  for (int v = n; v >= 0; --v) {
    cur[slot] = v;
    append_indices<Dim>(n - v, cur, slot + 1, out);
  }
}

}  // namespace

template <int Dim>
std::vector<BaryIndex<Dim>> simplex_indices(int n) {
  std::vector<BaryIndex<Dim>> out;
  if (n < 0) return out;
  out.reserve(static_cast<std::size_t>(simplex_dim<Dim>(n)));
  BaryIndex<Dim> cur{};
  append_indices<Dim>(n, cur, 0, out);
  return out;
}

template <int Dim>
int index_of(const BaryIndex<Dim>& alpha) {
  // Entries ahead of alpha: all tuples with a larger leading component at each
  // level, C(m - a - 1 + k, k) of them with m the remaining degree.
  int pos = 0;
  int m = alpha.degree();
  for (int slot = 0; slot < Dim; ++slot) {
    const int k = Dim - slot;
    pos += static_cast<int>(binomial(m - alpha[slot] - 1 + k, k));
    m -= alpha[slot];
  }
  return pos;
}

template <int Dim>
double multinomial(const BaryIndex<Dim>& alpha) {
  double r = 1.0;
  int m = alpha.degree();
  for (int slot = 0; slot < Dim; ++slot) {
    r *= static_cast<double>(binomial(m, alpha[slot]));
    m -= alpha[slot];
  }
  return r;
}

template std::vector<BaryIndex<1>> simplex_indices<1>(int);
template std::vector<BaryIndex<2>> simplex_indices<2>(int);
template std::vector<BaryIndex<3>> simplex_indices<3>(int);
template int index_of<1>(const BaryIndex<1>&);
template int index_of<2>(const BaryIndex<2>&);
template int index_of<3>(const BaryIndex<3>&);
template double multinomial<1>(const BaryIndex<1>&);
template double multinomial<2>(const BaryIndex<2>&);
template double multinomial<3>(const BaryIndex<3>&);

std::vector<MultiIndex4> canonical_ordering(int n) {
  check_degree(n);
  return simplex_indices<3>(n);
}

MultiIndex3 drop_component(const MultiIndex4& alpha, int f) {
  MultiIndex3 out;
  int j = 0;
  for (int i = 0; i < 4; ++i) {
    if (i != f) out[j++] = alpha[i];
  }
  return out;
}

MultiIndex4 insert_component(const MultiIndex3& beta, int f, int value) {
  MultiIndex4 out;
  int j = 0;
  for (int i = 0; i < 4; ++i) out[i] = (i == f) ? value : beta[j++];
  return out;
}

std::vector<int> face_trace_indices(int n, int f) {
  check_degree(n);
  check_face(f);
  std::vector<int> out;
  for (const auto& beta : simplex_indices<2>(n)) out.push_back(index_of(insert_component(beta, f, 0)));
  return out;
}

FaceLayerOrdering face_layer_ordering(int n, int f) {
  check_degree(n);
  check_face(f);
  FaceLayerOrdering ord;
  ord.degree = n;
  ord.face = f;
  ord.layers.resize(static_cast<std::size_t>(n + 1));
  for (int j = 0; j <= n; ++j) {
    for (const auto& beta : simplex_indices<2>(n - j)) {
      ord.layers[static_cast<std::size_t>(j)].push_back(index_of(insert_component(beta, f, j)));
    }
  }
  return ord;
}

std::array<int, 3> face_vertices(int f) {
  check_face(f);
  std::array<int, 3> v{};
  int j = 0;
  for (int i = 0; i < 4; ++i) {
    if (i != f) v[static_cast<std::size_t>(j++)] = i;
  }
  return v;
}

std::string to_string(const MultiIndex4& alpha) {
  std::ostringstream os;
  os << '(' << alpha[0] << ',' << alpha[1] << ',' << alpha[2] << ',' << alpha[3] << ')';
  return os.str();
}

}  // namespace bbdg
