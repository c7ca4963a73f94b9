#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace calib {

/// Basis p-forms dx^{i_1}^...^dx^{i_p} (i_1 < ... < i_p, zero based) are
/// encoded as bit masks over the ambient dimension. Dimensions up to 16
/// fit comfortably; the geometry here never exceeds 8.
using Mask = std::uint32_t;

inline constexpr int kMaxDim = 16;

inline int degree_of(Mask m) { return std::popcount(m); }

inline Mask bit(int i) { return Mask{1} << i; }

inline std::vector<int> mask_indices(Mask m) {
  std::vector<int> out;
  out.reserve(std::popcount(m));
  for (int i = 0; m != 0; ++i, m >>= 1) {
    if (m & 1u) out.push_back(i);
  }
  return out;
}

inline Mask mask_from_indices(const std::vector<int>& idx, int dim) {
  Mask m = 0;
  int prev = -1;
  for (int i : idx) {
    if (i < 0 || i >= dim) throw std::invalid_argument("form index out of range");
    if (i <= prev) throw std::invalid_argument("form indices must be strictly increasing");
    m |= bit(i);
    prev = i;
  }
  return m;
}

/// Sign of dx^A ^ dx^B relative to dx^{A|B}; zero when A and B overlap.
inline int wedge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  // count pairs (i in a, j in b) with i > j
  int inversions = 0;
  Mask bb = b;
  while (bb) {
    int j = std::countr_zero(bb);
    bb &= bb - 1;
    inversions += std::popcount(a >> (j + 1));
  }
  return (inversions & 1) ? -1 : 1;
}

/// Sign of contracting e_i into dx^A (moves dx^i to the front); zero if i not in A.
inline int interior_sign(int i, Mask a) {
  if (!(a & bit(i))) return 0;
  int before = std::popcount(a & (bit(i) - 1));
  return (before & 1) ? -1 : 1;
}

inline long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// All masks of a given degree in lexicographic order of their index tuples.
inline std::vector<Mask> masks_of_degree(int dim, int degree) {
  std::vector<Mask> out;
  if (degree < 0 || degree > dim) return out;
  std::vector<int> idx(degree);
  for (int i = 0; i < degree; ++i) idx[i] = i;
  while (true) {
    Mask m = 0;
    for (int i : idx) m |= bit(i);
    out.push_back(m);
    int pos = degree - 1;
    while (pos >= 0 && idx[pos] == dim - degree + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int i = pos + 1; i < degree; ++i) idx[i] = idx[i - 1] + 1;
  }
  return out;
}

/// Position of each mask inside masks_of_degree(dim, degree).
class MaskIndex {
 public:
  MaskIndex() = default;
  MaskIndex(int dim, int degree) : masks_(masks_of_degree(dim, degree)), pos_(std::size_t{1} << dim, -1) {
    for (std::size_t i = 0; i < masks_.size(); ++i) pos_[masks_[i]] = static_cast<int>(i);
  }
  int size() const { return static_cast<int>(masks_.size()); }
  Mask mask(int i) const { return masks_[i]; }
  int position(Mask m) const { return pos_[m]; }
  const std::vector<Mask>& masks() const { return masks_; }

 private:
  std::vector<Mask> masks_;
  std::vector<int> pos_;
};

}  // namespace calib
