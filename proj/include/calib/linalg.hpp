#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "calib/exalg/form.hpp"

namespace calib {

/// Dense coordinates for a MultiForm of fixed degrees: parts are laid out
/// one after another, each in masks_of_degree order.
class Layout {
 public:
  Layout() = default;
  Layout(int dim, std::vector<int> degrees) : dim_(dim), degrees_(std::move(degrees)) {
    for (int p : degrees_) {
      offsets_.push_back(size_);
      idx_.emplace_back(dim_, p);
      size_ += idx_.back().size();
    }
  }
  int dim() const { return dim_; }
  int size() const { return size_; }
  const std::vector<int>& degrees() const { return degrees_; }
  std::size_t parts() const { return degrees_.size(); }
  int offset(std::size_t part) const { return offsets_[part]; }
  const MaskIndex& index(std::size_t part) const { return idx_[part]; }

  /// (part, mask) of coordinate r
  std::pair<std::size_t, Mask> locate(int r) const {
    std::size_t p = 0;
    while (p + 1 < offsets_.size() && offsets_[p + 1] <= r) ++p;
    return {p, idx_[p].mask(r - offsets_[p])};
  }

  template <class S>
  std::vector<S> to_vector(const MultiForm<S>& a) const {
    check(a);
    std::vector<S> v(size_, ScalarTraits<S>::zero());
    for (std::size_t p = 0; p < a.size(); ++p)
      for (const auto& [m, c] : a[p].terms()) v[offsets_[p] + idx_[p].position(m)] = c;
    return v;
  }
  Eigen::VectorXd to_eigen(const MultiForm<double>& a) const {
    check(a);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(size_);
    for (std::size_t p = 0; p < a.size(); ++p)
      for (const auto& [m, c] : a[p].terms()) v[offsets_[p] + idx_[p].position(m)] = c;
    return v;
  }
  Eigen::VectorXcd to_eigen(const MultiForm<Complexd>& a) const {
    check(a);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(size_);
    for (std::size_t p = 0; p < a.size(); ++p)
      for (const auto& [m, c] : a[p].terms()) v[offsets_[p] + idx_[p].position(m)] = c;
    return v;
  }
  template <class S>
  MultiForm<S> from_vector(const std::vector<S>& v) const {
    MultiForm<S> a(dim_, degrees_);
    for (std::size_t p = 0; p < degrees_.size(); ++p)
      for (int k = 0; k < idx_[p].size(); ++k) a[p].add(idx_[p].mask(k), v[offsets_[p] + k]);
    return a;
  }
  MultiForm<double> from_eigen(const Eigen::VectorXd& v, double drop = 0.0) const {
    MultiForm<double> a(dim_, degrees_);
    for (std::size_t p = 0; p < degrees_.size(); ++p)
      for (int k = 0; k < idx_[p].size(); ++k) {
        double c = v[offsets_[p] + k];
        if (std::abs(c) > drop) a[p].add(idx_[p].mask(k), c);
      }
    return a;
  }
  MultiForm<Complexd> from_eigen(const Eigen::VectorXcd& v, double drop = 0.0) const {
    MultiForm<Complexd> a(dim_, degrees_);
    for (std::size_t p = 0; p < degrees_.size(); ++p)
      for (int k = 0; k < idx_[p].size(); ++k) {
        Complexd c = v[offsets_[p] + k];
        if (std::abs(c) > drop) a[p].add(idx_[p].mask(k), c);
      }
    return a;
  }

 private:
  template <class S>
  void check(const MultiForm<S>& a) const {
    if (a.dim() != dim_ || a.degrees() != degrees_) throw std::invalid_argument("layout mismatch");
  }
  int dim_ = 0;
  std::vector<int> degrees_;
  std::vector<int> offsets_;
  std::vector<MaskIndex> idx_;
  int size_ = 0;
};

// ---------------------------------------------------------------- exact

/// Dense matrix over Q, row-major.
class QMatrix {
 public:
  QMatrix() = default;
  QMatrix(int rows, int cols) : r_(rows), c_(cols), a_(static_cast<std::size_t>(rows) * cols) {}
  int rows() const { return r_; }
  int cols() const { return c_; }
  Rational& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * c_ + j]; }
  const Rational& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * c_ + j]; }

  void set_col(int j, const std::vector<Rational>& v) {
    for (int i = 0; i < r_; ++i) (*this)(i, j) = v[i];
  }
  std::vector<Rational> col(int j) const {
    std::vector<Rational> v(r_);
    for (int i = 0; i < r_; ++i) v[i] = (*this)(i, j);
    return v;
  }
  QMatrix cols_subset(const std::vector<int>& js) const {
    QMatrix m(r_, static_cast<int>(js.size()));
    for (int i = 0; i < r_; ++i)
      for (std::size_t k = 0; k < js.size(); ++k) m(i, static_cast<int>(k)) = (*this)(i, js[k]);
    return m;
  }
  friend QMatrix operator*(const QMatrix& a, const QMatrix& b) {
    if (a.c_ != b.r_) throw std::invalid_argument("QMatrix product shape");
    QMatrix m(a.r_, b.c_);
    for (int i = 0; i < a.r_; ++i)
      for (int k = 0; k < a.c_; ++k) {
        const Rational& x = a(i, k);
        if (sgn(x) == 0) continue;
        for (int j = 0; j < b.c_; ++j)
          if (sgn(b(k, j)) != 0) m(i, j) += x * b(k, j);
      }
    return m;
  }
  Eigen::MatrixXd to_double() const {
    Eigen::MatrixXd m(r_, c_);
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < c_; ++j) m(i, j) = (*this)(i, j).get_d();
    return m;
  }

 private:
  int r_ = 0, c_ = 0;
  std::vector<Rational> a_;
};

struct RrefResult {
  QMatrix r;                // reduced row echelon form
  std::vector<int> pivots;  // pivot column of each nonzero row
};

inline RrefResult rref(QMatrix m) {
  RrefResult out;
  int row = 0;
  for (int c = 0; c < m.cols() && row < m.rows(); ++c) {
    int p = -1;
    for (int i = row; i < m.rows(); ++i)
      if (sgn(m(i, c)) != 0) {
        p = i;
        break;
      }
    if (p < 0) continue;
    if (p != row)
      for (int j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(row, j));
    Rational inv = 1 / m(row, c);
    for (int j = c; j < m.cols(); ++j) m(row, j) *= inv;
    for (int i = 0; i < m.rows(); ++i) {
      if (i == row || sgn(m(i, c)) == 0) continue;
      Rational f = m(i, c);
      for (int j = c; j < m.cols(); ++j)
        if (sgn(m(row, j)) != 0) m(i, j) -= f * m(row, j);
    }
    out.pivots.push_back(c);
    ++row;
  }
  out.r = std::move(m);
  return out;
}

inline int rank(const QMatrix& m) { return static_cast<int>(rref(m).pivots.size()); }

/// Basis of the right nullspace, one column per free variable.
inline QMatrix nullspace(const QMatrix& m) {
  RrefResult rr = rref(m);
  std::vector<bool> is_pivot(m.cols(), false);
  for (int p : rr.pivots) is_pivot[p] = true;
  std::vector<int> free;
  for (int j = 0; j < m.cols(); ++j)
    if (!is_pivot[j]) free.push_back(j);
  QMatrix ns(m.cols(), static_cast<int>(free.size()));
  for (std::size_t k = 0; k < free.size(); ++k) {
    int f = free[k];
    ns(f, static_cast<int>(k)) = 1;
    for (std::size_t r = 0; r < rr.pivots.size(); ++r) ns(rr.pivots[r], static_cast<int>(k)) = -rr.r(static_cast<int>(r), f);
  }
  return ns;
}

/// Independent columns spanning the column space (pivot columns of m).
inline QMatrix colspace(const QMatrix& m) { return m.cols_subset(rref(m).pivots); }

// ---------------------------------------------------------------- floating

inline constexpr double kRankTol = 1e-10;

inline int numeric_rank(const Eigen::MatrixXd& a, double rel = kRankTol) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > rel * s[0]) ++r;
  return r;
}

/// Orthonormal basis (columns) of the column space.
inline Eigen::MatrixXd orthonormal_colspace(const Eigen::MatrixXd& a, double rel = kRankTol) {
  if (a.cols() == 0) return Eigen::MatrixXd(a.rows(), 0);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  int r = 0;
  if (s.size() > 0 && s[0] > 0)
    for (int i = 0; i < s.size(); ++i)
      if (s[i] > rel * s[0]) ++r;
  return svd.matrixU().leftCols(r);
}

/// Orthonormal basis (columns) of the right nullspace.
inline Eigen::MatrixXd orthonormal_nullspace(const Eigen::MatrixXd& a, double rel = kRankTol) {
  const int n = static_cast<int>(a.cols());
  if (a.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int r = 0;
  if (s.size() > 0 && s[0] > 0)
    for (int i = 0; i < s.size(); ++i)
      if (s[i] > rel * s[0]) ++r;
  return svd.matrixV().rightCols(n - r);
}

/// Orthonormalize exact generators in floating point.
inline Eigen::MatrixXd orthonormalize(const QMatrix& m) { return orthonormal_colspace(m.to_double()); }

}  // namespace calib
