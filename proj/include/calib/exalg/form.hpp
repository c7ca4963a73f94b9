#pragma once

#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "calib/exalg/basis.hpp"
#include "calib/scalar.hpp"

namespace calib {

// multiply by +1/-1/0 without needing S(int) arithmetic
template <class S>
S signed_copy(const S& c, int sign) {
  if (sign > 0) return c;
  if (sign < 0) return -c;
  return ScalarTraits<S>::zero();
}

/// An exterior p-form on R^n with coefficients in the ring S, stored sparsely
/// as mask -> coefficient. Zero coefficients are never stored.
template <class S>
class Form {
 public:
  using Scalar = S;
  using Terms = std::map<Mask, S>;

  Form() = default;
  Form(int dim, int degree) : dim_(dim), degree_(degree) {
    if (dim < 0 || dim > kMaxDim) throw std::invalid_argument("form dimension out of range");
    if (degree < 0) throw std::invalid_argument("negative form degree");
  }

  static Form basis(int dim, const std::vector<int>& idx, S c = ScalarTraits<S>::from_int(1)) {
    Form f(dim, static_cast<int>(idx.size()));
    f.add(mask_from_indices(idx, dim), std::move(c));
    return f;
  }
  static Form scalar(int dim, S c) {
    Form f(dim, 0);
    f.add(0, std::move(c));
    return f;
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  S coeff(Mask m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? ScalarTraits<S>::zero() : it->second;
  }

  void add(Mask m, const S& c) {
    if (degree_of(m) != degree_) throw std::invalid_argument("term degree mismatch");
    if (m >> dim_) throw std::invalid_argument("term index out of range");
    if (calib::is_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (calib::is_zero(it->second)) terms_.erase(it);
    }
  }
  void set(Mask m, const S& c) {
    terms_.erase(m);
    add(m, c);
  }

  Form& operator+=(const Form& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add(m, c);
    return *this;
  }
  Form& operator-=(const Form& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add(m, -c);
    return *this;
  }
  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }
  friend Form operator-(const Form& a) {
    Form r(a.dim_, a.degree_);
    for (const auto& [m, c] : a.terms_) r.terms_.emplace(m, -c);
    return r;
  }
  friend Form operator*(const S& s, const Form& a) {
    Form r(a.dim_, a.degree_);
    for (const auto& [m, c] : a.terms_) r.add(m, s * c);
    return r;
  }
  friend bool operator==(const Form& a, const Form& b) {
    return a.dim_ == b.dim_ && a.degree_ == b.degree_ && a.terms_ == b.terms_;
  }

  /// Apply f to every coefficient (result ring may differ).
  template <class F>
  auto map(F&& f) const {
    using T = std::decay_t<decltype(f(std::declval<const S&>()))>;
    Form<T> r(dim_, degree_);
    for (const auto& [m, c] : terms_) r.add(m, f(c));
    return r;
  }

  /// Sum of |c|^2 over the standard basis (Euclidean norm squared).
  double norm2() const {
    double s = 0;
    for (const auto& [m, c] : terms_) s += ScalarTraits<S>::abs2(c);
    return s;
  }

 private:
  void check_same(const Form& o) const {
    if (o.dim_ != dim_ || o.degree_ != degree_) throw std::invalid_argument("form shape mismatch");
  }

  int dim_ = 0;
  int degree_ = 0;
  Terms terms_;
};

template <class S>
Form<S> wedge(const Form<S>& a, const Form<S>& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("wedge: dimension mismatch");
  int deg = a.degree() + b.degree();
  if (deg > a.dim()) return Form<S>(a.dim(), deg);
  Form<S> r(a.dim(), deg);
  for (const auto& [ma, ca] : a.terms()) {
    for (const auto& [mb, cb] : b.terms()) {
      int s = wedge_sign(ma, mb);
      if (s == 0) continue;
      r.add(ma | mb, signed_copy<S>(ca * cb, s));
    }
  }
  return r;
}

/// i_{e_i} a
template <class S>
Form<S> interior(int i, const Form<S>& a) {
  if (i < 0 || i >= a.dim()) throw std::invalid_argument("interior: index out of range");
  if (a.degree() == 0) return Form<S>(a.dim(), 0);
  Form<S> r(a.dim(), a.degree() - 1);
  for (const auto& [m, c] : a.terms()) {
    int s = interior_sign(i, m);
    if (s != 0) r.add(m & ~bit(i), signed_copy<S>(c, s));
  }
  return r;
}

/// i_v a for v = sum v_i e_i
template <class S>
Form<S> interior(const std::vector<S>& v, const Form<S>& a) {
  if (static_cast<int>(v.size()) != a.dim()) throw std::invalid_argument("interior: dimension mismatch");
  if (a.degree() == 0) return Form<S>(a.dim(), 0);
  Form<S> r(a.dim(), a.degree() - 1);
  for (int i = 0; i < a.dim(); ++i) {
    if (calib::is_zero(v[i])) continue;
    for (const auto& [m, c] : a.terms()) {
      int s = interior_sign(i, m);
      if (s != 0) r.add(m & ~bit(i), signed_copy<S>(v[i] * c, s));
    }
  }
  return r;
}

/// The 1-form sum u_i dx^i.
template <class S>
Form<S> one_form(const std::vector<S>& u) {
  Form<S> r(static_cast<int>(u.size()), 1);
  for (std::size_t i = 0; i < u.size(); ++i) r.add(bit(static_cast<int>(i)), u[i]);
  return r;
}

/// Tuple of forms of fixed degrees on the same space.
template <class S>
class MultiForm {
 public:
  using Scalar = S;
  MultiForm() = default;
  MultiForm(int dim, const std::vector<int>& degrees) : dim_(dim) {
    for (int p : degrees) parts_.emplace_back(dim, p);
  }
  explicit MultiForm(std::vector<Form<S>> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw std::invalid_argument("multiform needs at least one part");
    dim_ = parts_.front().dim();
    for (const auto& p : parts_)
      if (p.dim() != dim_) throw std::invalid_argument("multiform parts differ in dimension");
  }
  MultiForm(std::initializer_list<Form<S>> parts) : MultiForm(std::vector<Form<S>>(parts)) {}

  int dim() const { return dim_; }
  std::size_t size() const { return parts_.size(); }
  std::vector<int> degrees() const {
    std::vector<int> d;
    for (const auto& p : parts_) d.push_back(p.degree());
    return d;
  }
  const Form<S>& operator[](std::size_t i) const { return parts_[i]; }
  Form<S>& operator[](std::size_t i) { return parts_[i]; }
  const std::vector<Form<S>>& parts() const { return parts_; }

  bool is_zero() const {
    for (const auto& p : parts_)
      if (!p.is_zero()) return false;
    return true;
  }
  double norm2() const {
    double s = 0;
    for (const auto& p : parts_) s += p.norm2();
    return s;
  }

  MultiForm& operator+=(const MultiForm& o) {
    check_same(o);
    for (std::size_t i = 0; i < parts_.size(); ++i) parts_[i] += o.parts_[i];
    return *this;
  }
  MultiForm& operator-=(const MultiForm& o) {
    check_same(o);
    for (std::size_t i = 0; i < parts_.size(); ++i) parts_[i] -= o.parts_[i];
    return *this;
  }
  friend MultiForm operator+(MultiForm a, const MultiForm& b) { return a += b; }
  friend MultiForm operator-(MultiForm a, const MultiForm& b) { return a -= b; }
  friend MultiForm operator-(const MultiForm& a) {
    MultiForm r = a;
    for (auto& p : r.parts_) p = -p;
    return r;
  }
  friend MultiForm operator*(const S& s, const MultiForm& a) {
    MultiForm r = a;
    for (auto& p : r.parts_) p = s * p;
    return r;
  }
  friend bool operator==(const MultiForm& a, const MultiForm& b) { return a.parts_ == b.parts_; }

  template <class F>
  auto map(F&& f) const {
    using T = std::decay_t<decltype(f(std::declval<const S&>()))>;
    std::vector<Form<T>> ps;
    for (const auto& p : parts_) ps.push_back(p.map(f));
    MultiForm<T> r(std::move(ps));
    return r;
  }

  /// apply a per-part operation returning a Form
  template <class F>
  MultiForm apply(F&& f) const {
    std::vector<Form<S>> ps;
    for (const auto& p : parts_) ps.push_back(f(p));
    return MultiForm(std::move(ps));
  }

 private:
  void check_same(const MultiForm& o) const {
    if (o.parts_.size() != parts_.size()) throw std::invalid_argument("multiform shape mismatch");
  }
  int dim_ = 0;
  std::vector<Form<S>> parts_;
};

template <class S>
MultiForm<S> wedge(const Form<S>& a, const MultiForm<S>& b) {
  return b.apply([&](const Form<S>& p) { return wedge(a, p); });
}
template <class S>
MultiForm<S> interior(int i, const MultiForm<S>& a) {
  return a.apply([&](const Form<S>& p) { return interior(i, p); });
}
template <class S>
MultiForm<S> interior(const std::vector<S>& v, const MultiForm<S>& a) {
  return a.apply([&](const Form<S>& p) { return interior(v, p); });
}

}  // namespace calib
