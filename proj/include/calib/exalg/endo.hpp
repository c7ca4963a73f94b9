#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "calib/exalg/form.hpp"

namespace calib {

/// Endomorphism xi = sum xi^i_j theta^j (x) e_i, stored row-major:
/// (i, j) -> xi^i_j, so that xi(e_j) = sum_i xi(i, j) e_i.
template <class S>
class Endo {
 public:
  using Scalar = S;
  Endo() = default;
  explicit Endo(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim, ScalarTraits<S>::zero()) {
    if (dim <= 0 || dim > kMaxDim) throw std::invalid_argument("endomorphism dimension out of range");
  }
  static Endo identity(int dim) {
    Endo e(dim);
    for (int i = 0; i < dim; ++i) e(i, i) = ScalarTraits<S>::from_int(1);
    return e;
  }
  /// e_i (x) theta^j
  static Endo unit(int dim, int i, int j) {
    Endo e(dim);
    e(i, j) = ScalarTraits<S>::from_int(1);
    return e;
  }

  int dim() const { return dim_; }
  S& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * dim_ + j]; }
  const S& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * dim_ + j]; }

  bool is_zero() const {
    for (const auto& c : a_)
      if (!calib::is_zero(c)) return false;
    return true;
  }
  double norm2() const {
    double s = 0;
    for (const auto& c : a_) s += ScalarTraits<S>::abs2(c);
    return s;
  }

  Endo& operator+=(const Endo& o) {
    check(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  Endo& operator-=(const Endo& o) {
    check(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  friend Endo operator+(Endo a, const Endo& b) { return a += b; }
  friend Endo operator-(Endo a, const Endo& b) { return a -= b; }
  friend Endo operator-(const Endo& a) {
    Endo r(a.dim_);
    for (std::size_t k = 0; k < a.a_.size(); ++k) r.a_[k] = -a.a_[k];
    return r;
  }
  friend Endo operator*(const S& s, const Endo& a) {
    Endo r(a.dim_);
    for (std::size_t k = 0; k < a.a_.size(); ++k) r.a_[k] = s * a.a_[k];
    return r;
  }
  friend Endo operator*(const Endo& a, const Endo& b) {
    a.check(b);
    Endo r(a.dim_);
    for (int i = 0; i < a.dim_; ++i)
      for (int k = 0; k < a.dim_; ++k) {
        if (calib::is_zero(a(i, k))) continue;
        for (int j = 0; j < a.dim_; ++j) r(i, j) += a(i, k) * b(k, j);
      }
    return r;
  }
  friend bool operator==(const Endo& a, const Endo& b) { return a.dim_ == b.dim_ && a.a_ == b.a_; }

  Endo transpose() const {
    Endo r(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) r(i, j) = (*this)(j, i);
    return r;
  }

  template <class F>
  auto map(F&& f) const {
    using T = std::decay_t<decltype(f(std::declval<const S&>()))>;
    Endo<T> r(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) r(i, j) = f((*this)(i, j));
    return r;
  }

 private:
  void check(const Endo& o) const {
    if (o.dim_ != dim_) throw std::invalid_argument("endomorphism dimension mismatch");
  }
  int dim_ = 0;
  std::vector<S> a_;
};

/// Derivation action: sum_{i,j} xi(i,j) theta^j ^ i_{e_i} phi.
/// This is d/dt of the pullback of phi by exp(t xi) at t = 0.
template <class S>
Form<S> rho_hat(const Endo<S>& xi, const Form<S>& phi) {
  if (xi.dim() != phi.dim()) throw std::invalid_argument("rho_hat: dimension mismatch");
  const int n = phi.dim();
  Form<S> r(n, phi.degree());
  for (const auto& [m, c] : phi.terms()) {
    Mask mm = m;
    while (mm) {
      int i = std::countr_zero(mm);
      mm &= mm - 1;
      Mask rest = m & ~bit(i);
      int si = interior_sign(i, m);
      for (int j = 0; j < n; ++j) {
        const S& x = xi(i, j);
        if (calib::is_zero(x)) continue;
        int sw = wedge_sign(bit(j), rest);
        if (sw == 0) continue;
        r.add(rest | bit(j), signed_copy<S>(x * c, si * sw));
      }
    }
  }
  return r;
}

template <class S>
MultiForm<S> rho_hat(const Endo<S>& xi, const MultiForm<S>& a) {
  return a.apply([&](const Form<S>& p) { return rho_hat(xi, p); });
}

/// Pullback by the linear map g: theta^k -> sum_j g(k, j) theta^j.
template <class S>
Form<S> pullback(const Endo<S>& g, const Form<S>& phi) {
  if (g.dim() != phi.dim()) throw std::invalid_argument("pullback: dimension mismatch");
  const int n = phi.dim();
  std::vector<Form<S>> img;
  for (int k = 0; k < n; ++k) {
    Form<S> t(n, 1);
    for (int j = 0; j < n; ++j) t.add(bit(j), g(k, j));
    img.push_back(std::move(t));
  }
  Form<S> r(n, phi.degree());
  for (const auto& [m, c] : phi.terms()) {
    Form<S> acc = Form<S>::scalar(n, c);
    for (int k : mask_indices(m)) acc = wedge(acc, img[k]);
    r += acc;
  }
  return r;
}

template <class S>
MultiForm<S> pullback(const Endo<S>& g, const MultiForm<S>& a) {
  return a.apply([&](const Form<S>& p) { return pullback(g, p); });
}

// Beyond this Frobenius norm the floating operator series is refused.
inline constexpr double kRhoExpRadius = 4.0;

/// exp(xi). Exact scalars require xi nilpotent; floats use Pade scaling-squaring.
template <class S>
Endo<S> endo_exp(const Endo<S>& xi) {
  const int n = xi.dim();
  if constexpr (std::is_same_v<S, double>) {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = xi(i, j);
    Eigen::MatrixXd e = m.exp();
    Endo<double> r(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r(i, j) = e(i, j);
    return r;
  } else {
    Endo<S> sum = Endo<S>::identity(n);
    Endo<S> term = Endo<S>::identity(n);
    for (int k = 1; k <= n + 1; ++k) {
      term = ScalarTraits<S>::inv_int(k) * (term * xi);
      if (term.is_zero()) return sum;
      sum += term;
    }
    throw std::domain_error("endo_exp: exact exponential needs a nilpotent endomorphism");
  }
}

/// Pullback of phi by exp(xi) via the operator series sum rho_hat^k / k!.
template <class S>
Form<S> rho_exp_series(const Endo<S>& xi, const Form<S>& phi, int max_terms = 400) {
  if constexpr (!ScalarTraits<S>::is_exact) {
    if (std::sqrt(xi.norm2()) > kRhoExpRadius)
      throw std::domain_error("rho_exp: |xi| beyond the series radius");
  }
  Form<S> sum = phi;
  Form<S> term = phi;
  for (int k = 1; k <= max_terms; ++k) {
    term = ScalarTraits<S>::inv_int(k) * rho_hat(xi, term);
    if (term.is_zero()) return sum;
    sum += term;
    if constexpr (!ScalarTraits<S>::is_exact) {
      if (term.norm2() <= 1e-34 * sum.norm2() && k > 2) return sum;
    }
  }
  throw std::domain_error("rho_exp: operator series did not converge");
}

template <class S>
Form<S> rho_exp(const Endo<S>& xi, const Form<S>& phi) {
  return rho_exp_series(xi, phi);
}
template <class S>
MultiForm<S> rho_exp(const Endo<S>& xi, const MultiForm<S>& a) {
  return a.apply([&](const Form<S>& p) { return rho_exp_series(xi, p); });
}

/// Second evaluation path: multilinear pullback by the matrix exponential.
template <class S>
MultiForm<S> rho_exp_matrix(const Endo<S>& xi, const MultiForm<S>& a) {
  return pullback(endo_exp(xi), a);
}

/// Principal matrix logarithm (floats).
inline Endo<double> endo_log(const Endo<double>& g) {
  const int n = g.dim();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(i, j);
  Eigen::MatrixXd l = m.log();
  Endo<double> r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = l(i, j);
  return r;
}

inline Eigen::MatrixXd to_eigen(const Endo<double>& e) {
  Eigen::MatrixXd m(e.dim(), e.dim());
  for (int i = 0; i < e.dim(); ++i)
    for (int j = 0; j < e.dim(); ++j) m(i, j) = e(i, j);
  return m;
}
inline Endo<double> from_eigen(const Eigen::MatrixXd& m) {
  Endo<double> e(static_cast<int>(m.rows()));
  for (int i = 0; i < e.dim(); ++i)
    for (int j = 0; j < e.dim(); ++j) e(i, j) = m(i, j);
  return e;
}

}  // namespace calib
