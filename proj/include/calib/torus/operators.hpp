#pragma once

#include <stdexcept>
#include <vector>

#include "calib/exalg/endo.hpp"
#include "calib/exalg/json.hpp"
#include "calib/torus/trigpoly.hpp"

namespace calib {

template <class C>
using TrigForm = Form<TrigPoly<C>>;
template <class C>
using TrigMulti = MultiForm<TrigPoly<C>>;
template <class C>
using EndoField = Endo<TrigPoly<C>>;
template <class C>
using VectorField = std::vector<TrigPoly<C>>;

// ------------------------------------------------------------ lifting constants

inline Complexd lift_coeff(double c) { return {c, 0.0}; }
inline Complexd lift_coeff(const Complexd& c) { return c; }
inline ComplexQ lift_coeff(const Rational& c) { return ComplexQ(c); }
inline ComplexQ lift_coeff(const ComplexQ& c) { return c; }

template <class R>
auto lift(const Form<R>& f) {
  using C = decltype(lift_coeff(std::declval<R>()));
  return f.map([](const R& c) { return TrigPoly<C>(lift_coeff(c)); });
}
template <class R>
auto lift(const MultiForm<R>& f) {
  using C = decltype(lift_coeff(std::declval<R>()));
  return f.map([](const R& c) { return TrigPoly<C>(lift_coeff(c)); });
}
template <class R>
auto lift(const Endo<R>& e) {
  using C = decltype(lift_coeff(std::declval<R>()));
  return e.map([](const R& c) { return TrigPoly<C>(lift_coeff(c)); });
}

/// Multiply every coefficient by the constant s.
template <class C>
TrigForm<C> scale(const C& s, const TrigForm<C>& f) {
  return f.map([&](const TrigPoly<C>& p) { return p.scaled(s); });
}
template <class C>
TrigMulti<C> scale(const C& s, const TrigMulti<C>& f) {
  return f.map([&](const TrigPoly<C>& p) { return p.scaled(s); });
}
template <class C>
EndoField<C> scale(const C& s, const EndoField<C>& e) {
  return e.map([&](const TrigPoly<C>& p) { return p.scaled(s); });
}

// ------------------------------------------------------------ exterior derivative

template <class C>
TrigForm<C> partial(int j, const TrigForm<C>& f) {
  return f.map([j](const TrigPoly<C>& p) { return p.partial(j); });
}

/// d = sum_j dx^j ^ d/dx_j
template <class C>
TrigForm<C> d(const TrigForm<C>& f) {
  const int n = f.dim();
  TrigForm<C> r(n, f.degree() + 1);
  if (f.degree() + 1 > n) return r;
  for (const auto& [m, c] : f.terms()) {
    for (int j = 0; j < n; ++j) {
      int s = wedge_sign(bit(j), m);
      if (s == 0) continue;
      TrigPoly<C> dc = c.partial(j);
      if (!dc.is_zero()) r.add(m | bit(j), signed_copy(dc, s));
    }
  }
  return r;
}
template <class C>
TrigMulti<C> d(const TrigMulti<C>& f) {
  std::vector<TrigForm<C>> ps;
  for (const auto& p : f.parts()) ps.push_back(d(p));
  return TrigMulti<C>(std::move(ps));
}

// ------------------------------------------------------------ vector fields

template <class C>
VectorField<C> column(const EndoField<C>& a, int i) {
  VectorField<C> v(a.dim());
  for (int k = 0; k < a.dim(); ++k) v[k] = a(k, i);
  return v;
}

/// (aX)^k = sum_m a(k,m) X^m
template <class C>
VectorField<C> apply_endo(const EndoField<C>& a, const VectorField<C>& x) {
  VectorField<C> r(a.dim());
  for (int k = 0; k < a.dim(); ++k)
    for (int m = 0; m < a.dim(); ++m)
      if (!a(k, m).is_zero() && !x[m].is_zero()) r[k] += a(k, m) * x[m];
  return r;
}

/// X(f) = sum X^m d_m f
template <class C>
TrigPoly<C> derivative(const VectorField<C>& x, const TrigPoly<C>& f) {
  TrigPoly<C> r;
  for (std::size_t m = 0; m < x.size(); ++m)
    if (!x[m].is_zero()) r += x[m] * f.partial(static_cast<int>(m));
  return r;
}

/// [X,Y]^k = X(Y^k) - Y(X^k)
template <class C>
VectorField<C> bracket(const VectorField<C>& x, const VectorField<C>& y) {
  VectorField<C> r(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) r[k] = derivative(x, y[k]) - derivative(y, x[k]);
  return r;
}

template <class C>
VectorField<C> operator+(VectorField<C> a, const VectorField<C>& b) {
  for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
  return a;
}
template <class C>
VectorField<C> operator-(VectorField<C> a, const VectorField<C>& b) {
  for (std::size_t k = 0; k < a.size(); ++k) a[k] -= b[k];
  return a;
}

template <class C>
VectorField<C> coordinate_field(int n, int i) {
  VectorField<C> v(n);
  v[i] = TrigPoly<C>(ScalarTraits<C>::from_int(1));
  return v;
}

/// Jacobian field (Dv)(i,j) = d_j v^i; rho_hat_{Dv} of a constant form is L_v of it.
template <class C>
EndoField<C> jacobian(const VectorField<C>& v) {
  const int n = static_cast<int>(v.size());
  EndoField<C> a(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = v[i].partial(j);
  return a;
}

// ------------------------------------------------------------ Lie derivatives

/// Classical Lie derivative in coordinates:
/// L_v(f dx^J) = v(f) dx^J + f sum_r dx^{j_1}^..^d(v^{j_r})^..^dx^{j_p}
template <class C>
TrigForm<C> lie_derivative(const VectorField<C>& v, const TrigForm<C>& eta) {
  const int n = eta.dim();
  TrigForm<C> r(n, eta.degree());
  std::vector<TrigForm<C>> dv;
  for (int j = 0; j < n; ++j) {
    TrigForm<C> w(n, 1);
    for (int m = 0; m < n; ++m) w.add(bit(m), v[j].partial(m));
    dv.push_back(std::move(w));
  }
  const TrigPoly<C> one(ScalarTraits<C>::from_int(1));
  for (const auto& [mask, c] : eta.terms()) {
    r.add(mask, derivative(v, c));
    auto idx = mask_indices(mask);
    for (std::size_t slot = 0; slot < idx.size(); ++slot) {
      TrigForm<C> acc = TrigForm<C>::scalar(n, c);
      for (std::size_t s = 0; s < idx.size(); ++s) {
        if (s == slot) {
          acc = wedge(acc, dv[idx[s]]);
        } else {
          TrigForm<C> b(n, 1);
          b.add(bit(idx[s]), one);
          acc = wedge(acc, b);
        }
      }
      r += acc;
    }
  }
  return r;
}

/// L_a = rho_hat_a d - d rho_hat_a
template <class C>
TrigForm<C> lie_operator_L(const EndoField<C>& a, const TrigForm<C>& alpha) {
  return rho_hat(a, d(alpha)) - d(rho_hat(a, alpha));
}
template <class C>
TrigMulti<C> lie_operator_L(const EndoField<C>& a, const TrigMulti<C>& alpha) {
  return alpha.apply([&](const TrigForm<C>& p) { return lie_operator_L(a, p); });
}

/// Second path for L_a on coordinate frames (all brackets vanish):
/// (L_a eta)(d_{i_0},..,d_{i_p}) = sum_m (-1)^m (L_{a d_{i_m}} eta)(.., no i_m, ..)
template <class C>
TrigForm<C> lie_operator_L_frame(const EndoField<C>& a, const TrigForm<C>& eta) {
  const int n = eta.dim();
  const int p = eta.degree();
  TrigForm<C> r(n, p + 1);
  if (p + 1 > n) return r;
  std::vector<TrigForm<C>> lie_cols;
  for (int i = 0; i < n; ++i) lie_cols.push_back(lie_derivative(column(a, i), eta));
  for (Mask out : masks_of_degree(n, p + 1)) {
    auto idx = mask_indices(out);
    TrigPoly<C> s;
    for (std::size_t m = 0; m < idx.size(); ++m) {
      TrigPoly<C> c = lie_cols[idx[m]].coeff(out & ~bit(idx[m]));
      if (m % 2) s -= c;
      else s += c;
    }
    r.add(out, s);
  }
  return r;
}

// ------------------------------------------------------------ Nijenhuis-type tensor

/// N(a,b) as n two-forms N^k with N^k(d_i, d_j) = N(a,b)(d_i, d_j)^k.
template <class C>
std::vector<TrigForm<C>> nijenhuis(const EndoField<C>& a, const EndoField<C>& b) {
  const int n = a.dim();
  if (b.dim() != n) throw std::invalid_argument("nijenhuis: dimension mismatch");
  std::vector<TrigForm<C>> N(n, TrigForm<C>(n, 2));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      auto u = coordinate_field<C>(n, i), v = coordinate_field<C>(n, j);
      auto au = column(a, i), av = column(a, j), bu = column(b, i), bv = column(b, j);
      // ab[u,v] and ba[u,v] vanish on coordinate fields
      VectorField<C> val = bracket(au, bv) - bracket(av, bu);
      val = val - apply_endo(a, bracket(bu, v)) + apply_endo(a, bracket(bv, u));
      val = val - apply_endo(b, bracket(au, v)) + apply_endo(b, bracket(av, u));
      for (int k = 0; k < n; ++k) N[k].add(bit(i) | bit(j), val[k]);
    }
  return N;
}

/// i_N alpha = sum_k N^k ^ i_{d_k} alpha
template <class C>
TrigForm<C> interior_tensor(const std::vector<TrigForm<C>>& N, const TrigForm<C>& alpha) {
  const int n = alpha.dim();
  TrigForm<C> r(n, alpha.degree() + 1);
  if (alpha.degree() == 0) return r;
  for (int k = 0; k < n; ++k) {
    if (N[k].is_zero()) continue;
    r += wedge(N[k], interior(k, alpha));
  }
  return r;
}

/// G(a,a) alpha = i_{N(a,a)} alpha - L_{a a} alpha
template <class C>
TrigForm<C> g_operator(const EndoField<C>& a, const TrigForm<C>& alpha) {
  return interior_tensor(nijenhuis(a, a), alpha) - lie_operator_L(a * a, alpha);
}

/// Polarized version: i_{N(a,b)} - L_{ab}
template <class C>
TrigForm<C> g_operator(const EndoField<C>& a, const EndoField<C>& b, const TrigForm<C>& alpha) {
  return interior_tensor(nijenhuis(a, b), alpha) - lie_operator_L(a * b, alpha);
}
template <class C>
TrigMulti<C> g_operator(const EndoField<C>& a, const EndoField<C>& b, const TrigMulti<C>& alpha) {
  auto N = nijenhuis(a, b);
  auto ab = a * b;
  return alpha.apply([&](const TrigForm<C>& p) { return interior_tensor(N, p) - lie_operator_L(ab, p); });
}

// ------------------------------------------------------------ diagnostics

template <class C>
double l2_norm(const TrigForm<C>& f) {
  return std::sqrt(f.norm2());
}
template <class C>
double l2_norm(const TrigMulti<C>& f) {
  return std::sqrt(f.norm2());
}

template <class C>
double reality_defect(const TrigForm<C>& f) {
  double d = 0;
  for (const auto& [m, c] : f.terms()) d = std::max(d, c.reality_defect());
  return d;
}
template <class C>
double reality_defect(const TrigMulti<C>& f) {
  double d = 0;
  for (const auto& p : f.parts()) d = std::max(d, reality_defect(p));
  return d;
}
template <class C>
double reality_defect(const EndoField<C>& a) {
  double d = 0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) d = std::max(d, a(i, j).reality_defect());
  return d;
}

template <class C>
TrigForm<C> pruned(const TrigForm<C>& f, double tol) {
  return f.map([tol](const TrigPoly<C>& p) { return p.pruned(tol); });
}
template <class C>
TrigMulti<C> pruned(const TrigMulti<C>& f, double tol) {
  return f.map([tol](const TrigPoly<C>& p) { return p.pruned(tol); });
}
template <class C>
EndoField<C> pruned(const EndoField<C>& a, double tol) {
  return a.map([tol](const TrigPoly<C>& p) { return p.pruned(tol); });
}

/// All frequencies appearing in any coefficient.
template <class C>
std::vector<Freq> support(const TrigMulti<C>& f) {
  std::map<Freq, int> s;
  for (const auto& p : f.parts())
    for (const auto& [m, c] : p.terms())
      for (const auto& [k, v] : c.modes()) s[k] = 1;
  std::vector<Freq> out;
  for (const auto& [k, v] : s) out.push_back(k);
  return out;
}

/// Coefficient MultiForm at one frequency.
template <class C>
MultiForm<C> mode_of(const TrigMulti<C>& f, const Freq& k) {
  std::vector<Form<C>> ps;
  for (const auto& p : f.parts()) {
    Form<C> q(p.dim(), p.degree());
    for (const auto& [m, c] : p.terms()) q.add(m, c.at(k));
    ps.push_back(std::move(q));
  }
  return MultiForm<C>(std::move(ps));
}

template <class C>
Endo<C> mode_of(const EndoField<C>& a, const Freq& k) {
  return a.map([&](const TrigPoly<C>& p) { return p.at(k); });
}

template <class C>
std::vector<Freq> support(const EndoField<C>& a) {
  std::map<Freq, int> s;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j)
      for (const auto& [k, v] : a(i, j).modes()) s[k] = 1;
  std::vector<Freq> out;
  for (const auto& [k, v] : s) out.push_back(k);
  return out;
}

/// Add c e^{i<k,x>} * coefficient form.
template <class C>
void add_mode(TrigMulti<C>& f, const Freq& k, const MultiForm<C>& coeff) {
  for (std::size_t p = 0; p < coeff.size(); ++p)
    for (const auto& [m, c] : coeff[p].terms()) f[p].add(m, TrigPoly<C>::mode(k, c));
}
template <class C>
void add_mode(EndoField<C>& a, const Freq& k, const Endo<C>& coeff) {
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j)
      if (!calib::is_zero(coeff(i, j))) a(i, j) += TrigPoly<C>::mode(k, coeff(i, j));
}

// ------------------------------------------------------------ JSON

inline json to_json(const TrigMulti<Complexd>& f) {
  json modes = json::array();
  for (const Freq& k : support(f))
    modes.push_back({{"freq", k.to_vector(f.dim())}, {"coeff", to_json(mode_of(f, k))}});
  return {{"torus_dim", f.dim()}, {"degrees", f.degrees()}, {"modes", modes}};
}

inline TrigMulti<Complexd> trigform_from_json(const json& j, double reality_tol = 1e-12) {
  int n = j.at("torus_dim").get<int>();
  if (n <= 0 || n > kMaxTorusDim) throw std::invalid_argument("trigform json: bad torus_dim");
  auto degrees = j.at("degrees").get<std::vector<int>>();
  TrigMulti<Complexd> f(n, degrees);
  for (const auto& mj : j.at("modes")) {
    auto fv = mj.at("freq").get<std::vector<int>>();
    if (static_cast<int>(fv.size()) != n) throw std::invalid_argument("trigform json: freq length");
    auto coeff = multiform_from_json(mj.at("coeff"));
    if (coeff.dim() != n || coeff.degrees() != degrees) throw std::invalid_argument("trigform json: coefficient shape");
    add_mode(f, Freq(fv), coeff);
  }
  if (reality_defect(f) > reality_tol) throw std::invalid_argument("trigform json: reality constraint violated");
  return f;
}

inline json to_json(const EndoField<Complexd>& a) {
  json modes = json::array();
  for (const Freq& k : support(a)) {
    Endo<Complexd> e = mode_of(a, k);
    json re = json::array(), im = json::array();
    for (int i = 0; i < a.dim(); ++i) {
      json r = json::array(), s = json::array();
      for (int q = 0; q < a.dim(); ++q) {
        r.push_back(e(i, q).real());
        s.push_back(e(i, q).imag());
      }
      re.push_back(r);
      im.push_back(s);
    }
    modes.push_back({{"freq", k.to_vector(a.dim())}, {"matrix", {{"re", re}, {"im", im}}}});
  }
  return {{"torus_dim", a.dim()}, {"modes", modes}};
}

inline EndoField<Complexd> endofield_from_json(const json& j, double reality_tol = 1e-12) {
  int n = j.at("torus_dim").get<int>();
  if (n <= 0 || n > kMaxTorusDim) throw std::invalid_argument("endofield json: bad torus_dim");
  EndoField<Complexd> a(n);
  for (const auto& mj : j.at("modes")) {
    auto fv = mj.at("freq").get<std::vector<int>>();
    if (static_cast<int>(fv.size()) != n) throw std::invalid_argument("endofield json: freq length");
    const auto& mat = mj.at("matrix");
    Endo<Complexd> e(n);
    // either {"re":[[..]],"im":[[..]]} or a plain real matrix
    const json& re = mat.is_object() ? mat.at("re") : mat;
    for (int i = 0; i < n; ++i)
      for (int q = 0; q < n; ++q) {
        double r = re.at(i).at(q).get<double>();
        double s = (mat.is_object() && mat.contains("im")) ? mat.at("im").at(i).at(q).get<double>() : 0.0;
        e(i, q) = Complexd(r, s);
      }
    add_mode(a, Freq(fv), e);
  }
  if (reality_defect(a) > reality_tol) throw std::invalid_argument("endofield json: reality constraint violated");
  return a;
}

}  // namespace calib
