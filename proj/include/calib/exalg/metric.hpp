#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "calib/exalg/endo.hpp"
#include "calib/linalg.hpp"

namespace calib {

/// Positive-definite inner product on V, given by its Gram matrix in the
/// standard basis.
class Metric {
 public:
  Metric() = default;
  explicit Metric(Eigen::MatrixXd gram) : g_(std::move(gram)) {
    if (g_.rows() != g_.cols() || g_.rows() == 0) throw std::invalid_argument("metric: gram must be square");
    if ((g_ - g_.transpose()).cwiseAbs().maxCoeff() != 0.0) throw std::invalid_argument("metric: gram not symmetric");
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g_);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || (ldlt.vectorD().array() <= 0).any())
      throw std::invalid_argument("metric: gram not positive definite");
  }
  static Metric euclidean(int n) { return Metric(Eigen::MatrixXd::Identity(n, n)); }

  int dim() const { return static_cast<int>(g_.rows()); }
  const Eigen::MatrixXd& gram() const { return g_; }
  bool is_euclidean() const { return g_.isIdentity(0.0); }

 private:
  Eigen::MatrixXd g_;
};

/// Sign of dx^I ^ dx^{I^c} against the standard volume form.
inline int complement_sign(Mask m, int n) {
  Mask full = (n >= 32) ? ~Mask{0} : ((Mask{1} << n) - 1);
  return wedge_sign(m, full & ~m);
}

/// Exact Hodge star for the standard Euclidean metric.
template <class S>
Form<S> euclidean_star(const Form<S>& a, int orientation = 1) {
  const int n = a.dim();
  Mask full = (Mask{1} << n) - 1;
  Form<S> r(n, n - a.degree());
  for (const auto& [m, c] : a.terms()) r.add(full & ~m, signed_copy<S>(c, complement_sign(m, n) * orientation));
  return r;
}

/// Hodge star for an arbitrary metric: raise indices through the minors of
/// g^{-1}, then apply the Euclidean complement with a sqrt(det g) factor.
inline Form<double> hodge_star(const Metric& g, const Form<double>& a, int orientation = 1) {
  const int n = a.dim();
  if (g.dim() != n) throw std::invalid_argument("hodge_star: dimension mismatch");
  if (orientation != 1 && orientation != -1) throw std::invalid_argument("hodge_star: orientation must be +-1");
  if (g.is_euclidean()) return euclidean_star(a, orientation);
  const Eigen::MatrixXd ginv = g.gram().inverse();
  const double vol = std::sqrt(g.gram().determinant());
  const int p = a.degree();
  Form<double> raised(n, p);
  auto masks = masks_of_degree(n, p);
  for (Mask out : masks) {
    auto oi = mask_indices(out);
    double s = 0;
    for (const auto& [m, c] : a.terms()) {
      auto mi = mask_indices(m);
      Eigen::MatrixXd sub(p, p);
      for (int x = 0; x < p; ++x)
        for (int y = 0; y < p; ++y) sub(x, y) = ginv(oi[x], mi[y]);
      s += (p == 0 ? 1.0 : sub.determinant()) * c;
    }
    if (s != 0.0) raised.add(out, s);
  }
  return (vol * orientation) * euclidean_star(raised, 1);
}

template <class S>
MultiForm<S> euclidean_star(const MultiForm<S>& a, int orientation = 1) {
  std::vector<Form<S>> ps;
  for (const auto& p : a.parts()) ps.push_back(euclidean_star(p, orientation));
  return MultiForm<S>(std::move(ps));
}

/// Induced inner product on p-forms (Euclidean case is the coefficient dot product).
inline double form_inner(const Metric& g, const Form<double>& a, const Form<double>& b) {
  if (a.degree() != b.degree()) return 0.0;
  Form<double> w = wedge(a, hodge_star(g, b));
  double vol = std::sqrt(g.gram().determinant());
  Mask full = (Mask{1} << a.dim()) - 1;
  return w.coeff(full) / vol;
}

/// Contraction with the bivector dual to a nondegenerate 2-form omega:
/// Lambda a = 1/2 sum_{a,b} pi^{ab} i_{e_b} i_{e_a} a, pi = W^{-1}, W(a,b) = omega(e_a,e_b).
inline Form<double> lefschetz_lambda(const Form<double>& omega, const Form<double>& a) {
  const int n = omega.dim();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [m, c] : omega.terms()) {
    auto ij = mask_indices(m);
    w(ij[0], ij[1]) = c;
    w(ij[1], ij[0]) = -c;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(w);
  if (n % 2 != 0 || !lu.isInvertible()) throw std::invalid_argument("lefschetz: degenerate 2-form");
  Eigen::MatrixXd pi = lu.inverse();
  Form<double> r(n, std::max(0, a.degree() - 2));
  if (a.degree() < 2) return r;
  for (int x = 0; x < n; ++x) {
    Form<double> ia = interior(x, a);
    for (int y = 0; y < n; ++y)
      if (x != y && pi(x, y) != 0.0) r += (0.5 * pi(x, y)) * interior(y, ia);
  }
  return r;
}

/// Write a = sum_j omega^j ^ prim_j with every prim_j primitive (Lambda prim_j = 0).
/// Entry j of the result has degree deg(a) - 2j.
inline std::vector<Form<double>> lefschetz_decompose(const Form<double>& omega, const Form<double>& a) {
  const int n = omega.dim();
  if (omega.degree() != 2 || a.dim() != n) throw std::invalid_argument("lefschetz: bad input");
  const int p = a.degree();
  const Layout out_layout(n, {p});
  // columns: omega^j ^ (primitive basis of degree p-2j)
  std::vector<Eigen::MatrixXd> prim_bases;
  std::vector<Eigen::MatrixXd> lifted;
  int total = 0;
  Form<double> wj = Form<double>::scalar(n, 1.0);
  for (int j = 0; 2 * j <= p; ++j) {
    int q = p - 2 * j;
    Layout lq(n, {q}), lq2(n, {std::max(0, q - 2)});
    Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(lq2.size(), lq.size());
    Eigen::MatrixXd lift = Eigen::MatrixXd::Zero(out_layout.size(), lq.size());
    for (int k = 0; k < lq.size(); ++k) {
      Form<double> e(n, q);
      e.add(lq.index(0).mask(k), 1.0);
      if (q >= 2) lam.col(k) = lq2.to_eigen(MultiForm<double>{lefschetz_lambda(omega, e)});
      lift.col(k) = out_layout.to_eigen(MultiForm<double>{wedge(wj, e)});
    }
    Eigen::MatrixXd basis = q >= 2 ? orthonormal_nullspace(lam) : Eigen::MatrixXd::Identity(lq.size(), lq.size());
    prim_bases.push_back(basis);
    lifted.push_back(lift * basis);
    total += static_cast<int>(basis.cols());
    wj = wedge(wj, omega);
  }
  Eigen::MatrixXd big(out_layout.size(), total);
  int col = 0;
  for (const auto& l : lifted) {
    big.middleCols(col, l.cols()) = l;
    col += static_cast<int>(l.cols());
  }
  Eigen::VectorXd rhs = out_layout.to_eigen(MultiForm<double>{a});
  Eigen::VectorXd x = big.completeOrthogonalDecomposition().solve(rhs);
  if ((big * x - rhs).norm() > 1e-9 * std::max(1.0, rhs.norm()))
    throw std::runtime_error("lefschetz: decomposition failed to reconstruct input");
  std::vector<Form<double>> out;
  col = 0;
  for (std::size_t j = 0; j < prim_bases.size(); ++j) {
    int q = p - 2 * static_cast<int>(j);
    Layout lq(n, {q});
    Eigen::VectorXd c = prim_bases[j] * x.segment(col, prim_bases[j].cols());
    col += static_cast<int>(prim_bases[j].cols());
    out.push_back(lq.from_eigen(c, 1e-14)[0]);
  }
  return out;
}

}  // namespace calib
