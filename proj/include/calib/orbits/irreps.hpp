#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "calib/orbits/analysis.hpp"

namespace calib {

/// Matrix of rho_hat(xi) on Lambda^p in the lexicographic basis.
inline Eigen::MatrixXd action_matrix(const Endo<double>& xi, int p) {
  const int n = xi.dim();
  MaskIndex idx(n, p);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(idx.size(), idx.size());
  for (int c = 0; c < idx.size(); ++c) {
    Form<double> b(n, p);
    b.add(idx.mask(c), 1.0);
    Form<double> img = rho_hat(xi, b);
    for (const auto& [m, v] : img.terms()) R(idx.position(m), c) = v;
  }
  return R;
}

inline Eigen::VectorXd form_to_eigen(const Form<double>& a) {
  MaskIndex idx(a.dim(), a.degree());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(idx.size());
  for (const auto& [m, c] : a.terms()) v[idx.position(m)] = c;
  return v;
}

inline Form<double> form_from_eigen(int n, int p, const Eigen::VectorXd& v, double drop = 0.0) {
  MaskIndex idx(n, p);
  if (v.size() != idx.size()) throw std::invalid_argument("form_from_eigen: size mismatch");
  Form<double> a(n, p);
  for (int k = 0; k < idx.size(); ++k)
    if (std::abs(v[k]) > drop) a.add(idx.mask(k), v[k]);
  return a;
}

struct IrrepProjector {
  std::string label;     // "<p>_<dim>", e.g. "3_27"
  int dim = 0;
  double casimir = 0;    // eigenvalue of sum R_a^T R_a
  Eigen::MatrixXd P;     // orthogonal projector on Lambda^p
  Eigen::MatrixXd basis; // orthonormal columns
  int commutant_dim = -1;  // -1: not computed (block too large)
};

struct IrrepDecomposition {
  int degree = 0;
  std::vector<IrrepProjector> parts;
  bool multiplicity_free = true;  // every eigenspace has a 1-dim commutant
  const IrrepProjector& by_dim(int d) const {
    const IrrepProjector* hit = nullptr;
    for (const auto& p : parts)
      if (p.dim == d) {
        if (hit) throw std::runtime_error("irreps: dimension label is ambiguous");
        hit = &p;
      }
    if (!hit) throw std::out_of_range("irreps: no component of dimension " + std::to_string(d));
    return *hit;
  }
  std::vector<int> dims() const {
    std::vector<int> d;
    for (const auto& p : parts) d.push_back(p.dim);
    return d;
  }
};

inline constexpr int kCommutantMaxDim = 36;

/// Isotypic projectors of Lambda^p under h, from the eigenspaces of the Casimir.
/// Components are ordered by increasing dimension, ties by Casimir eigenvalue.
inline IrrepDecomposition irrep_projectors(const CalibrationSpec& s, const IsotropyAlgebra& h, int p) {
  if (!s.gV.is_euclidean()) throw std::invalid_argument("irrep_projectors: Euclidean reference metric required");
  MetricalVerdict mv = check_metrical(s, h);
  if (!mv.metrical) throw std::invalid_argument("irrep_projectors: spec is not metrical");
  const int n = s.dim;
  const int N = static_cast<int>(binomial(n, p));
  std::vector<Eigen::MatrixXd> R;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(N, N);
  for (const auto& xi : h.basis) {
    R.push_back(action_matrix(xi, p));
    C += R.back().transpose() * R.back();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  const auto& ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  IrrepDecomposition out;
  out.degree = p;
  int start = 0;
  while (start < N) {
    int end = start + 1;
    while (end < N && std::abs(ev[end] - ev[start]) <= 1e-8 * scale) ++end;
    IrrepProjector ip;
    ip.dim = end - start;
    ip.casimir = ev.segment(start, ip.dim).mean();
    ip.basis = es.eigenvectors().middleCols(start, ip.dim);
    ip.P = ip.basis * ip.basis.transpose();
    ip.label = std::to_string(p) + "_" + std::to_string(ip.dim);
    if (ip.dim <= kCommutantMaxDim) {
      // commutant of the restricted action: X with [R_a|, X] = 0 for all a
      const int d = ip.dim;
      // K = sum_a A_a^T A_a with A_a = I (x) r - r^T (x) I, expanded blockwise
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(d * d, d * d);
      Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
      Eigen::MatrixXd rtr = Eigen::MatrixXd::Zero(d, d), rrt = Eigen::MatrixXd::Zero(d, d);
      for (const auto& r : R) {
        Eigen::MatrixXd rr = ip.basis.transpose() * r * ip.basis;
        rtr += rr.transpose() * rr;
        rrt += rr * rr.transpose();
        K -= Eigen::kroneckerProduct(rr.transpose(), rr.transpose());
        K -= Eigen::kroneckerProduct(rr, rr);
      }
      K += Eigen::kroneckerProduct(I, rtr);
      K += Eigen::kroneckerProduct(rrt, I);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ks(K, Eigen::EigenvaluesOnly);
      const double kscale = std::max(1.0, ks.eigenvalues().cwiseAbs().maxCoeff());
      ip.commutant_dim = 0;
      for (int i = 0; i < ks.eigenvalues().size(); ++i)
        if (std::abs(ks.eigenvalues()[i]) <= 1e-9 * kscale) ++ip.commutant_dim;
      if (ip.commutant_dim != 1) out.multiplicity_free = false;
    }
    out.parts.push_back(std::move(ip));
    start = end;
  }
  std::stable_sort(out.parts.begin(), out.parts.end(), [](const IrrepProjector& a, const IrrepProjector& b) {
    return a.dim != b.dim ? a.dim < b.dim : a.casimir < b.casimir;
  });
  return out;
}

inline Form<double> project(const IrrepProjector& ip, const Form<double>& a) {
  return form_from_eigen(a.dim(), a.degree(), ip.P * form_to_eigen(a));
}

// ------------------------------------------------------------- hyperKahler

struct ComplexStructures {
  Eigen::MatrixXd I, J, K, G;
};

/// Recover (I, J, K, g) from omega_X(u, v) = g(Xu, v) for the triple (omega_I, omega_J, omega_K).
inline ComplexStructures hk_structures(const MultiForm<double>& triple) {
  if (triple.size() != 3 || triple.degrees() != std::vector<int>{2, 2, 2})
    throw std::invalid_argument("hk: expected three 2-forms");
  const int n = triple.dim();
  auto W = [&](int c) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [m, v] : triple[c].terms()) {
      auto ij = mask_indices(m);
      w(ij[0], ij[1]) = v;
      w(ij[1], ij[0]) = -v;
    }
    return w;
  };
  Eigen::MatrixXd WI = W(0), WJ = W(1), WK = W(2);
  ComplexStructures cs;
  cs.I = -WJ.fullPivLu().solve(WK);
  cs.J = -WK.fullPivLu().solve(WI);
  cs.K = -WI.fullPivLu().solve(WJ);
  cs.G = -cs.I.transpose() * WI;
  return cs;
}

/// Lambda^2_HK = 2-forms of type (1,1) for I, J and K at once: beta(Xu, Xv) = beta(u, v).
inline Eigen::MatrixXd lambda2_hk(const CalibrationSpec& s) {
  if (s.kind != Kind::hk) throw std::invalid_argument("lambda2_hk: hk spec required");
  ComplexStructures cs = hk_structures(s.phi0);
  const int n = s.dim;
  MaskIndex idx(n, 2);
  const int N = idx.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3 * N, N);
  for (int c = 0; c < N; ++c) {
    auto ab = mask_indices(idx.mask(c));
    int a = ab[0], b = ab[1];
    for (int x = 0; x < 3; ++x) {
      const Eigen::MatrixXd& X = x == 0 ? cs.I : (x == 1 ? cs.J : cs.K);
      // beta = dx^a ^ dx^b; (X^* beta)(e_i, e_j) = beta(X e_i, X e_j)
      for (int r = 0; r < N; ++r) {
        auto ij = mask_indices(idx.mask(r));
        int i = ij[0], j = ij[1];
        double pulled = X(a, i) * X(b, j) - X(b, i) * X(a, j);
        double orig = (i == a && j == b) ? 1.0 : 0.0;
        A(x * N + r, c) = pulled - orig;
      }
    }
  }
  return orthonormal_nullspace(A);
}

/// The same space read off the complex: { alpha : (alpha, 0, 0) in E^1 }, exact.
inline int lambda2_hk_dim_from_e1(const CalibrationSpec& s, const EkSpace& e1) {
  if (s.kind != Kind::hk || !e1.exact) throw std::invalid_argument("lambda2_hk_dim_from_e1: exact hk E^1 required");
  const int N = e1.layout.index(0).size();
  const QMatrix& B = *e1.exact;
  QMatrix lower(B.rows() - N, B.cols());
  for (int r = N; r < B.rows(); ++r)
    for (int c = 0; c < B.cols(); ++c) lower(r - N, c) = B(r, c);
  return B.cols() - rank(lower);
}

// ------------------------------------------------------------- G2

struct G2Operators {
  CalibrationSpec spec;
  IsotropyAlgebra h;
  IrrepDecomposition l2, l3;
};

inline G2Operators g2_operators(const CalibrationSpec& s) {
  if (s.kind != Kind::g2) throw std::invalid_argument("g2 operators need a g2 spec");
  G2Operators g;
  g.spec = s;
  g.h = isotropy_algebra(s);
  g.l2 = irrep_projectors(s, g.h, 2);
  g.l3 = irrep_projectors(s, g.h, 3);
  return g;
}

/// J(a) = (4/3) * pi_1 a + * pi_7 a - * pi_27 a
inline Form<double> g2_J(const G2Operators& g, const Form<double>& a) {
  if (a.dim() != 7 || a.degree() != 3) throw std::invalid_argument("g2_J: 3-form on R^7 required");
  Form<double> r = (4.0 / 3.0) * euclidean_star(project(g.l3.by_dim(1), a));
  r += euclidean_star(project(g.l3.by_dim(7), a));
  r -= euclidean_star(project(g.l3.by_dim(27), a));
  return r;
}

struct Lemma64Result {
  Form<double> gamma;
  double outer_residual = 0;    // |u ^ J(u ^ eta) + 2|u|^2 *gamma|
  double middle_ratio = 0;      // |u ^ J(u ^ gamma)| / |u ^ J(u ^ eta)| (0 when the latter vanishes)
  double middle_residual = 0;   // |u ^ J(u ^ eta) - u ^ J(u ^ gamma)|
  double membership_residual = 0;  // |gamma - pi_14 gamma|
  double contraction_residual = 0; // |i_v gamma|
};

/// gamma = i_v(u ^ eta_hat) / (2|u|^2), where u ^ eta_hat is the part of u ^ eta
/// orthogonal to u ^ Lambda^2_7.
inline Lemma64Result lemma_6_4_solve(const G2Operators& g, const std::vector<double>& u, const Form<double>& eta) {
  if (u.size() != 7 || eta.dim() != 7 || eta.degree() != 2) throw std::invalid_argument("lemma_6_4: u in R^7 and a 2-form required");
  double u2 = 0;
  for (double x : u) u2 += x * x;
  if (u2 == 0) throw std::invalid_argument("lemma_6_4: u must be nonzero");
  Form<double> uf = one_form(u);
  Form<double> ueta = wedge(uf, eta);

  const IrrepProjector& p7 = g.l2.by_dim(7);
  Eigen::MatrixXd span(35, p7.dim);
  for (int c = 0; c < p7.dim; ++c) span.col(c) = form_to_eigen(wedge(uf, form_from_eigen(7, 2, p7.basis.col(c))));
  Eigen::MatrixXd Q = orthonormal_colspace(span);
  Eigen::VectorXd b = form_to_eigen(ueta);
  Eigen::VectorXd bperp = b - Q * (Q.transpose() * b);

  Lemma64Result r;
  r.gamma = (1.0 / (2.0 * u2)) * interior(u, form_from_eigen(7, 3, bperp));

  Form<double> lhs = wedge(uf, g2_J(g, ueta));
  Form<double> mid = wedge(uf, g2_J(g, wedge(uf, r.gamma)));
  Form<double> rhs = (-2.0 * u2) * euclidean_star(r.gamma);
  r.outer_residual = std::sqrt((lhs - rhs).norm2());
  r.middle_residual = std::sqrt((lhs - mid).norm2());
  r.middle_ratio = lhs.norm2() > 0 ? std::sqrt(mid.norm2() / lhs.norm2()) : 0.0;
  r.membership_residual = std::sqrt((r.gamma - project(g.l2.by_dim(14), r.gamma)).norm2());
  r.contraction_residual = std::sqrt(interior(u, r.gamma).norm2());
  return r;
}

// ------------------------------------------------------------- metrics

/// Metric of rho_g(Phi0) = g^* Phi0: the pullback g^T g_V g.
inline Metric metric_from_group(const CalibrationSpec& s, const Endo<double>& g) {
  Eigen::MatrixXd m = to_eigen(g);
  Eigen::MatrixXd G = m.transpose() * s.gV.gram() * m;
  return Metric(0.5 * (G + G.transpose()));
}

/// B(u,v) vol = (1/6) i_u phi ^ i_v phi ^ phi, normalized so that vol_g = vol:
/// g = B / |det B|^{1/9}.
inline Metric g2_intrinsic_metric(const Form<double>& phi) {
  if (phi.dim() != 7 || phi.degree() != 3) throw std::invalid_argument("g2 metric: 3-form on R^7 required");
  Eigen::MatrixXd B(7, 7);
  for (int i = 0; i < 7; ++i)
    for (int j = i; j < 7; ++j) {
      Form<double> top = wedge(wedge(interior(i, phi), interior(j, phi)), phi);
      B(i, j) = B(j, i) = top.coeff(mask_from_indices({0, 1, 2, 3, 4, 5, 6}, 7)) / 6.0;
    }
  double det = B.determinant();
  if (det == 0) throw std::invalid_argument("g2 metric: degenerate 3-form");
  Eigen::MatrixXd G = B / (std::copysign(1.0, det) * std::pow(std::abs(det), 1.0 / 9.0));
  return Metric(0.5 * (G + G.transpose()));
}

}  // namespace calib
