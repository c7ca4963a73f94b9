#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "calib/orbits/irreps.hpp"

namespace calib {

struct Check {
  std::string name;
  double residual = 0;
  bool pass = false;
};

struct Diagnostics {
  Kind kind = Kind::symplectic;
  std::vector<Check> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  const Check& at(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw std::out_of_range("no check named " + name);
  }
};

inline constexpr double kStructureTol = 1e-9;

// ------------------------------------------------------------- orbit membership

struct OrbitFit {
  bool certified = false;
  Endo<double> g;       // P_g phi ~ target
  double residual = 0;  // |P_g phi - target|
  int start = -1;       // which start succeeded
  int iterations = 0;
};

/// Gauss-Newton on g -> |g^* phi - target|^2 with right-multiplicative updates
/// g <- g exp(eta), multi-start from the identity and 7 random nearby points.
inline OrbitFit fit_to_orbit(const MultiForm<double>& phi, const MultiForm<double>& target, int starts = 8,
                             std::uint64_t seed = 0x5eed, int max_iter = 100) {
  if (phi.dim() != target.dim() || phi.degrees() != target.degrees()) throw std::invalid_argument("fit_to_orbit: degree mismatch");
  const int n = phi.dim();
  Layout L(n, phi.degrees());
  const double tol = 1e-11 * (1.0 + std::sqrt(target.norm2()));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 0.3);
  OrbitFit best;
  best.residual = std::numeric_limits<double>::infinity();
  for (int s = 0; s < starts; ++s) {
    Endo<double> g = Endo<double>::identity(n);
    if (s > 0) {
      Endo<double> xi(n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) xi(i, j) = nd(rng);
      g = endo_exp(xi);
    }
    auto resid = [&](const Endo<double>& gg) { return L.to_eigen(pullback(gg, phi) - target); };
    Eigen::VectorXd r = resid(g);
    int it = 0;
    for (; it < max_iter && r.norm() > tol; ++it) {
      Eigen::MatrixXd Jm = rho_matrix(pullback(g, phi));
      Eigen::VectorXd eta = Jm.completeOrthogonalDecomposition().solve(-r);
      double step = 1.0;
      bool moved = false;
      for (int bt = 0; bt < 30; ++bt, step *= 0.5) {
        Endo<double> trial = g * endo_exp(endo_from_column<double>(n, step * eta));
        Eigen::VectorXd rt = resid(trial);
        if (rt.norm() < r.norm()) {
          g = trial;
          r = rt;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (r.norm() < best.residual) {
      best.g = g;
      best.residual = r.norm();
      best.start = s;
      best.iterations = it;
    }
    if (r.norm() <= tol) {
      best.certified = true;
      break;
    }
  }
  return best;
}

// ------------------------------------------------------------- per-kind checks

namespace detail {

inline Eigen::MatrixXd two_form_matrix(const Form<double>& w) {
  const int n = w.dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [mask, v] : w.terms()) {
    auto ij = mask_indices(mask);
    m(ij[0], ij[1]) = v;
    m(ij[1], ij[0]) = -v;
  }
  return m;
}

inline Form<Complexd> complex_form(const Form<double>& re, const Form<double>& im) {
  auto lift = [](const Form<double>& f) { return f.map([](double c) { return Complexd(c, 0.0); }); };
  return lift(re) + Complexd(0.0, 1.0) * lift(im);
}

inline double cnorm(const Form<Complexd>& f) { return std::sqrt(f.norm2()); }

/// Columns: i_{e_j} Omega as complex vectors in Lambda^{p-1}.
inline Eigen::MatrixXcd contraction_matrix(const Form<Complexd>& om) {
  const int n = om.dim();
  MaskIndex idx(n, om.degree() - 1);
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(idx.size(), n);
  for (int j = 0; j < n; ++j) {
    Form<Complexd> ij = interior(j, om);
    for (const auto& [m, c] : ij.terms()) M(idx.position(m), j) = c;
  }
  return M;
}

inline Eigen::MatrixXcd complex_kernel(const Eigen::MatrixXcd& M, double rel = 1e-10) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > rel * std::max(1.0, s[0])) ++r;
  return svd.matrixV().rightCols(M.cols() - r);
}

inline int complex_rank(const Eigen::MatrixXcd& M, double rel = 1e-10) {
  if (M.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  const auto& s = svd.singularValues();
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > rel * std::max(1.0, s[0])) ++r;
  return r;
}

inline void add(Diagnostics& d, std::string name, double residual, bool pass) {
  d.checks.push_back({std::move(name), residual, pass});
}

}  // namespace detail

/// Complex structure I_Omega: -i on Ker Omega (type (0,1)), +i on its conjugate.
inline Eigen::MatrixXd complex_structure_of(const Form<Complexd>& om) {
  const int n = om.dim();
  Eigen::MatrixXcd K = detail::complex_kernel(detail::contraction_matrix(om));
  if (2 * K.cols() != n) throw std::invalid_argument("complex structure: kernel of Omega has wrong dimension");
  Eigen::MatrixXcd B(n, n);
  B << K, K.conjugate();
  Eigen::VectorXcd D(n);
  for (int i = 0; i < n / 2; ++i) {
    D[i] = Complexd(0, -1);
    D[n / 2 + i] = Complexd(0, 1);
  }
  Eigen::MatrixXcd Ic = B * D.asDiagonal() * B.inverse();
  if (Ic.imag().norm() > 1e-8 * (1.0 + Ic.norm())) throw std::runtime_error("complex structure: not real");
  return Ic.real();
}

/// Metric g(u, v) = omega(u, I_Omega v). With the model conventions this is the
/// positive one; omega(I u, v) is its negative.
inline Eigen::MatrixXd cy_metric_matrix(const Form<double>& omega, const Eigen::MatrixXd& I) {
  return detail::two_form_matrix(omega) * I;
}

inline Diagnostics validate_structure(const CalibrationSpec& spec, const MultiForm<double>& phi) {
  if (phi.dim() != spec.dim || phi.degrees() != spec.degrees)
    throw std::invalid_argument("validate_structure: degrees do not match " + spec.name());
  Diagnostics d;
  d.kind = spec.kind;
  const int n = spec.dim;
  const double tol = kStructureTol * (1.0 + std::sqrt(phi.norm2()));
  switch (spec.kind) {
    case Kind::symplectic: {
      Eigen::MatrixXd W = detail::two_form_matrix(phi[0]);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
      double smin = svd.singularValues().minCoeff();
      detail::add(d, "nondegenerate", smin, smin > tol);
      break;
    }
    case Kind::degenerate2form: {
      Eigen::MatrixXd W = detail::two_form_matrix(phi[0]);
      int r = numeric_rank(W, 1e-10);
      detail::add(d, "rank_two", std::abs(r - 2), r == 2);
      detail::add(d, "degenerate", r < n ? 0.0 : 1.0, r < n);
      break;
    }
    case Kind::sl:
    case Kind::cy: {
      const int m = n / 2;
      Form<Complexd> om = detail::complex_form(phi[0], phi[1]);
      Eigen::MatrixXcd K = detail::complex_kernel(detail::contraction_matrix(om));
      detail::add(d, "kernel_dim", std::abs(static_cast<double>(K.cols() - m)), K.cols() == m);
      Eigen::MatrixXcd KK(n, 2 * K.cols());
      KK << K, K.conjugate();
      int r = detail::complex_rank(KK);
      detail::add(d, "ker_cap_conj_ker_zero", static_cast<double>(2 * K.cols() - r), K.cols() == m && r == n);
      if (spec.kind == Kind::sl) break;

      Form<Complexd> w = phi[2].map([](double c) { return Complexd(c, 0.0); });
      Form<Complexd> omb = om.map([](const Complexd& c) { return std::conj(c); });
      double r1 = detail::cnorm(wedge(om, w)), r2 = detail::cnorm(wedge(omb, w));
      detail::add(d, "omega_wedge_kahler", r1, r1 <= tol);
      detail::add(d, "omegabar_wedge_kahler", r2, r2 <= tol);
      Form<Complexd> wn = Form<Complexd>::scalar(n, Complexd(1.0, 0.0));
      for (int k = 0; k < m; ++k) wn = wedge(wn, w);
      ComplexQ cq = model::monge_ampere_constant(m);
      Complexd cn(cq.re.get_d(), cq.im.get_d());
      double r3 = detail::cnorm(wedge(om, omb) - cn * wn);
      detail::add(d, "monge_ampere", r3, r3 <= tol * (1.0 + detail::cnorm(wn)));
      bool ok = K.cols() == m && r == n;
      double minev = -1;
      if (ok) {
        Eigen::MatrixXd G = cy_metric_matrix(phi[2], complex_structure_of(om));
        double asym = (G - G.transpose()).norm();
        minev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (G + G.transpose())).eigenvalues().minCoeff();
        detail::add(d, "metric_symmetric", asym, asym <= tol);
      }
      detail::add(d, "metric_positive", minev, minev > tol);
      break;
    }
    case Kind::hk: {
      ComplexStructures cs;
      try {
        cs = hk_structures(phi);
      } catch (const std::exception&) {
        detail::add(d, "nondegenerate", 1.0, false);
        break;
      }
      Eigen::MatrixXd Id = Eigen::MatrixXd::Identity(n, n);
      double q = (cs.I * cs.I + Id).norm() + (cs.J * cs.J + Id).norm() + (cs.K * cs.K + Id).norm() +
                 (cs.I * cs.J * cs.K + Id).norm();
      detail::add(d, "quaternion_relations", q, q <= tol);
      double asym = (cs.G - cs.G.transpose()).norm();
      double compat = 0;
      for (int x = 0; x < 3; ++x) {
        const Eigen::MatrixXd& X = x == 0 ? cs.I : (x == 1 ? cs.J : cs.K);
        compat += (detail::two_form_matrix(phi[x]) - X.transpose() * cs.G).norm();
        compat += (X.transpose() * cs.G * X - cs.G).norm();
      }
      detail::add(d, "compatibility", compat + asym, compat + asym <= tol);
      double minev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (cs.G + cs.G.transpose())).eigenvalues().minCoeff();
      detail::add(d, "metric_positive", minev, minev > tol);
      break;
    }
    case Kind::g2:
    case Kind::spin7: {
      OrbitFit fit = fit_to_orbit(phi, spec.phi0);
      detail::add(d, "orbit_membership", fit.residual, fit.certified);
      int expect = spec.kind == Kind::g2 ? 14 : 21;
      int stab = n * n - numeric_rank(rho_matrix(phi), 1e-10);
      detail::add(d, "stabilizer_dim", std::abs(stab - expect), stab == expect);
      break;
    }
  }
  return d;
}

inline Diagnostics validate_structure(const CalibrationSpec& spec) { return validate_structure(spec, spec.phi0); }

/// Omega ^ conj(Omega) == c_n omega^n in exact rational arithmetic (cy model).
inline bool monge_ampere_exact(const CalibrationSpec& s) {
  if (s.kind != Kind::cy || !s.exact()) throw std::invalid_argument("monge_ampere_exact: exact cy spec required");
  const auto& p = *s.phi0_exact;
  const int m = s.dim / 2;
  Form<ComplexQ> om = model::combine(p[0], p[1]);
  Form<ComplexQ> omb = model::combine(p[0], -p[1]);
  Form<ComplexQ> w = model::complexify(p[2]);
  Form<ComplexQ> wn = Form<ComplexQ>::scalar(s.dim, ComplexQ(Rational(1)));
  for (int k = 0; k < m; ++k) wn = wedge(wn, w);
  return wedge(om, omb) == model::monge_ampere_constant(m) * wn;
}

/// Canonical metric of phi in the orbit: find h with h^* phi = Phi0, then
/// phi = (h^{-1})^* Phi0 carries (h^{-1})^T g_V h^{-1}.
inline Metric metric_from_calibration(const CalibrationSpec& s, const MultiForm<double>& phi) {
  if (s.kind == Kind::symplectic || s.kind == Kind::sl || s.kind == Kind::degenerate2form)
    throw std::invalid_argument("metric_from_calibration: " + s.name() + " has no canonical metric");
  OrbitFit fit = fit_to_orbit(phi, s.phi0);
  if (!fit.certified) throw std::runtime_error("metric_from_calibration: phi not certified to lie in the orbit");
  Eigen::MatrixXd hinv = to_eigen(fit.g).inverse();
  return metric_from_group(s, from_eigen(hinv));
}

}  // namespace calib
