#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <bit>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "calib/linalg.hpp"
#include "calib/exalg/json.hpp"
#include "calib/orbits/spec.hpp"

namespace calib {

inline Layout target_layout(const CalibrationSpec& s, int k) {
  std::vector<int> degs;
  for (int p : s.degrees) degs.push_back(p + k - 1);
  return Layout(s.dim, degs);
}

/// Column (i*n + j) is rho_hat(e_i (x) theta^j) applied to phi.
template <class S>
std::vector<MultiForm<S>> rho_images(const MultiForm<S>& phi) {
  const int n = phi.dim();
  std::vector<MultiForm<S>> out;
  out.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.push_back(rho_hat(Endo<S>::unit(n, i, j), phi));
  return out;
}

inline Eigen::MatrixXd rho_matrix(const MultiForm<double>& phi) {
  Layout L(phi.dim(), phi.degrees());
  auto imgs = rho_images(phi);
  Eigen::MatrixXd m(L.size(), static_cast<int>(imgs.size()));
  for (std::size_t c = 0; c < imgs.size(); ++c) m.col(static_cast<int>(c)) = L.to_eigen(imgs[c]);
  return m;
}

inline QMatrix rho_matrix(const MultiForm<Rational>& phi) {
  Layout L(phi.dim(), phi.degrees());
  auto imgs = rho_images(phi);
  QMatrix m(L.size(), static_cast<int>(imgs.size()));
  for (std::size_t c = 0; c < imgs.size(); ++c) m.set_col(static_cast<int>(c), L.to_vector(imgs[c]));
  return m;
}

template <class S>
Endo<S> endo_from_column(int n, const Eigen::Ref<const Eigen::VectorXd>& v) {
  Endo<S> e(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) e(i, j) = v[i * n + j];
  return e;
}

inline Eigen::VectorXd endo_to_column(const Endo<double>& e) {
  const int n = e.dim();
  Eigen::VectorXd v(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v[i * n + j] = e(i, j);
  return v;
}

struct IsotropyAlgebra {
  int dim = 0;
  std::vector<Endo<double>> basis;                 // Frobenius-orthonormal
  std::optional<std::vector<Endo<Rational>>> exact;  // nullspace basis over Q when available
};

inline IsotropyAlgebra isotropy_algebra(const CalibrationSpec& s) {
  IsotropyAlgebra h;
  const int n = s.dim;
  if (s.exact()) {
    QMatrix ns = nullspace(rho_matrix(*s.phi0_exact));
    std::vector<Endo<Rational>> ex;
    for (int c = 0; c < ns.cols(); ++c) {
      Endo<Rational> e(n);
      auto col = ns.col(c);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) e(i, j) = col[i * n + j];
      ex.push_back(e);
    }
    h.exact = ex;
    h.dim = ns.cols();
    Eigen::MatrixXd on = orthonormalize(ns);
    for (int c = 0; c < on.cols(); ++c) h.basis.push_back(endo_from_column<double>(n, on.col(c)));
  } else {
    Eigen::MatrixXd on = orthonormal_nullspace(rho_matrix(s.phi0));
    h.dim = static_cast<int>(on.cols());
    for (int c = 0; c < on.cols(); ++c) h.basis.push_back(endo_from_column<double>(n, on.col(c)));
  }
  return h;
}

/// E^k(V) = span{ dx^I ^ i_{e_v} Phi0 : |I| = k } inside the sum of Lambda^{p_i+k-1}.
struct EkSpace {
  int k = 0;
  Layout layout;
  Eigen::MatrixXd basis;           // orthonormal columns (Euclidean coefficient inner product)
  std::optional<QMatrix> exact;    // independent rational columns
  int dim() const { return static_cast<int>(basis.cols()); }
};

template <class S>
std::vector<MultiForm<S>> ek_generators(const MultiForm<S>& phi, int k) {
  const int n = phi.dim();
  std::vector<MultiForm<S>> gens;
  for (Mask I : masks_of_degree(n, k)) {
    Form<S> dxI(n, k);
    dxI.add(I, ScalarTraits<S>::from_int(1));
    for (int v = 0; v < n; ++v) {
      MultiForm<S> iv = interior(v, phi);
      gens.push_back(wedge(dxI, iv));
    }
  }
  return gens;
}

inline EkSpace ek_space(const CalibrationSpec& s, int k) {
  if (k < 0) throw std::invalid_argument("ek_space: k must be >= 0");
  EkSpace e;
  e.k = k;
  e.layout = target_layout(s, k);
  if (s.exact()) {
    auto gens = ek_generators(*s.phi0_exact, k);
    QMatrix m(e.layout.size(), static_cast<int>(gens.size()));
    for (std::size_t c = 0; c < gens.size(); ++c) m.set_col(static_cast<int>(c), e.layout.to_vector(gens[c]));
    e.exact = colspace(m);
    e.basis = orthonormalize(*e.exact);
  } else {
    auto gens = ek_generators(s.phi0, k);
    Eigen::MatrixXd m(e.layout.size(), static_cast<int>(gens.size()));
    for (std::size_t c = 0; c < gens.size(); ++c) m.col(static_cast<int>(c)) = e.layout.to_eigen(gens[c]);
    e.basis = orthonormal_colspace(m);
  }
  // The coefficient inner product is the g_V inner product only for Euclidean g_V.
  if (!s.gV.is_euclidean()) throw std::invalid_argument("ek_space: only Euclidean reference metrics are supported");
  return e;
}

// ------------------------------------------------------------- metrical

struct MetricalVerdict {
  bool metrical = false;
  std::optional<Endo<double>> witness;  // element of h that is not g_V-skew
  bool witness_symmetric = false;
};

inline MetricalVerdict check_metrical(const CalibrationSpec& s, const IsotropyAlgebra& h) {
  MetricalVerdict out;
  const int n = s.dim;
  const Eigen::MatrixXd& G = s.gV.gram();
  double worst = 0;
  if (h.exact && s.gV.is_euclidean()) {
    out.metrical = true;
    for (const auto& xi : *h.exact)
      if (!(xi + xi.transpose()).is_zero()) out.metrical = false;
  } else {
    for (const auto& xi : h.basis) {
      Eigen::MatrixXd X = to_eigen(xi);
      worst = std::max(worst, (G * X + X.transpose() * G).norm());
    }
    out.metrical = worst <= 1e-9;
  }
  if (out.metrical) return out;

  // look for a g_V-symmetric isotropy element: rho_hat xi phi0 = 0 and G xi - (G xi)^T = 0
  Eigen::MatrixXd R = rho_matrix(s.phi0);
  Eigen::MatrixXd A(R.rows() + n * n, n * n);
  A.topRows(R.rows()) = R;
  A.bottomRows(n * n).setZero();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        // (G xi)(i,j) = sum_k G(i,k) xi(k,j)
        A(R.rows() + i * n + j, k * n + j) += G(i, k);
        A(R.rows() + i * n + j, k * n + i) -= G(j, k);
      }
  Eigen::MatrixXd ns = orthonormal_nullspace(A, 1e-10);
  if (ns.cols() > 0) {
    out.witness = endo_from_column<double>(n, ns.col(0));
    out.witness_symmetric = true;
  } else {
    for (const auto& xi : h.basis) {
      Eigen::MatrixXd X = to_eigen(xi);
      if ((G * X + X.transpose() * G).norm() > 1e-9) {
        out.witness = xi;
        break;
      }
    }
  }
  return out;
}

// ------------------------------------------------------------- elliptic

struct CovectorCheck {
  std::vector<double> u;
  int rank_u_e0 = 0, rank_u_e1 = 0, rank_u_e2 = 0;  // rank of (u ^ .) on E^k
  bool exact_at_1 = false, exact_at_2 = false;
};

struct EllipticVerdict {
  bool elliptic = false;
  bool exact_arithmetic = false;
  int trials = 0;
  std::uint64_t seed = 0;
  std::vector<int> ek_dims;  // E^0, E^1, E^2
  std::vector<CovectorCheck> checks;
  std::optional<CovectorCheck> witness;
  int witness_position = 0;  // 1 or 2
  int rank_gap = 0;          // dim ker - dim im at the failing position
};

namespace detail {

inline QMatrix wedge_columns(const Layout& from, const Layout& to, const QMatrix& basis, const std::vector<Rational>& u) {
  Form<Rational> uf = one_form(u);
  QMatrix out(to.size(), basis.cols());
  for (int c = 0; c < basis.cols(); ++c) {
    MultiForm<Rational> a = from.from_vector(basis.col(c));
    out.set_col(c, to.to_vector(wedge(uf, a)));
  }
  return out;
}

inline Eigen::MatrixXd wedge_columns(const Layout& from, const Layout& to, const Eigen::MatrixXd& basis, const std::vector<double>& u) {
  Form<double> uf = one_form(u);
  Eigen::MatrixXd out(to.size(), basis.cols());
  for (int c = 0; c < basis.cols(); ++c) out.col(c) = to.to_eigen(wedge(uf, from.from_eigen(Eigen::VectorXd(basis.col(c)))));
  return out;
}

}  // namespace detail

inline constexpr double kEllipticTol = 1e-9;

/// Exactness of E^0 -> E^1 -> E^2 -> E^3 under u ^ . at positions 1 and 2, for the n
/// coordinate covectors plus `trials` random ones. With exact data the random
/// covectors are small integer vectors and every rank is exact.
inline EllipticVerdict check_elliptic(const CalibrationSpec& s, int trials = 64, std::uint64_t seed = 0) {
  if (trials < 0) throw std::invalid_argument("check_elliptic: trials must be >= 0");
  EllipticVerdict v;
  v.trials = trials;
  v.seed = seed;
  v.exact_arithmetic = s.exact();
  std::vector<EkSpace> E;
  for (int k = 0; k <= 3; ++k) E.push_back(ek_space(s, k));
  for (int k = 0; k <= 2; ++k) v.ek_dims.push_back(E[k].dim());

  const int n = s.dim;
  std::mt19937_64 rng(seed);
  std::vector<std::vector<long>> covectors;
  std::vector<std::vector<double>> structural;
  for (int i = 0; i < n; ++i) {
    std::vector<long> e(n, 0);
    e[i] = 1;
    covectors.push_back(e);
  }
  // covectors i_{e_j} w of the 2-form parts: for degenerate 2-forms these are
  // exactly the directions where exactness breaks, which random draws miss
  if (!s.exact())
    for (const auto& part : s.phi0.parts())
      if (part.degree() == 2)
        for (int j = 0; j < n; ++j) {
          Form<double> c = interior(j, part);
          if (c.is_zero()) continue;
          std::vector<double> u(n, 0.0);
          for (const auto& [m, x] : c.terms()) u[std::countr_zero(m)] = x;
          structural.push_back(u);
        }
  std::uniform_int_distribution<long> pick(-3, 3);
  for (int t = 0; t < trials; ++t) {
    std::vector<long> u(n, 0);
    bool nonzero = false;
    while (!nonzero) {
      for (auto& x : u) {
        x = pick(rng);
        nonzero = nonzero || x != 0;
      }
    }
    covectors.push_back(u);
  }

  v.elliptic = true;
  std::vector<std::vector<double>> all;
  for (const auto& ui : covectors) all.emplace_back(ui.begin(), ui.end());
  all.insert(all.end(), structural.begin(), structural.end());
  for (const auto& ui : all) {
    CovectorCheck c;
    int r[3];
    if (s.exact()) {
      std::vector<Rational> uq;
      for (double x : ui) uq.emplace_back(static_cast<long>(x));
      for (int k = 0; k <= 2; ++k) r[k] = rank(detail::wedge_columns(E[k].layout, E[k + 1].layout, *E[k].exact, uq));
      c.u = ui;
    } else {
      // float data: unit covectors
      std::vector<double> ud = ui;
      double nrm = 0;
      for (double x : ud) nrm += x * x;
      for (double& x : ud) x /= std::sqrt(nrm);
      for (int k = 0; k <= 2; ++k)
        r[k] = numeric_rank(detail::wedge_columns(E[k].layout, E[k + 1].layout, E[k].basis, ud), kEllipticTol);
      c.u = ud;
    }
    c.rank_u_e0 = r[0];
    c.rank_u_e1 = r[1];
    c.rank_u_e2 = r[2];
    // ker(u^ on E^k) has dim E^k - rank; image from E^{k-1} has dim rank_{k-1}
    c.exact_at_1 = (E[1].dim() - r[1]) == r[0];
    c.exact_at_2 = (E[2].dim() - r[2]) == r[1];
    v.checks.push_back(c);
    if (v.elliptic && !(c.exact_at_1 && c.exact_at_2)) {
      v.elliptic = false;
      v.witness = c;
      v.witness_position = c.exact_at_1 ? 2 : 1;
      v.rank_gap = c.exact_at_1 ? (E[2].dim() - r[2]) - r[1] : (E[1].dim() - r[1]) - r[0];
    }
  }
  return v;
}

// ------------------------------------------------------------- report

struct OrbitAnalysis {
  CalibrationSpec spec;
  IsotropyAlgebra isotropy;
  std::map<int, EkSpace> ek;
  MetricalVerdict metrical;
  std::optional<EllipticVerdict> elliptic;
};

inline OrbitAnalysis analyze(const CalibrationSpec& s, int max_k = 2) {
  OrbitAnalysis a;
  a.spec = s;
  a.isotropy = isotropy_algebra(s);
  for (int k = 0; k <= max_k; ++k) a.ek.emplace(k, ek_space(s, k));
  a.metrical = check_metrical(s, a.isotropy);
  return a;
}

// ------------------------------------------------------------- JSON

inline json to_json(const Endo<double>& e) {
  json rows = json::array();
  for (int i = 0; i < e.dim(); ++i) {
    std::vector<double> r(e.dim());
    for (int j = 0; j < e.dim(); ++j) r[j] = e(i, j);
    rows.push_back(r);
  }
  return rows;
}

inline json to_json(const EllipticVerdict& v) {
  json j{{"verdict", v.elliptic},
         {"trials", v.trials},
         {"seed", v.seed},
         {"covectors_checked", v.checks.size()},
         {"exact_arithmetic", v.exact_arithmetic},
         {"ek_dims", v.ek_dims}};
  if (v.witness) {
    j["witness"] = {{"u", v.witness->u},
                    {"position", v.witness_position},
                    {"rank_gap", v.rank_gap},
                    {"ranks", {v.witness->rank_u_e0, v.witness->rank_u_e1, v.witness->rank_u_e2}}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

inline json to_json(const OrbitAnalysis& a) {
  json j;
  j["kind"] = to_string(a.spec.kind);
  j["structure"] = a.spec.name();
  j["dim"] = a.spec.dim;
  j["degrees"] = a.spec.degrees;
  j["isotropy_dim"] = a.isotropy.dim;
  json ek = json::object();
  for (const auto& [k, e] : a.ek) ek[std::to_string(k)] = e.dim();
  j["ek_dims"] = ek;
  if (a.ek.count(1)) j["e1_dim"] = a.ek.at(1).dim();
  j["metrical"] = a.metrical.metrical;
  if (a.metrical.witness) {
    j["metrical_witness"] = to_json(*a.metrical.witness);
    j["metrical_witness_symmetric"] = a.metrical.witness_symmetric;
  }
  if (a.elliptic) j["elliptic"] = to_json(*a.elliptic);
  return j;
}

}  // namespace calib
