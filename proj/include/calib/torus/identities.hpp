#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "calib/orbits/analysis.hpp"
#include "calib/torus/sampling.hpp"

// Randomized checks of the operator identities behind the obstruction recursion:
// L_a is an anti-derivation, the frame formula for L_a, the Nijenhuis commutator
// identity, d rho_a rho_a Phi = -G(a,a) Phi, and E^2-membership of Ad-iterates.
namespace calib::identities {

struct IdentityCheck {
  std::string name;
  std::string statement;
  int trials = 0;
  double max_residual = 0;  // float: relative; exact: 0 or 1 (any mismatch)
  double tol = 0;
  bool exact = false;
  bool pass = true;

  void record(double r) {
    ++trials;
    max_residual = std::max(max_residual, r);
    pass = pass && r <= tol;
  }
};

struct IdentityReport {
  std::string scalar;
  int trials = 0;
  std::uint64_t seed = 0;
  int freq_bound = 0;
  std::vector<IdentityCheck> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

inline constexpr double kIdentityTol = 1e-10;
inline constexpr double kMemberTol = 1e-9;

namespace detail {

template <class T>
double rel(const T& diff, const T& ref) {
  return l2_norm(diff) / std::max(1.0, l2_norm(ref));
}

template <class C>
TrigMulti<C> apply_g(const EndoField<C>& a, const TrigMulti<C>& x) {
  return x.apply([&](const TrigForm<C>& f) { return g_operator(a, f); });
}

/// X_0 = G Phi, X_1 = [rho_a, G] Phi, X_2 = [rho_a, [rho_a, G]] Phi
template <class C>
std::vector<TrigMulti<C>> ad_iterates(const EndoField<C>& a, const TrigMulti<C>& phi) {
  TrigMulti<C> r1 = rho_hat(a, phi), r2 = rho_hat(a, r1);
  TrigMulti<C> g0 = apply_g(a, phi), g1 = apply_g(a, r1), g2 = apply_g(a, r2);
  TrigMulti<C> x1 = rho_hat(a, g0) - g1;
  TrigMulti<C> x2 = rho_hat(a, rho_hat(a, g0)) - rho_hat(a, g1) - rho_hat(a, g1) + g2;
  return {g0, x1, x2};
}

/// Relative distance of each frequency mode from the E^k fiber.
inline double membership_residual(const EkSpace& e, const TrigMulti<Complexd>& x) {
  if (x.degrees() != e.layout.degrees()) throw std::invalid_argument("membership: degree mismatch");
  std::map<Freq, Eigen::VectorXcd> amb;
  for (std::size_t p = 0; p < x.size(); ++p) {
    const MaskIndex& idx = e.layout.index(p);
    for (const auto& [m, c] : x[p].terms())
      for (const auto& [f, v] : c.modes()) {
        auto it = amb.find(f);
        if (it == amb.end()) it = amb.emplace(f, Eigen::VectorXcd::Zero(e.layout.size())).first;
        it->second[e.layout.offset(p) + idx.position(m)] += v;
      }
  }
  double res2 = 0, tot2 = 0;
  for (const auto& [f, c] : amb) {
    Eigen::VectorXcd proj = e.basis.cast<Complexd>() * (e.basis.transpose().cast<Complexd>() * c);
    res2 += (c - proj).squaredNorm();
    tot2 += c.squaredNorm();
  }
  return tot2 > 0 ? std::sqrt(res2 / tot2) : 0.0;
}

/// Exact membership: every real and imaginary mode vector lies in the column span.
inline bool member_exact(const QMatrix& basis, int basis_rank, const Layout& L, const TrigMulti<ComplexQ>& x) {
  std::map<Freq, std::pair<std::vector<Rational>, std::vector<Rational>>> amb;
  for (std::size_t p = 0; p < x.size(); ++p) {
    const MaskIndex& idx = L.index(p);
    for (const auto& [m, c] : x[p].terms())
      for (const auto& [f, v] : c.modes()) {
        auto it = amb.find(f);
        if (it == amb.end())
          it = amb.emplace(f, std::make_pair(std::vector<Rational>(L.size()), std::vector<Rational>(L.size()))).first;
        const int r = L.offset(p) + idx.position(m);
        it->second.first[r] += v.re;
        it->second.second[r] += v.im;
      }
  }
  for (const auto& [f, pr] : amb)
    for (const auto* v : {&pr.first, &pr.second}) {
      QMatrix m(basis.rows(), basis.cols() + 1);
      for (int i = 0; i < basis.rows(); ++i) {
        for (int j = 0; j < basis.cols(); ++j) m(i, j) = basis(i, j);
        m(i, basis.cols()) = (*v)[i];
      }
      if (rank(m) != basis_rank) return false;
    }
  return true;
}

inline std::vector<CalibrationSpec> membership_specs(bool exact_only) {
  std::vector<CalibrationSpec> out{model_calibration(Kind::symplectic, {4, 0, 0}), model_calibration(Kind::sl, {0, 2, 0}),
                                   model_calibration(Kind::cy, {0, 2, 0})};
  if (!exact_only) {
    out.push_back(model_calibration(Kind::hk, {0, 0, 1}));
    out.push_back(model_calibration(Kind::g2));
  }
  return out;
}

inline IdentityCheck make(const std::string& name, const std::string& statement, double tol, bool exact) {
  IdentityCheck c;
  c.name = name;
  c.statement = statement;
  c.tol = tol;
  c.exact = exact;
  return c;
}

}  // namespace detail

/// Floating-point suite. Every tenth trial uses zero fields (0 == 0 cases).
inline IdentityReport run_float(int trials, std::uint64_t seed, int F) {
  using namespace sampling;
  using TF = TrigForm<Complexd>;
  if (trials < 1) throw std::invalid_argument("identities: trials must be >= 1");
  if (F < 0 || F > 4) throw std::invalid_argument("identities: frequency bound must be 0..4");
  std::mt19937_64 rng(seed);
  IdentityReport rep;
  rep.scalar = "float";
  rep.trials = trials;
  rep.seed = seed;
  rep.freq_bound = F;
  auto anti = detail::make("anti_derivation", "L_a(x^y) = L_a x ^ y + (-1)^|x| x ^ L_a y", kIdentityTol, false);
  auto frame = detail::make("frame_formula", "rho_a d - d rho_a equals the coordinate-frame formula for L_a", kIdentityTol, false);
  auto nsym = detail::make("nijenhuis_symmetric", "N(a,b) = N(b,a)", kIdentityTol, false);
  auto ncomm = detail::make("nijenhuis_commutator", "[L_a, rho_b] = i_N(a,b) - L_ab", kIdentityTol, false);
  auto rsq = detail::make("rho_square", "d rho_a rho_a Phi = -G(a,a) Phi when Phi, rho_a Phi are closed", kIdentityTol, false);
  auto adk = detail::make("ad_iterates_in_E2", "Ad^k_{rho_a} G(a,a) Phi0 is a section of E^2, k = 0,1,2", kMemberTol, false);
  auto specs = detail::membership_specs(false);
  std::vector<EkSpace> e2;
  for (const auto& s : specs) e2.push_back(ek_space(s, 2));

  for (int t = 0; t < trials; ++t) {
    const bool zero = t % 10 == 9;
    const int n = 3 + t % 3;
    const int modes = 1 + t % 2;
    EndoField<Complexd> a = zero ? EndoField<Complexd>(n) : random_field(rng, n, F, modes);
    EndoField<Complexd> b = zero ? EndoField<Complexd>(n) : random_field(rng, n, F, 1 + (t / 2) % 2);
    const int p = t % 3, q = 1 + (t / 3) % 2;
    TF x = random_trigform(rng, n, p, F, 1), y = random_trigform(rng, n, q, F, 1);

    TF lhs = lie_operator_L(a, wedge(x, y));
    TF rhs = wedge(lie_operator_L(a, x), y);
    TF second = wedge(x, lie_operator_L(a, y));
    rhs = p % 2 ? rhs - second : rhs + second;
    anti.record(detail::rel(lhs - rhs, lhs));

    TF eta = random_trigform(rng, n, t % 3, F, modes);
    TF l1 = lie_operator_L(a, eta);
    frame.record(detail::rel(l1 - lie_operator_L_frame(a, eta), l1));

    auto Nab = nijenhuis(a, b), Nba = nijenhuis(b, a);
    double s = 0, s0 = 0;
    for (int k = 0; k < n; ++k) {
      s += (Nab[k] - Nba[k]).norm2();
      s0 += Nab[k].norm2();
    }
    nsym.record(std::sqrt(s) / std::max(1.0, std::sqrt(s0)));

    TF theta = random_trigform(rng, n, 1 + t % 2, F, 1);
    TF c1 = lie_operator_L(a, rho_hat(b, theta)) - rho_hat(b, lie_operator_L(a, theta));
    TF c2 = interior_tensor(Nab, theta) - lie_operator_L(a * b, theta);
    ncomm.record(detail::rel(c1 - c2, c1));

    // a = Dv + c keeps rho_a Phi closed for constant Phi
    EndoField<Complexd> ac = zero ? EndoField<Complexd>(4) : jacobian(random_vfield(rng, 4, F, modes)) + random_field(rng, 4, 0, 1, 0.5);
    TF phi = random_trigform(rng, 4, 2 + t % 2, 0, 1, 0.7);
    TF r1 = d(rho_hat(ac, rho_hat(ac, phi)));
    rsq.record(detail::rel(r1 + g_operator(ac, phi), r1));

    const std::size_t si = t % specs.size();
    const CalibrationSpec& spec = specs[si];
    EndoField<Complexd> am = zero ? EndoField<Complexd>(spec.dim) : random_field(rng, spec.dim, F, 1, 0.5, spec.dim >= 7 ? 0.2 : 0.4);
    for (const auto& X : detail::ad_iterates(am, lift(spec.phi0))) adk.record(detail::membership_residual(e2[si], X));
  }
  rep.checks = {anti, frame, nsym, ncomm, rsq, adk};

  // exactly vanishing Nijenhuis cases
  auto triv = detail::make("nijenhuis_trivial", "N(id,id) = 0, N(c,c') = 0 for constants, N(f id, f id) = 0", 0.0, true);
  for (int t = 0; t < std::max(1, trials / 10); ++t) {
    const int n = 3 + t % 3;
    auto id = lift(Endo<Rational>::identity(n));
    auto c = random_field_q(rng, n, 0, 1), c2 = random_field_q(rng, n, 0, 1);
    TPq f = random_tpq(rng, n, F, 2);
    EndoField<ComplexQ> fid(n);
    for (int i = 0; i < n; ++i) fid(i, i) = f;
    bool ok = true;
    for (const auto& Nk : nijenhuis(id, id)) ok = ok && Nk.is_zero();
    for (const auto& Nk : nijenhuis(c, c2)) ok = ok && Nk.is_zero();
    for (const auto& Nk : nijenhuis(fid, fid)) ok = ok && Nk.is_zero();
    triv.record(ok ? 0.0 : 1.0);
  }
  rep.checks.push_back(triv);
  return rep;
}

/// Exact rational suite on small samples; every identity must hold with equality.
inline IdentityReport run_exact(int trials, std::uint64_t seed, int F) {
  using namespace sampling;
  using TF = TrigForm<ComplexQ>;
  if (trials < 1) throw std::invalid_argument("identities: trials must be >= 1");
  if (F < 0 || F > 4) throw std::invalid_argument("identities: frequency bound must be 0..4");
  std::mt19937_64 rng(seed);
  IdentityReport rep;
  rep.scalar = "rational";
  rep.trials = trials;
  rep.seed = seed;
  rep.freq_bound = F;
  auto anti = detail::make("anti_derivation", "L_a(x^y) = L_a x ^ y + (-1)^|x| x ^ L_a y", 0.0, true);
  auto frame = detail::make("frame_formula", "rho_a d - d rho_a equals the coordinate-frame formula for L_a", 0.0, true);
  auto ncomm = detail::make("nijenhuis_commutator", "[L_a, rho_b] = i_N(a,b) - L_ab", 0.0, true);
  auto rsq = detail::make("rho_square", "d rho_a rho_a Phi = -G(a,a) Phi when Phi, rho_a Phi are closed", 0.0, true);
  auto adk = detail::make("ad_iterates_in_E2", "Ad^k_{rho_a} G(a,a) Phi0 is a section of E^2, k = 0,1,2", 0.0, true);
  auto triv = detail::make("nijenhuis_trivial", "N(id,id) = 0, N(c,c') = 0 for constants, N(f id, f id) = 0", 0.0, true);
  auto specs = detail::membership_specs(true);
  std::vector<QMatrix> e2;
  std::vector<int> e2rank;
  for (const auto& s : specs) {
    EkSpace e = ek_space(s, 2);
    if (!e.exact) throw std::logic_error("identities: exact E^2 basis unavailable");
    e2.push_back(*e.exact);
    e2rank.push_back(rank(*e.exact));
  }
  auto mark = [](IdentityCheck& c, bool ok) { c.record(ok ? 0.0 : 1.0); };

  for (int t = 0; t < trials; ++t) {
    const bool zero = t % 10 == 9;
    const int n = 3;
    EndoField<ComplexQ> a = zero ? EndoField<ComplexQ>(n) : random_field_q(rng, n, F, 1);
    EndoField<ComplexQ> b = zero ? EndoField<ComplexQ>(n) : random_field_q(rng, n, F, 1);
    const int p = t % 3, q = 1 + (t / 3) % 2;
    TF x = random_trigform_q(rng, n, p, F, 1), y = random_trigform_q(rng, n, q, F, 1);
    TF rhs = wedge(lie_operator_L(a, x), y);
    TF second = wedge(x, lie_operator_L(a, y));
    rhs = p % 2 ? rhs - second : rhs + second;
    mark(anti, lie_operator_L(a, wedge(x, y)) == rhs);

    TF eta = random_trigform_q(rng, n, t % 3, F, 1);
    mark(frame, lie_operator_L(a, eta) == lie_operator_L_frame(a, eta));

    TF theta = random_trigform_q(rng, n, 1, F, 1);
    mark(ncomm, lie_operator_L(a, rho_hat(b, theta)) - rho_hat(b, lie_operator_L(a, theta)) ==
                    interior_tensor(nijenhuis(a, b), theta) - lie_operator_L(a * b, theta));

    EndoField<ComplexQ> ac = zero ? EndoField<ComplexQ>(4) : jacobian(random_vfield_q(rng, 4, F, 1)) + random_field_q(rng, 4, 0, 1);
    TF phi = random_trigform_q(rng, 4, 2, 0, 1, 0.7);
    mark(rsq, d(rho_hat(ac, rho_hat(ac, phi))) == -g_operator(ac, phi));

    if (t % 5 == 0) {
      const std::size_t si = (t / 5) % specs.size();
      const CalibrationSpec& spec = specs[si];
      EndoField<ComplexQ> am = zero ? EndoField<ComplexQ>(spec.dim) : random_field_q(rng, spec.dim, std::min(F, 1), 1, 0.3);
      Layout L2 = target_layout(spec, 2);
      for (const auto& X : detail::ad_iterates(am, lift(*spec.phi0_exact))) mark(adk, detail::member_exact(e2[si], e2rank[si], L2, X));
    }

    if (t % 10 == 0) {
      auto id = lift(Endo<Rational>::identity(n));
      auto c = random_field_q(rng, n, 0, 1), c2 = random_field_q(rng, n, 0, 1);
      TPq f = random_tpq(rng, n, F, 2);
      EndoField<ComplexQ> fid(n);
      for (int i = 0; i < n; ++i) fid(i, i) = f;
      bool ok = true;
      for (const auto& Nk : nijenhuis(id, id)) ok = ok && Nk.is_zero();
      for (const auto& Nk : nijenhuis(c, c2)) ok = ok && Nk.is_zero();
      for (const auto& Nk : nijenhuis(fid, fid)) ok = ok && Nk.is_zero();
      mark(triv, ok);
    }
  }
  rep.checks = {anti, frame, ncomm, rsq, adk, triv};
  return rep;
}

inline json to_json(const IdentityReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"statement", c.statement},
                      {"trials", c.trials},
                      {"max_residual", c.max_residual},
                      {"tol", c.tol},
                      {"exact", c.exact},
                      {"pass", c.pass}});
  return {{"scalar", r.scalar}, {"trials", r.trials}, {"seed", r.seed}, {"freq_bound", r.freq_bound}, {"checks", checks}, {"pass", r.pass()}};
}

}  // namespace calib::identities
