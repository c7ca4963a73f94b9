// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "calib/deform/solver.hpp"
#include "calib/hodge/cohomology.hpp"
#include "calib/orbits/validate.hpp"
#include "calib/torus/identities.hpp"
#include "test_util.hpp"

using namespace calib;

namespace {

CalibrationSpec M(Kind k, SpecParams p = {}) { return model_calibration(k, p); }

// Collects failed gates for one criterion; the summary carries the first few.
struct Gate {
  std::vector<std::string> failures;
  std::string summary;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  template <class A, class B>
  void eq(const A& got, const B& want, const std::string& what) {
    if (!(got == want)) {
      std::ostringstream os;
      os << what << ": got " << got << ", want " << want;
      failures.push_back(os.str());
    }
  }
  void le(double got, double bound, const std::string& what) {
    if (!(got <= bound)) {
      std::ostringstream os;
      os << what << ": " << got << " > " << bound;
      failures.push_back(os.str());
    }
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

// ---------------------------------------------------------------- 1

void ellipticity(Gate& g) {
  struct Row {
    CalibrationSpec s;
    bool elliptic;
  };
  std::vector<Row> rows = {
      {M(Kind::symplectic, {.dim = 4}), true},       {M(Kind::symplectic, {.dim = 6}), true},
      {M(Kind::degenerate2form, {.dim = 4}), false}, {M(Kind::sl, {.complex_dim = 2}), true},
      {M(Kind::cy, {.complex_dim = 2}), true},       {M(Kind::cy, {.complex_dim = 3}), true},
      {M(Kind::hk, {.m = 1}), true},                 {M(Kind::g2), true},
      {M(Kind::spin7), true},
  };
  for (const auto& r : rows) {
    auto v = check_elliptic(r.s, 32, 42);
    std::string tag = r.s.name() + " n=" + std::to_string(r.s.dim);
    g.eq(v.elliptic, r.elliptic, tag);
    g.expect(v.exact_arithmetic, tag + ": not exact");
    if (!r.elliptic) g.expect(v.witness && v.rank_gap != 0, tag + ": missing witness");
  }
  g.summary = std::to_string(rows.size()) + " verdicts, exact ranks, degenerate witness u=dx1";
}

// ---------------------------------------------------------------- 2

void metrical(Gate& g) {
  for (auto s : {M(Kind::cy, {.complex_dim = 2}), M(Kind::cy, {.complex_dim = 3}), M(Kind::hk, {.m = 1}), M(Kind::g2),
                 M(Kind::spin7)}) {
    auto v = check_metrical(s, isotropy_algebra(s));
    g.expect(v.metrical, s.name() + " should be metrical");
  }
  for (auto s : {M(Kind::symplectic, {.dim = 4}), M(Kind::sl, {.complex_dim = 2}), M(Kind::degenerate2form, {.dim = 4})}) {
    auto v = check_metrical(s, isotropy_algebra(s));
    g.expect(!v.metrical, s.name() + " should not be metrical");
    if (!v.witness) {
      g.expect(false, s.name() + ": no witness");
      continue;
    }
    Eigen::MatrixXd X = to_eigen(*v.witness);
    g.expect(v.witness_symmetric && (X - X.transpose()).norm() < 1e-12, s.name() + ": witness not symmetric");
    g.le(std::sqrt(rho_hat(*v.witness, s.phi0).norm2()), 1e-12, s.name() + ": witness not in h");
  }
  g.summary = "5 metrical, 3 non-metrical with symmetric isotropy witnesses";
}

// ---------------------------------------------------------------- 3

void dimensions(Gate& g) {
  struct Row {
    CalibrationSpec s;
    int h, e1;
  };
  std::vector<Row> rows = {
      {M(Kind::symplectic, {.dim = 4}), 10, 6}, {M(Kind::symplectic, {.dim = 6}), 21, 15},
      {M(Kind::sl, {.complex_dim = 2}), 6, 2 * 4 + 2}, {M(Kind::sl, {.complex_dim = 3}), 16, 2 * 9 + 2},
      {M(Kind::cy, {.complex_dim = 2}), 3, 3 * 4 + 1}, {M(Kind::cy, {.complex_dim = 3}), 8, 3 * 9 + 1},
      {M(Kind::hk, {.m = 1}), 3, 14 - 1},          {M(Kind::g2), 14, 35},
      {M(Kind::spin7), 21, 43},
  };
  for (const auto& r : rows) {
    std::string tag = r.s.name() + " n=" + std::to_string(r.s.dim);
    auto h = isotropy_algebra(r.s);
    g.expect(h.exact.has_value(), tag + ": isotropy not exact");
    g.eq(h.dim, r.h, tag + " dim h");
    g.eq(ek_space(r.s, 1).dim(), r.e1, tag + " dim E1");
  }
  auto hk = M(Kind::hk, {.m = 1});
  g.eq(lambda2_hk_dim_from_e1(hk, ek_space(hk, 1)), 3, "Lambda2_HK m=1");
  auto s = M(Kind::g2);
  auto h = isotropy_algebra(s);
  g.eq(irrep_projectors(s, h, 3).dims() == std::vector<int>{1, 7, 27}, true, "g2 Lambda3 split 1+7+27");
  g.eq(irrep_projectors(s, h, 2).dims() == std::vector<int>{7, 14}, true, "g2 Lambda2 split 7+14");
  auto sp = M(Kind::spin7);
  auto hs = isotropy_algebra(sp);
  g.eq(irrep_projectors(sp, hs, 4).dims() == std::vector<int>{1, 7, 27, 35}, true, "spin7 Lambda4 split 1+7+27+35");
  g.eq(irrep_projectors(sp, hs, 3).dims() == std::vector<int>{8, 48}, true, "spin7 Lambda3 split 8+48");
  g.summary = std::to_string(rows.size()) + " (dim h, dim E1) rows, Lambda2_HK=3, g2/spin7 splits";
}

// ---------------------------------------------------------------- 4

void monge_ampere(Gate& g) {
  for (int n = 1; n <= 3; ++n) g.expect(monge_ampere_exact(M(Kind::cy, {.complex_dim = n})), "cy n=" + std::to_string(n));
  g.eq(model::monge_ampere_constant(2), ComplexQ(Rational(2)), "c_2");
  g.summary = "Omega^Omegabar = c_n omega^n exactly for n=1,2,3";
}

// ---------------------------------------------------------------- 5

void identity_suite(Gate& g) {
  auto fl = identities::run_float(100, 2024, 2);
  double worst = 0;
  for (const auto& c : fl.checks) {
    g.expect(c.pass, "float " + c.name + " " + fmt(c.max_residual));
    if (!c.exact) worst = std::max(worst, c.max_residual);
    if (c.exact) g.eq(c.max_residual, 0.0, "float " + c.name + " exact");
  }
  auto ex = identities::run_exact(30, 7, 2);
  for (const auto& c : ex.checks) g.eq(c.max_residual, 0.0, "rational " + c.name);
  g.summary = "100 float trials F=2 max residual " + fmt(worst) + ", 30 rational trials all exactly 0, N(id,id)=N(c,c)=0";
}

// ---------------------------------------------------------------- 6

void torus_cohomology(Gate& g) {
  struct Row {
    CalibrationSpec s;
    std::vector<long> expect;  // -1: only compared against dim E^k
  };
  std::vector<Row> rows = {
      {M(Kind::symplectic, {.dim = 4}), {-1, 6, 4}}, {M(Kind::sl, {.complex_dim = 2}), {-1, 10, -1}},
      {M(Kind::cy, {.complex_dim = 2}), {-1, 13, -1}}, {M(Kind::hk, {.m = 1}), {-1, 13, -1}},
      {M(Kind::g2), {7, 35, 49}},                      {M(Kind::cy, {.complex_dim = 3}), {-1, 28, -1}},
      {M(Kind::spin7), {8, 43, -1}},
  };
  for (const auto& row : rows) {
    auto r = cohomology_report(HodgeSystem::build(row.s, row.s.dim, 2));
    std::string tag = row.s.name() + " n=" + std::to_string(row.s.dim);
    g.expect(r.elliptic_on_torus, tag + ": singular block");
    // the symplectic complex starts at Lambda^1, where closed 1-forms are not finite in number
    int k0 = row.s.kind == Kind::symplectic ? 1 : 0;
    for (int k = k0; k <= 2; ++k) {
      g.eq(r.h_sharp[k], static_cast<long>(r.ek_dims[k]), tag + " h#" + std::to_string(k) + " vs dim E");
      if (row.expect[k] >= 0) g.eq(r.h_sharp[k], row.expect[k], tag + " h#" + std::to_string(k));
    }
    g.expect(r.p1_injective() && r.p2_injective(), tag + ": p not injective");
  }
  auto g2 = cohomology_report(HodgeSystem::build(M(Kind::g2), 7, 1));
  g.eq(g2.decomposition["H2"]["H4"].get<int>(), 35, "g2 H2 = H4 part");
  g.eq(g2.decomposition["H2"]["H5_14"].get<int>(), 14, "g2 H2 = H5_14 part");
  auto cy = cohomology_report(HodgeSystem::build(M(Kind::cy, {.complex_dim = 3}), 6, 1));
  g.eq(cy.decomposition["H1"]["H30"].get<int>(), 2, "cy3 H30");
  g.eq(cy.decomposition["H1"]["H21"].get<int>(), 18, "cy3 H21");
  g.eq(cy.decomposition["H1"]["P11_R"].get<int>(), 8, "cy3 P11");
  auto hk = cohomology_report(HodgeSystem::build(M(Kind::hk, {.m = 1}), 4, 1));
  g.eq(hk.decomposition["H1"]["Lambda2_HK"].get<int>(), 3, "hk Lambda2_HK");
  auto sp = cohomology_report(HodgeSystem::build(M(Kind::spin7), 8, 0));
  g.eq(sp.decomposition["H1"]["H4_1"].get<int>(), 1, "spin7 H4_1");
  g.eq(sp.decomposition["H1"]["H4_7"].get<int>(), 7, "spin7 H4_7");
  g.eq(sp.decomposition["H1"]["H4_35"].get<int>(), 35, "spin7 H4_35");
  auto dc = dirac_check(M(Kind::spin7), 2);
  g.expect(dc.pass, "spin7 dirac check");
  g.summary = std::to_string(rows.size()) + " specs at F=2, decompositions, p1/p2 injective, dirac check over " +
              std::to_string(dc.frequencies) + " directions";
}

// ---------------------------------------------------------------- 7

void g2_operators_check(Gate& g) {
  auto s = M(Kind::g2);
  auto ops = g2_operators(s);
  std::mt19937_64 rng(5);
  double wj = 0, wl = 0;
  for (int t = 0; t < 50; ++t) {
    Endo<double> xi = testkit::random_endo(rng, 7);
    wj = std::max(wj, testkit::dist(g2_J(ops, rho_hat(xi, s.phi0[0])), rho_hat(xi, s.phi0[1])));
  }
  std::mt19937_64 rng2(8);
  for (int t = 0; t < 50; ++t) {
    auto r = lemma_6_4_solve(ops, testkit::random_vec(rng2, 7), testkit::random_form(rng2, 7, 2, 1.0));
    wl = std::max({wl, r.outer_residual, r.membership_residual, r.contraction_residual});
  }
  g.le(wj, 1e-10, "J rho_hat phi = rho_hat psi");
  g.le(wl, 1e-10, "u^J(u^eta) = -2|u|^2 *gamma, gamma in Lambda2_14, i_v gamma = 0");
  g.summary = "J residual " + fmt(wj) + ", u^J(u^eta) residual " + fmt(wl) + " over 50 samples each";
}

// ---------------------------------------------------------------- 8

void order_gates(Gate& g, const deform::DeformationResult& r, const std::string& tag) {
  g.expect(!r.obstruction, tag + ": obstruction reported");
  for (const auto& rec : r.records) {
    std::string k = tag + " k=" + std::to_string(rec.k);
    g.le(rec.closure_residual, 1e-9, k + " closure");
    g.le(rec.two_path_residual, 1e-9, k + " two-path");
    g.le(rec.ob_exactness_residual, 1e-10, k + " Ob exactness");
    g.le(rec.membership_residual, 1e-9, k + " Ob in E2");
  }
}

void deformation(Gate& g) {
  using namespace deform;
  auto sym = HodgeSystem::build(M(Kind::symplectic, {.dim = 4}), 4, 1);
  // (a)
  std::mt19937_64 rng(1);
  EFd c1 = lift(testkit::random_endo(rng, 4, 0.3));
  auto rc = run(sym, c1, 4);
  bool trivial = !rc.obstruction;
  for (std::size_t k = 1; k < rc.a.size(); ++k) trivial = trivial && rc.a[k].is_zero();
  for (double c : rc.residual_series) trivial = trivial && c == 0.0;
  g.expect(trivial, "(a) constant seed not trivial");
  g.le(closure_residual(rc, 0.7), 1e-15, "(a) closure at t=0.7");
  // (b)
  auto rb = run(sym, standard_seed(4, 0.3), 6);
  order_gates(g, rb, "(b)");
  g.eq(rb.a.size(), 6u, "(b) orders");
  double fb3 = derivative_check(rb, 1e-3), fb4 = derivative_check(rb, 1e-4);
  g.expect(fb3 < 1e-5 && fb4 < 0.05 * fb3, "(b) finite difference " + fmt(fb3) + " " + fmt(fb4));
  auto sb = residual_slope(rb, {0.15, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5});
  g.expect(sb.slope >= 6.8, "(b) slope " + fmt(sb.slope));
  // (c)
  auto g2 = HodgeSystem::build(M(Kind::g2), 7, 0);
  auto rg = run(g2, standard_seed(7, 0.2, 0.5, 7), 4);
  order_gates(g, rg, "(c)");
  double fg3 = derivative_check(rg, 1e-3), fg4 = derivative_check(rg, 1e-4);
  g.expect(fg3 < 1e-5 && fg4 < 0.05 * fg3, "(c) finite difference " + fmt(fg3) + " " + fmt(fg4));
  auto sg = residual_slope(rg, {0.03, 0.05, 0.1, 0.2, 0.3});
  g.expect(sg.slope >= 4.8, "(c) slope " + fmt(sg.slope));
  // (d)
  auto mb = majorant_report(rb), mg = majorant_report(rg);
  g.expect(mb.bounded && mb.holds, "(d) symplectic majorant");
  g.expect(mg.bounded && mg.holds, "(d) g2 majorant");
  g.expect(majorant_report(rc).holds, "(d) constant-seed majorant");
  g.summary = "(a) exact (b) sympl K=6 slope " + fmt(sb.slope) + " (c) g2 K=4 slope " + fmt(sg.slope) +
              " (d) c=" + fmt(mb.c) + "/" + fmt(mg.c);
}

// ---------------------------------------------------------------- 9

Form<Complexd> cplx(const Form<double>& f) {
  return f.map([](double c) { return Complexd(c); });
}

void period_maps(Gate& g) {
  using namespace deform;
  auto runs_for = [](const HodgeSystem& sys) {
    std::vector<DeformationResult> out;
    for (const auto& s : harmonic_seeds(sys)) out.push_back(run(sys, s, 2));
    return out;
  };
  int n_specs = 0;
  for (auto spec : {M(Kind::symplectic, {.dim = 4}), M(Kind::symplectic, {.dim = 6}), M(Kind::sl, {.complex_dim = 2}),
                    M(Kind::cy, {.complex_dim = 2}), M(Kind::cy, {.complex_dim = 3}), M(Kind::hk, {.m = 1}),
                    M(Kind::g2), M(Kind::spin7)}) {
    auto sys = HodgeSystem::build(spec, spec.dim, 0);
    auto pm = period_map(sys, runs_for(sys));
    g.eq(pm.rank, pm.h1, spec.name() + " n=" + std::to_string(spec.dim) + " rank dP");
    ++n_specs;
  }
  double worst = 0;
  for (int n : {2, 3}) {
    auto spec = M(Kind::cy, {.complex_dim = n});
    auto sys = HodgeSystem::build(spec, 2 * n, 0);
    auto pm = period_map(sys, runs_for(sys));
    Layout L(2 * n, spec.degrees);
    const Complexd I(0, 1);
    Form<Complexd> Om = cplx(spec.phi0[0]) + I * cplx(spec.phi0[1]);
    Form<Complexd> Ombar = cplx(spec.phi0[0]) - I * cplx(spec.phi0[1]);
    Form<Complexd> om = cplx(spec.phi0[2]);
    ComplexQ cq = model::monge_ampere_constant(n);
    Complexd cn(cq.re.get_d(), cq.im.get_d());
    Form<Complexd> om_pow = Form<Complexd>::scalar(2 * n, Complexd(1));
    for (int i = 0; i + 1 < n; ++i) om_pow = wedge(om_pow, om);
    for (int c = 0; c < pm.matrix.cols(); ++c) {
      MultiForm<double> v = L.from_eigen(Eigen::VectorXd(pm.matrix.col(c)));
      Form<Complexd> alpha = cplx(v[0]) + I * cplx(v[1]);
      Form<Complexd> alphabar = cplx(v[0]) - I * cplx(v[1]);
      Form<Complexd> beta = cplx(v[2]);
      worst = std::max(worst, std::sqrt((wedge(alpha, om) + wedge(Om, beta)).norm2()));
      Form<Complexd> rhs = (Complexd(n) * cn) * wedge(beta, om_pow);
      worst = std::max(worst, std::sqrt((wedge(alpha, Ombar) + wedge(Om, alphabar) - rhs).norm2()));
    }
  }
  g.le(worst, 1e-9, "cy first-order period relations");
  g.summary = "rank dP = dim H1 for " + std::to_string(n_specs) + " specs, cy relations residual " + fmt(worst);
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Gate&)> fn;
  };
  const std::vector<Criterion> all = {
      {1, "ellipticity table", ellipticity},
      {2, "metrical table", metrical},
      {3, "dimension table", dimensions},
      {4, "Monge-Ampere constant", monge_ampere},
      {5, "identity suite", identity_suite},
      {6, "torus cohomology", torus_cohomology},
      {7, "G2 operator checks", g2_operators_check},
      {8, "deformation end-to-end", deformation},
      {9, "period map", period_maps},
  };
  int failed = 0;
  for (const auto& c : all) {
    Gate g;
    auto t0 = std::chrono::steady_clock::now();
    try {
      c.fn(g);
    } catch (const std::exception& e) {
      g.failures.push_back(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = g.failures.empty();
    failed += ok ? 0 : 1;
    std::printf("criterion %d %s: %s [%.1fs] %s\n", c.id, ok ? "PASS" : "FAIL", c.name, secs, g.summary.c_str());
    for (std::size_t i = 0; i < g.failures.size() && i < 8; ++i) std::printf("    - %s\n", g.failures[i].c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
