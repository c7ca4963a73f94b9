#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include "calib/deform/solver.hpp"
#include "calib/hodge/cohomology.hpp"
#include "calib/orbits/analysis.hpp"
#include "calib/torus/identities.hpp"

namespace {

constexpr const char* kToolVersion = "0.1.0";

// exit codes
constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kConfig = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string structure;
  int dim = 0, m = 0, complex_dim = 0;
  std::optional<int> freq, order, trials;
  std::optional<double> t;
  std::optional<std::uint64_t> seed;
  std::string scalar = "float";
  std::optional<double> tol;
  std::string in, out;
  std::string format = "json";

  calib::json echo() const {
    calib::json j{{"command", command}, {"structure", structure}, {"scalar", scalar}, {"format", format}};
    if (dim) j["dim"] = dim;
    if (m) j["m"] = m;
    if (complex_dim) j["complex_dim"] = complex_dim;
    if (freq) j["freq"] = *freq;
    if (order) j["order"] = *order;
    if (trials) j["trials"] = *trials;
    if (t) j["t"] = *t;
    if (seed) j["seed"] = *seed;
    if (tol) j["tol"] = *tol;
    if (!in.empty()) j["in"] = in;
    return j;
  }
};

calib::CalibrationSpec spec_of(const RunConfig& c) {
  if (c.structure.empty()) throw ConfigError("--structure is required");
  return calib::model_calibration(calib::parse_kind(c.structure), {c.dim, c.complex_dim, c.m});
}

std::uint64_t need_seed(const RunConfig& c) {
  if (!c.seed) throw ConfigError(c.command + ": --seed is required (randomized command)");
  return *c.seed;
}

int need_range(const std::optional<int>& v, int def, int lo, int hi, const char* flag) {
  int x = v.value_or(def);
  if (x < lo || x > hi) throw ConfigError(std::string(flag) + " must be in " + std::to_string(lo) + ".." + std::to_string(hi));
  return x;
}

calib::json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path);
  try {
    return calib::json::parse(f);
  } catch (const calib::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ------------------------------------------------------------- commands

bool cmd_info(const RunConfig& c, calib::json& out) {
  auto a = calib::analyze(spec_of(c));
  out = calib::to_json(a);
  return true;
}

bool cmd_elliptic(const RunConfig& c, calib::json& out) {
  auto s = spec_of(c);
  int trials = need_range(c.trials, 64, 1, 100000, "--trials");
  auto v = calib::check_elliptic(s, trials, need_seed(c));
  out = calib::to_json(v);
  return v.elliptic;
}

bool cmd_verify(const RunConfig& c, calib::json& out) {
  int trials = need_range(c.trials, 100, 1, 100000, "--trials");
  int F = need_range(c.freq, 2, 0, 4, "--freq");
  std::uint64_t seed = need_seed(c);
  calib::identities::IdentityReport r;
  if (c.scalar == "float")
    r = calib::identities::run_float(trials, seed, F);
  else
    r = calib::identities::run_exact(trials, seed, F);
  out = calib::identities::to_json(r);
  return r.pass();
}

bool cmd_cohomology(const RunConfig& c, calib::json& out) {
  auto s = spec_of(c);
  int F = need_range(c.freq, 2, 0, 20, "--freq");
  auto sys = calib::HodgeSystem::build(s, s.dim, F);
  auto r = calib::cohomology_report(sys);
  out = calib::to_json(r);
  bool ok = r.elliptic_on_torus && r.p1_injective() && r.p2_injective() && r.d2_residual <= c.tol.value_or(1e-9);
  if (s.kind == calib::Kind::spin7) {
    auto dc = calib::dirac_check(s, std::max(F, 1));
    out["dirac"] = {{"pass", dc.pass},
                    {"freq0_kernel", dc.freq0_kernel},
                    {"frequencies", dc.frequencies},
                    {"min_normalized_sv", dc.min_normalized_sv}};
    ok = ok && dc.pass;
  }
  return ok;
}

bool cmd_deform(const RunConfig& c, calib::json& out) {
  namespace dfm = calib::deform;
  if (c.scalar != "float") throw ConfigError("deform runs in floating point; use --scalar float");
  auto s = spec_of(c);
  int K = need_range(c.order, 4, 1, dfm::kMaxOrder, "--order");
  double tol = c.tol.value_or(dfm::kDeformTol);
  if (!(tol > 0)) throw ConfigError("--tol must be positive");
  auto sys = calib::HodgeSystem::build(s, s.dim, 0);

  dfm::EFd a1;
  if (!c.in.empty()) {
    auto j = read_json_file(c.in);
    a1 = calib::endofield_from_json(j.contains("a1") ? j.at("a1") : j);
  } else {
    // coupled-mode seed; constant isotropy-free part only for the symplectic model
    double w = s.kind == calib::Kind::symplectic ? 0.0 : 0.5;
    a1 = dfm::standard_seed(s.dim, 0.2, w, need_seed(c));
  }
  auto r = dfm::run(sys, a1, K, false, tol);
  out = dfm::to_json(r);
  out["seed_field"] = calib::to_json(a1);
  bool ok = r.ok(tol);
  if (c.t && !r.obstruction) {
    double t = *c.t;
    if (!(t > 0)) throw ConfigError("--t must be positive");
    std::vector<double> ts;
    for (double f : {0.1, 0.2, 0.3, 0.5, 0.7, 1.0}) ts.push_back(f * t);
    auto fit = dfm::residual_slope(r, ts);
    out["closure_at_t"] = {{"t", t}, {"residual", fit.residual.back()}};
    out["residual_slope"] = {{"t", fit.t}, {"residual", fit.residual}, {"slope", fit.slope}, {"expected_min", K + 1}};
    out["derivative_check"] = {{"h", 1e-3}, {"error", dfm::derivative_check(r, 1e-3)}};
  }
  out["pass"] = ok;
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"calibration orbits: analysis, identities, torus cohomology and deformations"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--structure", cfg.structure, "symplectic|sl|cy|hk|g2|spin7|degenerate2form");
    sub->add_option("--dim", cfg.dim, "real dimension (symplectic, degenerate2form)");
    sub->add_option("--m", cfg.m, "quaternionic dimension (hk)");
    sub->add_option("--complex-dim", cfg.complex_dim, "complex dimension (sl, cy)");
    sub->add_option("--freq", cfg.freq, "frequency bound F");
    sub->add_option("--order", cfg.order, "deformation order K");
    sub->add_option("--t", cfg.t, "evaluation radius");
    sub->add_option("--trials", cfg.trials, "number of random trials");
    sub->add_option("--seed", cfg.seed, "rng seed");
    sub->add_option("--scalar", cfg.scalar, "rational|float")->check(CLI::IsMember({"rational", "float"}));
    sub->add_option("--tol", cfg.tol, "tolerance override");
    sub->add_option("--in,--seed-file", cfg.in, "input JSON (deform seed EndoField)");
    sub->add_option("--out", cfg.out, "output path (default stdout)");
    sub->add_option("--format", cfg.format, "json")->check(CLI::IsMember({"json"}));
  };

  struct Cmd {
    const char* name;
    const char* help;
    bool (*fn)(const RunConfig&, calib::json&);
  };
  const Cmd cmds[] = {
      {"info", "orbit analysis: isotropy, E^k dimensions, metrical", cmd_info},
      {"elliptic", "ellipticity of the model complex", cmd_elliptic},
      {"verify", "operator identity suite on the torus", cmd_verify},
      {"cohomology", "torus cohomology of the deformation complex", cmd_cohomology},
      {"deform", "power-series deformation of the model on the torus", cmd_deform},
  };
  std::vector<std::pair<CLI::App*, const Cmd*>> subs;
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    subs.emplace_back(sub, &c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kConfig;
  }

  const Cmd* cmd = nullptr;
  for (auto& [sub, c] : subs)
    if (sub->parsed()) cmd = c;
  cfg.command = cmd->name;

  calib::json result;
  int rc = kPass;
  std::optional<calib::json> failure;
  try {
    rc = cmd->fn(cfg, result) ? kPass : kFail;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    // numerical failure: still emit a report
    failure = calib::json{{"error", e.what()}};
    rc = kFail;
  }

  calib::json report{{"tool", {{"name", "calib"}, {"version", kToolVersion}}},
                     {"config", cfg.echo()},
                     {"exit_code", rc}};
  if (failure)
    report["failure"] = *failure;
  else
    report["result"] = result;

  std::string text = report.dump(2) + "\n";
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(cfg.out);
    if (!f) {
      std::cerr << "error: cannot write " << cfg.out << "\n";
      return kConfig;
    }
    f << text;
  }
  return rc;
}
