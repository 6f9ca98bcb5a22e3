#include "avgbound_cli/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "avgbound/io/csv.hpp"
#include "avgbound/kepler/kepler.hpp"
#include "avgbound/numerics/errors.hpp"
#include "avgbound/runner/runner.hpp"

namespace avgbound::cli {

namespace fs = std::filesystem;
using io::format_double;

namespace {

/// Values of the shared options as parsed; only the ones actually given
/// (on the command line or in the config file) override the preset.
struct RawOptions {
  std::string preset = "polar";
  double p0 = 0, e0 = 0, y0 = 0, epsilon = 0, orbits = 0;
  std::size_t theta_grid = 0, tau_grid = 0, sample_count = 0;
  double rk_abs_tol = 0, rk_rel_tol = 0, est_abs_tol = 0, est_rel_tol = 0;
  std::string inverse_mode = "approx", interp_mode = "cubic";
  bool grid_refine = true;
  std::string out_dir = "out";
  double l_budget = runner::LOptions{}.max_orbits;
  std::size_t grid_points = runner::LOptions{}.grid_points;
  double slack = 0.0;
};

struct Effective {
  std::string preset;
  j2::J2Config cfg;
  runner::LOptions lopt;
  double slack = 0.0;
  fs::path out_dir;
};

j2::J2Config preset_by_name(const std::string& name) {
  if (name == "polar") return j2::preset_polar();
  if (name == "cosb") return j2::preset_cosb();
  throw DomainError("unknown preset '" + name + "' (expected polar or cosb)");
}

bool given(const CLI::App& app, const std::string& name) { return app.get_option(name)->count() > 0; }

Effective resolve(const CLI::App& app, const RawOptions& o) {
  Effective e;
  e.preset = o.preset;
  e.cfg = preset_by_name(o.preset);
  auto& c = e.cfg;
  if (given(app, "--p0")) c.P0 = o.p0;
  if (given(app, "--e0")) c.E0 = o.e0;
  if (given(app, "--y0")) c.Y0 = o.y0;
  if (given(app, "--epsilon")) c.epsilon = o.epsilon;
  if (given(app, "--orbits")) c.orbits = o.orbits;
  if (given(app, "--theta_grid")) c.Q = o.theta_grid;
  if (given(app, "--tau_grid")) c.N = o.tau_grid;
  if (given(app, "--sample_count")) c.samples = o.sample_count;
  if (given(app, "--rk_abs_tol")) c.rk_abs_tol = o.rk_abs_tol;
  if (given(app, "--rk_rel_tol")) c.rk_rel_tol = o.rk_rel_tol;
  if (given(app, "--est_abs_tol")) c.est_abs_tol = o.est_abs_tol;
  if (given(app, "--est_rel_tol")) c.est_rel_tol = o.est_rel_tol;
  c.inverse = averaging::parse_inverse_mode(o.inverse_mode);
  c.interp = numerics::parse_interp_mode(o.interp_mode);
  c.grid_refine = o.grid_refine;
  c.validate();
  if (!(o.l_budget > 0.0)) throw DomainError("l_budget must be positive");
  if (o.grid_points < 2) throw DomainError("grid_points must be at least 2");
  if (!(o.slack >= 0.0)) throw DomainError("slack must be non-negative");
  e.lopt.max_orbits = o.l_budget;
  e.lopt.grid_points = o.grid_points;
  e.slack = o.slack;
  e.out_dir = o.out_dir;
  return e;
}

/// Keys equal the flag names, so a manifest can be fed back through --config.
io::KeyValues manifest_entries(const Effective& e) {
  const auto& c = e.cfg;
  return {
      {"preset", e.preset},
      {"p0", format_double(c.P0)},
      {"e0", format_double(c.E0)},
      {"y0", format_double(c.Y0)},
      {"epsilon", format_double(c.epsilon)},
      {"orbits", format_double(c.orbits)},
      {"theta_grid", std::to_string(c.Q)},
      {"tau_grid", std::to_string(c.N)},
      {"rk_abs_tol", format_double(c.rk_abs_tol)},
      {"rk_rel_tol", format_double(c.rk_rel_tol)},
      {"est_abs_tol", format_double(c.est_abs_tol)},
      {"est_rel_tol", format_double(c.est_rel_tol)},
      {"inverse_mode", std::string(averaging::to_string(c.inverse))},
      {"interp_mode", std::string(numerics::to_string(c.interp))},
      {"grid_refine", c.grid_refine ? "true" : "false"},
      {"sample_count", std::to_string(c.samples)},
      {"l_budget", format_double(e.lopt.max_orbits)},
      {"grid_points", std::to_string(e.lopt.grid_points)},
      {"slack", format_double(e.slack)},
  };
}

void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DomainError("out_dir '" + dir.string() + "' is not a writable directory");
  const fs::path probe = dir / ".avgbound_probe";
  {
    std::ofstream os(probe);
    if (!os) throw DomainError("out_dir '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

void write_manifest(const Effective& e, const std::string& subcommand) {
  const fs::path path = e.out_dir / "manifest.txt";
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write '" + path.string() + "'");
  os << "# avgbound " << subcommand << "\n";
  for (const auto& [k, v] : manifest_entries(e)) os << k << '=' << v << '\n';
  if (!os.flush()) throw Error("write failure on '" + path.string() + "'");
}

void print(std::ostream& out, const io::KeyValues& kv) {
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

io::KeyValues n_summary(const runner::RunArtifacts& run) {
  const auto& fp = run.fixed_point;
  const auto& est = run.estimator;
  io::KeyValues kv{
      {"fixed_point_iterations", std::to_string(fp.iterations)},
      {"fixed_point_residual", format_double(fp.residual)},
      {"contraction", format_double(fp.contraction)},
      {"hypotheses_ok", fp.hypotheses_ok() ? "true" : "false"},
      {"ell0_P", format_double(fp.ell0[0])},
      {"ell0_E", format_double(fp.ell0[1])},
      {"ell0_Y", format_double(fp.ell0[2])},
      {"estimator_completed", est.completed ? "true" : "false"},
      {"estimator_reached_tau", format_double(est.reached)},
      {"estimator_steps", std::to_string(est.steps)},
      {"seconds_a0", format_double(run.timings.a0)},
      {"seconds_fixed_point", format_double(run.timings.fixed_point)},
      {"seconds_estimator", format_double(run.timings.estimator)},
      {"seconds_total", format_double(run.timings.total)},
  };
  if (!est.completed) kv.emplace_back("estimator_failure", est.failure);
  if (est.completed) {
    const Vector n = est.n(est.horizon);
    kv.emplace_back("n_P_at_U", format_double(n[0]));
    kv.emplace_back("n_E_at_U", format_double(n[1]));
    kv.emplace_back("n_Y_at_U", format_double(n[2]));
  }
  return kv;
}

void write_l_csv(const runner::LOperation& l, const fs::path& path) {
  io::CsvTable t{{"t_orbits", "L_P", "L_E", "L_Y"}, {}};
  for (std::size_t k = 0; k < l.grid.size(); ++k) {
    const Vector v = l.grid.node_value(k);
    t.rows.push_back({l.grid.nodes()[k], v[0], v[1], v[2]});
  }
  io::write_csv(path, t);
}

io::KeyValues l_summary(const runner::LOperation& l) {
  return {{"l_steps_accepted", std::to_string(l.stats.accepted)},
          {"l_steps_rejected", std::to_string(l.stats.rejected)},
          {"l_seconds", format_double(l.seconds)}};
}

int run_estimate(const Effective& e, std::ostream& out) {
  const auto run = runner::run_n_operation(e.cfg);
  if (!run.estimator.sample_tau.empty()) io::emit_csv(run.estimator, e.out_dir / "estimator.csv");
  const auto kv = n_summary(run);
  io::write_key_values(e.out_dir / "summary.txt", kv);
  print(out, kv);
  return run.verified() ? kSuccess : kNumericalFailure;
}

int run_validate(const Effective& e, std::ostream& out) {
  const auto l = runner::run_l_operation(e.cfg, e.lopt);
  write_l_csv(l, e.out_dir / "l_operation.csv");
  const auto kv = l_summary(l);
  io::write_key_values(e.out_dir / "summary.txt", kv);
  print(out, kv);
  return kSuccess;
}

int run_compare(const Effective& e, std::ostream& out) {
  const auto run = runner::run_n_operation(e.cfg);
  if (!run.estimator.sample_tau.empty()) io::emit_csv(run.estimator, e.out_dir / "estimator.csv");
  auto kv = n_summary(run);
  if (!run.verified()) {
    io::write_key_values(e.out_dir / "summary.txt", kv);
    print(out, kv);
    return kNumericalFailure;
  }
  const auto l = runner::run_l_operation(e.cfg, e.lopt);
  write_l_csv(l, e.out_dir / "l_operation.csv");
  for (auto& p : l_summary(l)) kv.push_back(std::move(p));
  const auto rep = runner::compare(run.estimator, l, e.cfg, e.slack);
  io::emit_csv(rep, e.out_dir / "comparison.csv");
  static constexpr const char* kNames[3] = {"P", "E", "Y"};
  for (int i = 0; i < 3; ++i) {
    kv.emplace_back(std::string("dominance_") + kNames[i], rep.dominance[i] ? "true" : "false");
    kv.emplace_back(std::string("max_ratio_") + kNames[i], format_double(rep.max_ratio[i]));
    kv.emplace_back(std::string("max_ratio_t_") + kNames[i], format_double(rep.max_ratio_time[i]));
  }
  kv.emplace_back("checked_points", std::to_string(rep.checked_points));
  if (rep.first_violation) kv.emplace_back("first_violation_t", format_double(*rep.first_violation));
  kv.emplace_back("dominance", rep.all_dominated() ? "true" : "false");
  io::write_key_values(e.out_dir / "summary.txt", kv);
  print(out, kv);
  return rep.all_dominated() ? kSuccess : kNumericalFailure;
}

int run_preset(const Effective& e, std::ostream& out) {
  print(out, manifest_entries(e));
  return kSuccess;
}

struct ElementsArgs {
  std::vector<double> state;  // rho_dot, theta_dot, rho, theta
  std::vector<double> apsides;  // rho_plus, rho_minus (m)
};

int run_elements(const Effective& e, const ElementsArgs& a, std::ostream& out) {
  const auto planet = e.cfg.planet;
  io::KeyValues kv;
  double P = e.cfg.P0, E = e.cfg.E0, Y = e.cfg.Y0, theta = 0.0;
  if (!a.state.empty()) {
    const kepler::PlanarState s{a.state[0], a.state[1], a.state[2], a.state[3]};
    const auto el = kepler::elements_from_state(s, planet);
    P = el.P, E = el.E, Y = el.Y, theta = el.theta;
  } else if (!a.apsides.empty()) {
    const auto pe = kepler::elements_from_apsides(a.apsides[0], a.apsides[1], planet);
    P = pe.P, E = pe.E;
  }
  const auto geo = kepler::apsides_and_period(P, E, planet);
  const auto st = kepler::state_from_elements({P, E, Y, theta}, planet);
  kv = {{"P", format_double(P)},
        {"E", format_double(E)},
        {"Y", format_double(Y)},
        {"theta", format_double(theta)},
        {"rho_plus_km", format_double(geo.rho_plus / 1e3)},
        {"rho_minus_km", format_double(geo.rho_minus / 1e3)},
        {"period_h", format_double(geo.T_orb / 3600.0)},
        {"rho_dot", format_double(st.rho_dot)},
        {"theta_dot", format_double(st.theta_dot)},
        {"rho", format_double(st.rho)}};
  io::write_key_values(e.out_dir / "elements.txt", kv);
  print(out, kv);
  return kSuccess;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Error envelopes for first-order averaging of the polar J2 problem"};
  app.name("avgbound");
  app.fallthrough();
  app.require_subcommand(1);

  RawOptions o;
  app.set_config("--config", "", "Flat key=value file; keys are flag names, flags given on the command line win");
  app.allow_config_extras(false);
  app.add_option("--preset", o.preset, "Initial data and Earth constants: polar or cosb")
      ->check(CLI::IsMember({"polar", "cosb"}));
  app.add_option("--p0", o.p0, "Initial parameter P (units of R)");
  app.add_option("--e0", o.e0, "Initial eccentricity");
  app.add_option("--y0", o.y0, "Initial pericenter argument (rad)");
  app.add_option("--epsilon", o.epsilon, "Perturbation size J2/2");
  app.add_option("--orbits", o.orbits, "Horizon U/epsilon in orbits");
  app.add_option("--theta_grid", o.theta_grid, "Angle grid size Q");
  app.add_option("--tau_grid", o.tau_grid, "Number of tau cells N");
  app.add_option("--rk_abs_tol", o.rk_abs_tol, "Absolute tolerance of the direct integration");
  app.add_option("--rk_rel_tol", o.rk_rel_tol, "Relative tolerance of the direct integration");
  app.add_option("--est_abs_tol", o.est_abs_tol, "Absolute tolerance of the estimator ODE");
  app.add_option("--est_rel_tol", o.est_rel_tol, "Relative tolerance of the estimator ODE");
  app.add_option("--inverse_mode", o.inverse_mode, "approx or exact")->check(CLI::IsMember({"approx", "exact"}));
  app.add_option("--interp_mode", o.interp_mode, "cubic or lagrange")->check(CLI::IsMember({"cubic", "lagrange"}));
  app.add_option("--grid_refine", o.grid_refine, "Polish each angle-grid max by golden-section search");
  app.add_option("--sample_count", o.sample_count, "Estimator samples written to CSV");
  app.add_option("--out_dir", o.out_dir, "Output directory");
  app.add_option("--l_budget", o.l_budget, "Largest horizon (orbits) accepted by the direct integration");
  app.add_option("--grid_points", o.grid_points, "Comparison grid size");
  app.add_option("--slack", o.slack, "Relative slack in the dominance test");

  auto* estimate = app.add_subcommand("estimate", "Error envelopes (a0 table, fixed point, estimator ODE)");
  auto* validate = app.add_subcommand("validate", "Direct integration of the rescaled error L");
  auto* compare = app.add_subcommand("compare", "Envelopes, direct integration and dominance report");
  auto* elements = app.add_subcommand("elements", "Element, state and apsides conversions");
  auto* preset = app.add_subcommand("preset", "Show a preset configuration");

  ElementsArgs ea;
  elements->add_option("--state", ea.state, "rho_dot theta_dot rho theta (SI, rad)")->expected(4);
  elements->add_option("--apsides", ea.apsides, "rho_plus rho_minus (m)")->expected(2);
  std::string preset_name;
  preset->add_option("name", preset_name, "polar or cosb")->required()->check(CLI::IsMember({"polar", "cosb"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  std::string subcommand = app.get_subcommands().front()->get_name();
  Effective eff;
  try {
    if (preset->parsed()) {
      if (given(app, "--preset") && o.preset != preset_name) {
        throw DomainError("preset '" + preset_name + "' conflicts with --preset " + o.preset);
      }
      o.preset = preset_name;
    }
    eff = resolve(app, o);
    prepare_out_dir(eff.out_dir);
  } catch (const Error& e) {
    err << "avgbound: " << e.what() << '\n' << app.help();
    return kUsageError;
  }

  try {
    write_manifest(eff, subcommand);
    if (estimate->parsed()) return run_estimate(eff, out);
    if (validate->parsed()) return run_validate(eff, out);
    if (compare->parsed()) return run_compare(eff, out);
    if (elements->parsed()) return run_elements(eff, ea, out);
    return run_preset(eff, out);
  } catch (const std::exception& e) {
    err << "avgbound: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace avgbound::cli
