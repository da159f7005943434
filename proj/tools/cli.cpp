#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "phmbd/diagnostics.hpp"
#include "phmbd/integrate.hpp"
#include "phmbd/scenario.hpp"

namespace phmbd::cli {
namespace {

using nlohmann::json;

struct Common {
  std::string scenario;
  std::string integrator = "mp";
  std::optional<double> h;
  std::optional<double> t_end;
  double tol = 1e-9;
  std::string out;
  std::uint64_t seed = 0;  // reserved; the dynamics are deterministic
};

void add_common(CLI::App* sub, Common& c, bool with_h = true) {
  sub->add_option("--scenario", c.scenario, "scenario file or bundled name")->required();
  sub->add_option("--integrator", c.integrator, "mp | mp-ggl")->check(CLI::IsMember({"mp", "mp-ggl"}));
  if (with_h) sub->add_option("--h", c.h, "time step (default: scenario value)");
  sub->add_option("--t-end", c.t_end, "final time (default: scenario value)");
  sub->add_option("--tol", c.tol, "Newton tolerance on the max-norm residual")->capture_default_str();
  sub->add_option("--out", c.out, "output path");
  sub->add_option("--seed", c.seed, "reserved");
}

std::string fmt17(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

json failure_record(const StepFailure& f) {
  return {{"status", "newton_failure"}, {"step", f.step},     {"time", f.t},
          {"residual_norm", f.residual_norm}, {"iterations", f.iterations}, {"reason", f.reason}};
}

void write_csv(std::ostream& os, const MultibodySystem& sys, const Trajectory& traj, const DiagnosticsReport& rep) {
  const int n = sys.n(), m = sys.m();
  os << "t";
  for (int i = 0; i < n; ++i) os << ",q" << i;
  for (int i = 0; i < n; ++i) os << ",v" << i;
  for (int i = 0; i < m; ++i) os << ",lambda" << i;
  os << ",H,Lx,Ly,Lz,max_g,max_gv,newton_iters\n";
  for (size_t k = 0; k < traj.states.size(); ++k) {
    const SystemState& s = traj.states[k];
    os << fmt17(s.t);
    for (int i = 0; i < n; ++i) os << ',' << fmt17(s.q[i]);
    for (int i = 0; i < n; ++i) os << ',' << fmt17(s.v[i]);
    for (int i = 0; i < m; ++i) os << ',' << fmt17(s.lambda[i]);
    os << ',' << fmt17(rep.H[k]) << ',' << fmt17(rep.L[k][0]) << ',' << fmt17(rep.L[k][1]) << ','
       << fmt17(rep.L[k][2]) << ',' << fmt17(rep.max_g[k]) << ',' << fmt17(rep.max_gv[k]) << ','
       << traj.newton_iterations[k] << '\n';
  }
}

json summary_json(const Trajectory& traj, const DiagnosticsReport& rep) {
  json s = {{"steps", static_cast<long>(traj.states.size()) - 1},
            {"completed", traj.completed()},
            {"t_final", traj.states.back().t},
            {"H0", rep.H.front()},
            {"max_relative_energy_drift", rep.max_relative_energy_drift},
            {"max_momentum_drift", {rep.max_momentum_drift[0], rep.max_momentum_drift[1], rep.max_momentum_drift[2]}},
            {"max_g", rep.max_constraint},
            {"max_gv", rep.max_velocity_constraint}};
  if (traj.failure) s["failure"] = failure_record(*traj.failure);
  return s;
}

struct Loaded {
  ScenarioConfig config;
  BuiltSystem built;
};

Loaded load(const std::string& name) {
  ScenarioConfig cfg = parse_scenario(resolve_scenario(name));
  BuiltSystem built = build_system(cfg);
  return {std::move(cfg), std::move(built)};
}

int cmd_simulate(const Common& c, std::ostream& out, std::ostream& err) {
  Loaded l = load(c.scenario);
  IntegratorConfig ic;
  ic.scheme = scheme_from_string(c.integrator);
  ic.h = c.h.value_or(l.config.h);
  ic.t_end = c.t_end.value_or(l.config.t_end);
  ic.newton_tol = c.tol;
  const MultibodySystem& sys = l.built.system;
  const Trajectory traj = simulate(sys, l.built.initial, ic);
  const DiagnosticsReport rep = conservation_report(traj, sys);

  if (!c.out.empty()) {
    std::ofstream csv(c.out);
    if (!csv) throw ConfigurationError("cannot open '" + c.out + "' for writing");
    write_csv(csv, sys, traj, rep);
    json side = {{"scenario", json::parse(serialize_scenario(l.config))},
                 {"integrator", to_string(ic.scheme)},
                 {"h", ic.h},
                 {"t_end", ic.t_end},
                 {"tol", ic.newton_tol},
                 {"seed", c.seed},
                 {"summary", summary_json(traj, rep)}};
    std::ofstream js(c.out + ".json");
    js << std::setw(2) << side << '\n';
  }

  out << "scenario " << (l.config.name.empty() ? c.scenario : l.config.name) << ", " << to_string(ic.scheme)
      << ", h = " << ic.h << ", steps = " << traj.states.size() - 1 << '\n';
  out << std::scientific << std::setprecision(3);
  out << "  max |H - H0| / |H0| = " << rep.max_relative_energy_drift << '\n';
  out << "  max |L - L0|        = (" << rep.max_momentum_drift[0] << ", " << rep.max_momentum_drift[1] << ", "
      << rep.max_momentum_drift[2] << ")\n";
  out << "  max |g|             = " << rep.max_constraint << '\n';
  out << "  max |G v|           = " << rep.max_velocity_constraint << '\n';
  out << std::defaultfloat;
  if (traj.failure) {
    err << failure_record(*traj.failure).dump() << '\n';
    return kExitNewton;
  }
  return kExitOk;
}

int cmd_converge(const Common& c, const std::vector<double>& hs, double ref_h, double tbar, std::ostream& out,
                 std::ostream& err) {
  Loaded l = load(c.scenario);
  const MultibodySystem& sys = l.built.system;
  IntegratorConfig ic;
  ic.scheme = scheme_from_string(c.integrator);
  ic.t_end = tbar;
  ic.newton_tol = c.tol;
  ic.h = ref_h;
  const Trajectory ref = simulate(sys, l.built.initial, ic);
  if (ref.failure) {
    err << failure_record(*ref.failure).dump() << '\n';
    return kExitNewton;
  }
  std::vector<ErrorSet> errors;
  for (double h : hs) {
    ic.h = h;
    const Trajectory traj = simulate(sys, l.built.initial, ic);
    if (traj.failure) {
      err << failure_record(*traj.failure).dump() << '\n';
      return kExitNewton;
    }
    errors.push_back(rms_error(traj, ref, tbar, sys));
  }
  const ConvergenceOrders o = convergence_orders(hs, errors);

  out << std::left << std::setw(12) << "h" << std::setw(13) << "err_q" << std::setw(13) << "err_v" << std::setw(13)
      << "err_lambda" << std::setw(13) << "err_H" << "err_L\n";
  out << std::scientific << std::setprecision(4);
  for (size_t i = 0; i < hs.size(); ++i) {
    out << std::setw(12) << hs[i] << std::setw(13) << errors[i].q << std::setw(13) << errors[i].v << std::setw(13)
        << errors[i].lambda << std::setw(13) << errors[i].H << errors[i].L << '\n';
  }
  out << std::fixed << std::setprecision(3);
  out << std::setw(12) << "slope" << std::setw(13) << o.q.slope << std::setw(13) << o.v.slope << std::setw(13)
      << o.lambda.slope << std::setw(13) << o.H.slope << o.L.slope << '\n';
  out << std::defaultfloat;

  if (!c.out.empty()) {
    std::ofstream csv(c.out);
    if (!csv) throw ConfigurationError("cannot open '" + c.out + "' for writing");
    csv << "h,err_q,err_v,err_lambda,err_H,err_L\n";
    for (size_t i = 0; i < hs.size(); ++i) {
      csv << fmt17(hs[i]) << ',' << fmt17(errors[i].q) << ',' << fmt17(errors[i].v) << ','
          << fmt17(errors[i].lambda) << ',' << fmt17(errors[i].H) << ',' << fmt17(errors[i].L) << '\n';
    }
  }
  return kExitOk;
}

int cmd_init_velocities(const Common& c, const std::vector<double>& omega, std::ostream& out) {
  ScenarioConfig cfg = parse_scenario(resolve_scenario(c.scenario));
  const SliderCrankGeometry g = slider_crank_geometry(cfg);
  const SliderCrankVelocities sol = slider_crank_initial_velocities(g, Vec3(omega[0], omega[1], omega[2]));
  for (size_t k = 0; k < sol.velocities.size(); ++k) cfg.bodies[k].initial_velocity = sol.velocities[k];

  const BuiltSystem built = build_system(cfg);
  const Vec gv = built.system.constraint_jacobian(built.initial.q) * built.initial.v;

  out << std::setprecision(9);
  out << "crank velocity  " << sol.crank_velocity.transpose() << '\n';
  out << "rod velocity    " << sol.rod_velocity.transpose() << '\n';
  out << "rod omega       " << sol.rod_omega.transpose() << '\n';
  out << "slide rate      " << sol.slide_rate << '\n';
  for (size_t k = 0; k < sol.velocities.size(); ++k)
    out << "body " << k << " initial_velocity " << sol.velocities[k].transpose() << '\n';
  out << "max |G v|       " << gv.lpNorm<Eigen::Infinity>() << '\n';
  out << std::defaultfloat;
  if (!c.out.empty()) {
    std::ofstream js(c.out);
    if (!js) throw ConfigurationError("cannot open '" + c.out + "' for writing");
    js << serialize_scenario(cfg) << '\n';
  }
  return kExitOk;
}

int cmd_validate(const Common& c, std::ostream& out) {
  Loaded l = load(c.scenario);
  const MultibodySystem& sys = l.built.system;
  const Vec& q = l.built.initial.q;
  const Vec& v = l.built.initial.v;
  out << "scenario " << (l.config.name.empty() ? c.scenario : l.config.name) << ": ok\n";
  out << "  bodies " << sys.body_count() << ", joints " << sys.joints().size() << ", loads " << sys.loads().size()
      << '\n';
  out << "  n = " << sys.n() << ", m = " << sys.m() << '\n';
  out << std::scientific << std::setprecision(3);
  out << "  max |g(q0)|    = " << sys.constraints(q).lpNorm<Eigen::Infinity>() << '\n';
  out << "  max |G(q0) v0| = " << (sys.constraint_jacobian(q) * v).lpNorm<Eigen::Infinity>() << '\n';
  out << "  sigma_min(G)   = " << sys.constraint_rank_margin(q) << '\n';
  out << std::setprecision(17) << std::defaultfloat;
  out << "  H0 = " << hamiltonian(sys, q, v) << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Port-Hamiltonian multibody simulator"};
  app.set_help_flag("--help", "print usage");  // -h would clash with --h
  app.require_subcommand(1);

  Common sim, conv, init, val;
  auto* s_sim = app.add_subcommand("simulate", "integrate a scenario and report diagnostics");
  add_common(s_sim, sim);

  auto* s_conv = app.add_subcommand("converge", "RMS error and convergence slopes against a fine reference");
  add_common(s_conv, conv, false);
  std::vector<double> hs{1e-2, 1e-3, 1e-4};
  double ref_h = 1e-5, tbar = 0.02;
  s_conv->add_option("--h", hs, "comma separated step sizes")->delimiter(',');
  s_conv->add_option("--ref-h", ref_h, "reference step size")->capture_default_str();
  s_conv->add_option("--tbar", tbar, "comparison time")->capture_default_str();

  auto* s_init = app.add_subcommand("init-velocities", "solve slider-crank initial velocities");
  add_common(s_init, init);
  std::vector<double> omega{6.0, 0.0, 0.0};
  s_init->add_option("--omega", omega, "crank angular velocity")->expected(3)->delimiter(',');

  auto* s_val = app.add_subcommand("validate", "parse, build and check a scenario");
  add_common(s_val, val);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*s_sim) return cmd_simulate(sim, out, err);
    if (*s_conv) return cmd_converge(conv, hs, ref_h, tbar, out, err);
    if (*s_init) return cmd_init_velocities(init, omega, out);
    if (*s_val) return cmd_validate(val, out);
  } catch (const ConfigurationError& e) {
    err << json{{"status", "configuration_error"}, {"message", e.what()}}.dump() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << json{{"status", "error"}, {"message", e.what()}}.dump() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace phmbd::cli
