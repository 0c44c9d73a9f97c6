// Command-line driver: scenario execution and CSV emission for the
// two-cylinder/Peltier time-optimal control toolkit.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "tecopt/dynamics.hpp"
#include "tecopt/io.hpp"
#include "tecopt/objective.hpp"
#include "tecopt/optimizer.hpp"
#include "tecopt/oracle.hpp"
#include "tecopt/spectral.hpp"

namespace fs = std::filesystem;
using namespace tecopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitNoHorizon = 4;

struct Context {
  Config cfg;
  SystemParams params;
  RadialMode radial;
  std::string out_dir;
  Manifest manifest;

  double gamma = 5.0;
  double horizon = 1020.0;
  int pieces = 5;

  std::string path(const std::string& name) const { return out_dir + "/" + name; }
};

double compute_ust(Context& ctx) {
  const double target = ctx.cfg.get_double("cost", "theta_av", 5.5);
  return find_ust(target, ctx.params, ctx.radial);
}

CostConfig cost_config(Context& ctx, double u_st) {
  const double target = ctx.cfg.get_double("cost", "theta_av", 5.5);
  CostConfig cc = CostConfig::make(ctx.params, ctx.radial, u_st, target, ctx.gamma);
  if (ctx.cfg.has("cost", "c1")) cc.c1 = ctx.cfg.get_double("cost", "c1", cc.c1);
  if (ctx.cfg.has("cost", "c2")) cc.c2 = ctx.cfg.get_double("cost", "c2", cc.c2);
  if (ctx.cfg.has("cost", "eps_band")) cc.eps_band = ctx.cfg.get_double("cost", "eps_band", cc.eps_band);
  const auto rep = validate_penalty_constants(cc);
  if (!rep.all_pass())
    throw ConfigError("penalty constants fail the shape conditions (worst ratios: inner " +
                      fmt12(rep.inner.worst_ratio) + ", mid " + fmt12(rep.mid.worst_ratio) +
                      ", outer " + fmt12(rep.outer.worst_ratio) + ")");
  return cc;
}

DescentConfig descent_config(Context& ctx) {
  DescentConfig d;
  d.n_pieces = ctx.pieces;
  d.step = ctx.cfg.get_double("descent", "step", d.step);
  d.fd_step = ctx.cfg.get_double("descent", "fd_step", d.fd_step);
  d.max_iters = ctx.cfg.get_int("descent", "max_iters", d.max_iters);
  d.rel_tol = ctx.cfg.get_double("descent", "rel_tol", d.rel_tol);
  d.init_control = ctx.cfg.get_list("descent", "init_control");
  return d;
}

OracleOptions oracle_options(Context& ctx) {
  OracleOptions o;
  o.nr = ctx.cfg.get_int("oracle", "nr", o.nr);
  o.nz = ctx.cfg.get_int("oracle", "nz", o.nz);
  o.n_pe = ctx.cfg.get_int("oracle", "n_pe", o.n_pe);
  o.dt = ctx.cfg.get_double("oracle", "dt", o.dt);
  return o;
}

ModalState initial_state(Context& ctx, BasisCache& cache, double u_st) {
  auto bundle = cache.get(u_st);
  ModalState st;
  st.basis = bundle->basis;
  st.coeffs = bundle->theta_ss;
  st.time = 0.0;
  return st;
}

void write_trajectory_csv(Context& ctx, const std::string& name, const Trajectory& traj) {
  CsvWriter csv(ctx.path(name), "t [s], u [V], u0 [V], U_total [V], norm ratio [-], theta_av [K], face jump [K]",
                {"t", "u", "u0", "U_total", "norm_V1_rel_initial", "theta_av_V1", "face_jump"});
  for (const auto& s : traj.samples)
    csv.row({s.t, s.u, s.u0, s.U_total, s.norm_rel, s.theta_av, s.jump});
  ctx.manifest.add(csv);
}

void write_sweep_csv(Context& ctx, const std::string& name, const SweepResult& sw) {
  CsvWriter csv(ctx.path(name), "T [s], F [-], F_d [-], F_p [-], max|u| [V], ratio [-], admissible {0,1}, iters [-]",
                {"T", "F", "F_d", "F_p", "max_abs_u", "terminal_ratio", "admissible", "iters"});
  for (const auto& e : sw.entries)
    csv.row({e.T, e.F, e.Fd, e.Fp, e.max_abs_u, e.terminal_ratio,
             e.admissible ? 1.0 : 0.0, static_cast<double>(e.iters)});
  ctx.manifest.add(csv);
}

void write_control_csv(Context& ctx, const std::string& name, const PiecewiseControl& c) {
  CsvWriter csv(ctx.path(name), "t_i [s], u_i [V], u0_i [V]", {"t_i", "u_i", "u0_i"});
  for (std::size_t i = 0; i < c.pieces(); ++i)
    csv.row({c.breakpoints[i], c.values[i], inverse_dead_zone(c.values[i], ctx.params)});
  ctx.manifest.add(csv);
}

void write_field_csv(Context& ctx, const std::string& name, const std::vector<double>& times,
                     const std::vector<FieldGrid>& grids) {
  CsvWriter csv(ctx.path(name), "t [s], r [m], z [m], theta [K]", {"t", "r", "z", "theta"});
  for (std::size_t s = 0; s < grids.size(); ++s)
    for (int j = 0; j < grids[s].nz(); ++j)
      for (int i = 0; i < grids[s].nr(); ++i)
        csv.row({times[s], grids[s].r[i], grids[s].z[j], grids[s].at(i, j)});
  ctx.manifest.add(csv);
}

int scenario_spectrum(Context& ctx) {
  CsvWriter csv(ctx.path("spectrum.csv"), "u [V], k [-], xi2 [-], nu [1/s], tau [s], norm_check [-]",
                {"u", "k", "xi2", "nu", "tau", "norm_check"});
  const double u_lo = ctx.cfg.get_double("spectrum", "u_min", -1.8);
  const double u_hi = ctx.cfg.get_double("spectrum", "u_max", 1.8);
  const double du = ctx.cfg.get_double("spectrum", "u_step", 0.2);
  const int K = ctx.cfg.get_int("spectrum", "modes", 5);
  for (double u = u_lo; u <= u_hi + 1e-12; u += du) {
    auto basis = axial_basis(u, ctx.params, K, ctx.radial);
    for (const auto& m : basis->modes) {
      double n2 = 0.0;
      for (int r = 0; r < 3; ++r)
        n2 += basis->nodes[r].crho * product_integral(m.regions[r], m.regions[r]);
      n2 *= 2.0 * kPi * basis->rf.Ir;
      csv.row({u, static_cast<double>(m.k), m.xi2, m.nu, -1.0 / m.nu, n2});
    }
  }
  ctx.manifest.add(csv);
  std::printf("spectrum written (%ld rows)\n", csv.rows());
  return kExitOk;
}

int scenario_steady(Context& ctx) {
  const double target = ctx.cfg.get_double("cost", "theta_av", 5.5);
  const double u_st = compute_ust(ctx);
  const auto profile = steady_profile(u_st, ctx.params, ctx.radial);
  const double th_av = average_temperature(profile, ctx.params);
  std::printf("u_st = %s V\n", fmt12(u_st).c_str());
  std::printf("theta_av(V1) = %s K (target %s K)\n", fmt12(th_av).c_str(), fmt12(target).c_str());

  CsvWriter prof(ctx.path("steady_profile.csv"), "z [m], psi [K]", {"z", "psi"});
  const int nz = 801;
  for (int i = 0; i < nz; ++i) {
    const double z = -ctx.params.z1 + 2.0 * ctx.params.z1 * i / (nz - 1);
    prof.row({z, profile.value(z)});
  }
  ctx.manifest.add(prof);

  CsvWriter field(ctx.path("steady_field.csv"), "r [m], z [m], theta [K]", {"r", "z", "theta"});
  const auto rf = RadialFactors::make(ctx.radial, ctx.params);
  for (int j = 0; j < 201; ++j) {
    const double z = -ctx.params.z1 + 2.0 * ctx.params.z1 * j / 200;
    for (int i = 0; i < 41; ++i) {
      const double r = ctx.params.r1 * i / 40;
      field.row({r, z, profile.value(z) * std::cyl_bessel_j(0, rf.mu * r / ctx.params.r1)});
    }
  }
  ctx.manifest.add(field);
  return kExitOk;
}

int scenario_simulate(Context& ctx) {
  const double u_st = compute_ust(ctx);
  BasisCache cache(ctx.params, 4, ctx.radial);
  PiecewiseControl control;
  const std::string control_file = ctx.cfg.get_str("simulate", "control_file", "");
  if (!control_file.empty()) {
    control = read_control_file(control_file, ctx.horizon);
  } else {
    control = PiecewiseControl::uniform(
        ctx.horizon, std::vector<double>(static_cast<std::size_t>(ctx.pieces), 0.0));
  }
  auto init = initial_state(ctx, cache, u_st);
  const double sample_dt = ctx.cfg.get_double("simulate", "sample_dt", 1.0);
  auto traj = simulate(control, init, ctx.params, sample_dt, cache);
  write_trajectory_csv(ctx, "trajectory.csv", traj);
  std::printf("terminal ratio = %s, re-expansion residual = %s\n",
              fmt12(traj.samples.back().norm_rel).c_str(),
              fmt12(traj.reexpansion_residual).c_str());
  return kExitOk;
}

int scenario_optimize(Context& ctx) {
  const double u_st = compute_ust(ctx);
  BasisCache cache(ctx.params, 4, ctx.radial);
  auto cc = cost_config(ctx, u_st);
  auto dc = descent_config(ctx);
  auto init = initial_state(ctx, cache, u_st);
  auto res = descend(ctx.horizon, ctx.gamma, dc.init_control, dc, cc, init, ctx.params, cache);
  write_control_csv(ctx, "optimal_control.csv", res.control);
  auto traj = simulate(res.control, init, ctx.params,
                       ctx.cfg.get_double("simulate", "sample_dt", 1.0), cache);
  write_trajectory_csv(ctx, "optimal_trajectory.csv", traj);
  std::printf("T=%s gamma=%s: F=%s ratio=%s max|u|=%s (u_st=%s) iters=%d\n",
              fmt12(ctx.horizon).c_str(), fmt12(ctx.gamma).c_str(), fmt12(res.F).c_str(),
              fmt12(res.terminal_ratio).c_str(), fmt12(res.max_abs_u).c_str(),
              fmt12(u_st).c_str(), res.iters);
  return kExitOk;
}

int scenario_sweep(Context& ctx) {
  const double u_st = compute_ust(ctx);
  BasisCache cache(ctx.params, 4, ctx.radial);
  auto cc = cost_config(ctx, u_st);
  auto dc = descent_config(ctx);
  auto init = initial_state(ctx, cache, u_st);
  const double T0 = ctx.cfg.get_double("sweep", "T0", 1500.0);
  const double dT = ctx.cfg.get_double("sweep", "dT", 12.0);
  const double eps_t = ctx.cfg.get_double("sweep", "eps_terminal", 1e-2);
  auto sw = sweep_Tmin(T0, dT, ctx.gamma, eps_t, dc, cc, init, ctx.params, cache);
  write_sweep_csv(ctx, "sweep.csv", sw);
  if (!sw.T_min_estimate) {
    std::fprintf(stderr, "no admissible horizon in [%s, %s]\n", fmt12(T0 - dT).c_str(),
                 fmt12(T0).c_str());
    return kExitNoHorizon;
  }
  std::printf("T_min estimate (gamma=%s): %s s\n", fmt12(ctx.gamma).c_str(),
              fmt12(*sw.T_min_estimate).c_str());
  return kExitOk;
}

int scenario_oracle_compare(Context& ctx) {
  const double u_st = compute_ust(ctx);
  BasisCache cache(ctx.params, 4, ctx.radial);
  const auto opt = oracle_options(ctx);

  const double T = ctx.cfg.get_double("oracle", "horizon", 600.0);
  PiecewiseControl control = PiecewiseControl::uniform(T, {u_st});
  const std::string control_file = ctx.cfg.get_str("simulate", "control_file", "");
  if (!control_file.empty()) control = read_control_file(control_file, ctx.horizon);

  // spectral run from zero initial field
  ModalState zero;
  zero.basis = cache.get(control.values.front())->basis;
  zero.coeffs.assign(4, 0.0);
  auto traj = simulate(control, zero, ctx.params, 1.0, cache);

  std::vector<double> snap_times;
  for (double t = 60.0; t <= control.horizon() + 1e-9; t += 60.0) snap_times.push_back(t);
  auto grid = make_grid(ctx.params, opt);
  auto fd = fd_solve(control, grid, opt.dt, ctx.params, 1.0, snap_times);
  auto rep = compare(traj, fd, ctx.params);

  CsvWriter csv(ctx.path("oracle_compare.csv"), "t [s], rel L2(V1) error [-], |spec| [K m^1.5], |fd| [K m^1.5]",
                {"t", "rel_l2_v1", "norm_spec", "norm_fd"});
  for (const auto& r : rep.rows) csv.row({r.t, r.rel_l2_v1, r.norm_spec, r.norm_fd});
  ctx.manifest.add(csv);
  write_field_csv(ctx, "oracle_fields.csv", fd.snapshot_times, fd.snapshots);
  std::printf("oracle comparison: max rel error %s, mean %s\n", fmt12(rep.max_rel).c_str(),
              fmt12(rep.mean_rel).c_str());
  return kExitOk;
}

int scenario_reproduce_figs(Context& ctx) {
  const double u_st = compute_ust(ctx);
  BasisCache cache(ctx.params, 4, ctx.radial);
  auto cc = cost_config(ctx, u_st);
  auto dc = descent_config(ctx);
  auto init = initial_state(ctx, cache, u_st);

  // penalty curve (f vs u^2)
  {
    CsvWriter csv(ctx.path("fig2_penalty.csv"), "u [V], f [V^2], u2 [V^2]", {"u", "f", "u2"});
    for (int i = 0; i <= 400; ++i) {
      const double u = -1.2 * u_st + 2.4 * u_st * i / 400;
      csv.row({u, penalty_f(u, cc), u * u});
    }
    ctx.manifest.add(csv);
  }

  // cost, terminal norms and max|u| versus horizon for gamma = 3, 4, 5
  const double T0 = ctx.cfg.get_double("sweep", "T0", 1500.0);
  const double dT = ctx.cfg.get_double("sweep", "dT", 12.0);
  const double eps_t = ctx.cfg.get_double("sweep", "eps_terminal", 1e-2);
  std::vector<double> gammas = ctx.cfg.get_list("figs", "gammas");
  if (gammas.empty()) gammas = {3.0, 4.0, 5.0};
  std::optional<PiecewiseControl> fig6_control;
  for (double g : gammas) {
    auto sw = sweep_Tmin(T0, dT, g, eps_t, dc, cc, init, ctx.params, cache);
    char name[64];
    std::snprintf(name, sizeof(name), "fig345_sweep_gamma%g.csv", g);
    // natural-cooling reference per horizon for the fig-4 normalization
    CsvWriter csv(ctx.path(name),
                  "T [s], F [-], ratio_to_initial [-], ratio_to_natural [-], max|u| [V], admissible {0,1}",
                  {"T", "F", "terminal_ratio", "ratio_to_natural", "max_abs_u", "admissible"});
    for (const auto& e : sw.entries) {
      PiecewiseControl zero_c = PiecewiseControl::uniform(e.T, {0.0});
      auto natural = total_cost(zero_c, init, cc, ctx.params, cache);
      csv.row({e.T, e.F, e.terminal_ratio,
               natural.terminal_ratio > 0 ? e.terminal_ratio / natural.terminal_ratio : 0.0,
               e.max_abs_u, e.admissible ? 1.0 : 0.0});
      if (g == 5.0 && !fig6_control && std::abs(e.T - 1020.0) < dT / 2)
        fig6_control = PiecewiseControl::uniform(e.T, e.control);
    }
    ctx.manifest.add(csv);
  }

  // optimal piecewise control at the reference horizon
  const double Tref = ctx.cfg.get_double("figs", "horizon", 1020.0);
  if (!fig6_control) {
    auto res = descend(Tref, 5.0, dc.init_control, dc, cc, init, ctx.params, cache);
    fig6_control = res.control;
  }
  write_control_csv(ctx, "fig6_control.csv", *fig6_control);

  // trajectory with the feedback-reconstructed total voltage
  auto traj = simulate(*fig6_control, init, ctx.params, 1.0, cache);
  write_trajectory_csv(ctx, "fig9_total_voltage.csv", traj);

  // terminal fields: controlled vs natural cooling vs initial state
  const auto opt = oracle_options(ctx);
  auto grid0 = make_grid(ctx.params, opt);
  synthesize_on_grid(init, grid0, ctx.params);
  auto fd_ctrl = fd_solve(*fig6_control, grid0, opt.dt, ctx.params, 0.0, {fig6_control->horizon()});
  PiecewiseControl zero_c = PiecewiseControl::uniform(fig6_control->horizon(), {0.0});
  auto fd_nat = fd_solve(zero_c, grid0, opt.dt, ctx.params, 0.0, {zero_c.horizon()});
  write_field_csv(ctx, "fig7_initial_field.csv", {0.0}, {grid0});
  write_field_csv(ctx, "fig8_terminal_fields_controlled.csv", fd_ctrl.snapshot_times, fd_ctrl.snapshots);
  write_field_csv(ctx, "fig8_terminal_fields_natural.csv", fd_nat.snapshot_times, fd_nat.snapshots);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained time-optimal control toolkit for a two-cylinder Peltier stack"};
  std::string config_path, scenario, out_dir = "out";
  double gamma = 5.0, horizon = 1020.0;
  int pieces = 5;
  app.add_option("--config", config_path, "configuration file path");
  app.add_option("--scenario", scenario, "one of: spectrum, steady, simulate, optimize, sweep, oracle-compare, reproduce-figs")
      ->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--gamma", gamma, "cost weighting exponent");
  app.add_option("--horizon", horizon, "time horizon T, s");
  app.add_option("--pieces", pieces, "number of control pieces");
  CLI11_PARSE(app, argc, argv);

  try {
    Context ctx{config_path.empty() ? Config::from_string("")
                                    : Config::from_file(config_path),
                SystemParams{}, RadialMode{}, out_dir, Manifest{}};
    ctx.params = params_from_config(ctx.cfg);
    ctx.radial = radial_roots(0, 1, ctx.params)[0];
    ctx.gamma = gamma;
    ctx.horizon = horizon;
    ctx.pieces = pieces;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory: " + out_dir);

    int rc;
    if (scenario == "spectrum") rc = scenario_spectrum(ctx);
    else if (scenario == "steady") rc = scenario_steady(ctx);
    else if (scenario == "simulate") rc = scenario_simulate(ctx);
    else if (scenario == "optimize") rc = scenario_optimize(ctx);
    else if (scenario == "sweep") rc = scenario_sweep(ctx);
    else if (scenario == "oracle-compare") rc = scenario_oracle_compare(ctx);
    else if (scenario == "reproduce-figs") rc = scenario_reproduce_figs(ctx);
    else throw ConfigError("unknown scenario: " + scenario);

    ctx.manifest.write(ctx.path("manifest.txt"));
    return rc;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
}
