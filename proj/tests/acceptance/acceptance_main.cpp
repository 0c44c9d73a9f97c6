// Acceptance suite: one quantitative reproduction criterion per entry, each
// printed as a single PASS/FAIL line with the measured values. Run with no
// arguments for the full suite or with criterion names (A1 ... A7).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tecopt/dynamics.hpp"
#include "tecopt/objective.hpp"
#include "tecopt/optimizer.hpp"
#include "tecopt/oracle.hpp"
#include "tecopt/spectral.hpp"

using namespace tecopt;

namespace {

const SystemParams kP{};

struct Check {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    } else if (!ok) {
      detail += "; " + what;
    }
  }
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Shared {
  RadialMode radial = radial_roots(0, 1, kP)[0];
  double u_st = find_ust(5.5, kP);
  BasisCache cache{kP};
  CostConfig cfg;
  ModalState init;

  Shared() {
    cfg = CostConfig::make(kP, radial, u_st, 5.5, 5.0);
    auto bundle = cache.get(u_st);
    init.basis = bundle->basis;
    init.coeffs = bundle->theta_ss;
  }
};

Shared& shared() {
  static Shared s;
  return s;
}

// ---------------------------------------------------------------------------

Check criterion_a1() {
  Check c;
  const double u_st = find_ust(5.5, kP);
  c.require(std::abs(u_st - 1.44) <= 0.05,
            "u_st = " + fmt(u_st) + " V, expected 1.44 +- 0.05 V");
  if (c.pass) c.detail = "u_st = " + fmt(u_st) + " V";
  return c;
}

Check criterion_a2() {
  Check c;
  auto& s = shared();
  for (double u : {0.0, s.u_st}) {
    auto basis = axial_basis(u, kP, 5, s.radial);
    auto taus = decay_times(*basis);
    for (int k = 0; k < 4; ++k)
      c.require(taus[k] >= 10.0, "tau_" + std::to_string(k) + "(u=" + fmt(u) + ") = " +
                                     fmt(taus[k]) + " s < 10 s");
    c.require(taus[4] <= 5.0,
              "tau_4(u=" + fmt(u) + ") = " + fmt(taus[4]) + " s > 5 s");
  }
  // the m = 1 radial family decays fast even for its slowest member
  auto roots = radial_roots(0, 2, kP);
  const double tau_m1 =
      kP.c_a * kP.rho_a * kP.r1 * kP.r1 / (kP.lambda_a * roots[1].mu * roots[1].mu);
  c.require(tau_m1 <= 5.0, "radial m=1 tau = " + fmt(tau_m1) + " s > 5 s");
  if (c.pass) c.detail = "spectral gap as stated";
  return c;
}

Check criterion_a3() {
  Check c;
  auto& s = shared();

  // constant u_st from the zero field over [0, 600 s]
  {
    PiecewiseControl control = PiecewiseControl::uniform(600.0, {s.u_st});
    ModalState zero;
    zero.basis = s.cache.get(s.u_st)->basis;
    zero.coeffs.assign(4, 0.0);
    auto traj = simulate(control, zero, kP, 1.0, s.cache);
    std::vector<double> snaps;
    for (double t = 60.0; t <= 600.0 + 1e-9; t += 60.0) snaps.push_back(t);
    auto grid = make_grid(kP);
    auto fd = fd_solve(control, grid, OracleOptions{}.dt, kP, 0.0, snaps);
    auto rep = compare(traj, fd, kP);
    double worst = 0.0, worst_t = 0.0;
    for (const auto& row : rep.rows) {
      if (row.rel_l2_v1 > worst) {
        worst = row.rel_l2_v1;
        worst_t = row.t;
      }
    }
    c.require(worst <= 0.03, "max rel L2(V1) error " + fmt(worst) + " at t = " + fmt(worst_t) +
                                 " s exceeds 3%");
    c.detail = "heating-run max error " + fmt(worst);
  }

  // optimized 5-piece control at T = 1020 s: terminal norms within 5%
  {
    DescentConfig dc;
    auto res = descend(1020.0, 5.0, {}, dc, s.cfg, s.init, kP, s.cache);
    auto traj = simulate(res.control, s.init, kP, 1.0, s.cache);
    auto grid = make_grid(kP);
    synthesize_on_grid(s.init, grid, kP);
    auto fd = fd_solve(res.control, grid, OracleOptions{}.dt, kP, 0.0, {1020.0});
    const double n_spec = traj.terminal.basis->norm_v1(traj.terminal.coeffs);
    const double n_fd = grid_norm_v1(fd.final_grid);
    const double rel = std::abs(n_spec - n_fd) / n_fd;
    c.require(rel <= 0.05, "terminal V1 norms differ by " + fmt(100 * rel) + "% (spec " +
                               fmt(n_spec) + ", oracle " + fmt(n_fd) + ")");
    c.detail += ", terminal-norm gap " + fmt(100 * rel) + "%";
  }
  return c;
}

Check criterion_a4() {
  Check c;
  auto& s = shared();
  auto control = PiecewiseControl::uniform(600.0, {0.0});
  auto traj = simulate(control, s.init, kP, 1.0, s.cache);

  auto b0 = s.cache.get(0.0)->basis;
  auto re = reexpand(s.init, b0);
  const double n0 = s.init.basis->norm_v1(s.init.coeffs);
  double worst = 0.0;
  for (const auto& sample : traj.samples) {
    std::vector<double> th(4);
    for (int i = 0; i < 4; ++i)
      th[i] = re.state.coeffs[i] * std::exp(b0->modes[i].nu * sample.t);
    const double expect = b0->norm_v1(th) / n0;
    worst = std::max(worst, std::abs(sample.norm_rel - expect));
  }
  c.require(worst <= 1e-10, "free-decay norm mismatch " + fmt(worst) + " > 1e-10");
  if (c.pass) c.detail = "max closed-form deviation " + fmt(worst);
  return c;
}

Check criterion_a5() {
  Check c;
  auto& s = shared();
  DescentConfig dc;
  auto res = descend(1020.0, 5.0, {}, dc, s.cfg, s.init, kP, s.cache);

  auto natural = total_cost(PiecewiseControl::uniform(1020.0, {0.0}), s.init, s.cfg, kP, s.cache);
  c.require(res.max_abs_u <= 1.01 * s.cfg.u_st,
            "max|u| = " + fmt(res.max_abs_u) + " V exceeds 1.01 u_st = " +
                fmt(1.01 * s.cfg.u_st) + " V");
  c.require(res.terminal_ratio <= 2e-2,
            "terminal ratio " + fmt(res.terminal_ratio) + " > 2e-2");
  c.require(res.terminal_ratio <= natural.terminal_ratio / 10.0,
            "terminal ratio " + fmt(res.terminal_ratio) + " not 10x below natural " +
                fmt(natural.terminal_ratio));
  if (c.pass)
    c.detail = "ratio " + fmt(res.terminal_ratio) + ", max|u| " + fmt(res.max_abs_u) +
               " V, natural " + fmt(natural.terminal_ratio);
  return c;
}

Check criterion_a6() {
  Check c;
  auto& s = shared();
  DescentConfig dc;

  auto sw5 = sweep_Tmin(1500.0, 12.0, 5.0, 1e-2, dc, s.cfg, s.init, kP, s.cache);
  if (!sw5.T_min_estimate) {
    c.require(false, "gamma=5 sweep found no admissible horizon");
  } else {
    const double t5 = *sw5.T_min_estimate;
    c.require(t5 >= 960.0 && t5 <= 1140.0,
              "gamma=5 boundary " + fmt(t5) + " s outside [960, 1140] s");
    c.detail = "gamma=5 T_min " + (sw5.T_min_estimate ? fmt(t5) : "none");
  }

  auto sw3 = sweep_Tmin(1500.0, 12.0, 3.0, 1e-2, dc, s.cfg, s.init, kP, s.cache);
  if (!sw3.T_min_estimate) {
    c.require(false, "gamma=3 sweep found no admissible horizon");
  } else {
    const double t3 = *sw3.T_min_estimate;
    c.require(t3 < 1000.0, "gamma=3 T_min " + fmt(t3) + " s not below 1000 s");
    c.detail += ", gamma=3 T_min " + fmt(t3);
  }
  return c;
}

Check criterion_a7() {
  Check c;
  auto& s = shared();

  // dead-zone roundtrip and Lipschitz
  {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(-25.0, 25.0);
    for (int i = 0; i < 1000; ++i) {
      const double u = uni(rng);
      const double back = dead_zone(inverse_dead_zone(u, kP), kP);
      if (std::abs(back - u) > 4.0 * std::numeric_limits<double>::epsilon() * std::abs(u)) {
        c.require(false, "dead-zone roundtrip broke at u = " + fmt(u));
        break;
      }
    }
    double prev_u = -5.0, prev_v = dead_zone(prev_u, kP);
    for (int i = 1; i <= 1000; ++i) {
      const double u = -5.0 + 10.0 * i / 1000;
      const double v = dead_zone(u, kP);
      if (std::abs(v - prev_v) > (u - prev_u) * (1 + 1e-12)) {
        c.require(false, "dead zone not 1-Lipschitz at u = " + fmt(u));
        break;
      }
      prev_u = u;
      prev_v = v;
    }
  }

  // orthogonality below 1e-8 for both reference bases
  for (double u : {0.0, s.u_st}) {
    auto basis = s.cache.get(u)->basis;
    double worst = 0.0;
    for (int j = 0; j < 4; ++j) {
      ModalState e;
      e.basis = basis;
      e.coeffs.assign(4, 0.0);
      e.coeffs[j] = 1.0;
      auto r = reexpand(e, basis);
      for (int i = 0; i < 4; ++i)
        worst = std::max(worst, std::abs(r.state.coeffs[i] - (i == j ? 1.0 : 0.0)));
    }
    c.require(worst < 1e-8, "orthogonality defect " + fmt(worst) + " at u = " + fmt(u));
  }

  // fixed point and semigroup
  {
    auto bundle = s.cache.get(s.u_st);
    ModalState st;
    st.basis = bundle->basis;
    st.coeffs = bundle->theta_ss;
    auto moved = propagate(st, 5000.0, bundle->G);
    for (int i = 0; i < 4; ++i)
      c.require(std::abs(moved.coeffs[i] - st.coeffs[i]) <
                    1e-10 * std::max(1.0, std::abs(st.coeffs[i])),
                "steady state drifted in component " + std::to_string(i));
    auto one = propagate(st, 100.0, bundle->G);
    auto two = propagate(propagate(st, 60.0, bundle->G), 40.0, bundle->G);
    for (int i = 0; i < 4; ++i)
      c.require(std::abs(one.coeffs[i] - two.coeffs[i]) <=
                    1e-12 * std::max(1.0, std::abs(one.coeffs[i])),
                "semigroup identity broke in component " + std::to_string(i));
  }

  // forward vs central finite differences
  {
    auto control = PiecewiseControl::uniform(800.0, {-1.0});
    const double delta = 1e-4;
    auto fwd = grad_fd(control, s.init, s.cfg, kP, s.cache, delta);
    auto cost_at = [&](double v) {
      auto cc = control;
      cc.values[0] = v;
      return total_cost(cc, s.init, s.cfg, kP, s.cache).F;
    };
    const double central = (cost_at(-1.0 + delta / 2) - cost_at(-1.0 - delta / 2)) / delta;
    c.require(std::abs(fwd[0] - central) <= 1e-4 * std::abs(central),
              "gradient schemes disagree: fwd " + fmt(fwd[0]) + " vs central " + fmt(central));
  }

  // penalty-condition report
  {
    const auto rep = validate_penalty_constants(s.cfg);
    c.require(rep.all_pass(), "penalty report failed (inner " + fmt(rep.inner.worst_ratio) +
                                  ", mid " + fmt(rep.mid.worst_ratio) + ", outer " +
                                  fmt(rep.outer.worst_ratio) + ")");
  }

  // descent monotonicity
  {
    DescentConfig dc;
    dc.max_iters = 30;
    auto res = descend(600.0, 4.0, {}, dc, s.cfg, s.init, kP, s.cache);
    for (std::size_t i = 1; i < res.f_history.size(); ++i)
      c.require(res.f_history[i] < res.f_history[i - 1],
                "accepted F sequence not strictly decreasing at step " + std::to_string(i));
  }

  // oracle heat-pumping direction from the steady start
  {
    OracleOptions opt;
    opt.nr = 20;
    opt.nz = 120;
    opt.n_pe = 8;
    opt.dt = 0.5;
    auto grid = make_grid(kP, opt);
    synthesize_on_grid(s.init, grid, kP);
    const double v1_before = grid_average(grid, true);
    const double v2_before = grid_average(grid, false);
    auto res = fd_solve(PiecewiseControl::uniform(200.0, {-s.u_st}), grid, opt.dt, kP, 0.0);
    c.require(grid_average(res.final_grid, true) < v1_before,
              "V1 average did not decrease under the cooling drive");
    c.require(grid_average(res.final_grid, false) > v2_before,
              "V2 average did not increase under the cooling drive");
  }

  if (c.pass) c.detail = "all property suites hold";
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::pair<std::string, std::function<Check()>>> criteria = {
      {"A1", {"steady-state voltage reproduces the reported value", criterion_a1}},
      {"A2", {"four slow modes with tau >= 10 s, fast fifth and radial family", criterion_a2}},
      {"A3", {"spectral solution tracks the finite-difference oracle", criterion_a3}},
      {"A4", {"free decay matches the closed form to 1e-10", criterion_a4}},
      {"A5", {"optimized control at T = 1020 s meets bound and tolerance", criterion_a5}},
      {"A6", {"sweep boundaries for gamma = 5 and gamma = 3", criterion_a6}},
      {"A7", {"property suites", criterion_a7}},
  };

  std::vector<std::string> selected;
  for (int i = 1; i < argc; ++i) selected.emplace_back(argv[i]);
  if (selected.empty())
    for (const auto& [name, _] : criteria) selected.push_back(name);

  int failures = 0;
  for (const auto& name : selected) {
    auto it = criteria.find(name);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion: %s\n", name.c_str());
      return 64;
    }
    const auto start = std::chrono::steady_clock::now();
    Check c;
    try {
      c = it->second.second();
    } catch (const std::exception& e) {
      c.pass = false;
      c.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s — %s (%s) [%.1f s]\n", name.c_str(), c.pass ? "PASS" : "FAIL",
                it->second.first.c_str(), c.detail.c_str(), secs);
    std::fflush(stdout);
    if (!c.pass) ++failures;
  }
  return failures;
}
