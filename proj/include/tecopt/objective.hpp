#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tecopt/dynamics.hpp"
#include "tecopt/params.hpp"
#include "tecopt/radial.hpp"
#include "tecopt/spectral.hpp"

namespace tecopt {

/// Weights and penalty constants of the cost F = 10^gamma F_d + F_p.
struct CostConfig {
  double gamma = 5.0;
  double c1 = 0.0;        ///< penalty scale, V^2
  double c2 = 0.0;        ///< penalty curvature, 1/V^2
  double u_st = 0.0;      ///< constraint bound, V
  double eps_band = 0.0;  ///< dead-band epsilon for the penalty shape checks, V
  double theta_av_ref = 5.5;  ///< reference average temperature, K
  double c_theta = 0.0;   ///< (|V1| theta_av^2)^{-1} 2 pi int r J0^2 dr, 1/(K^2 m)
  double c_u = 0.0;       ///< (rho_a c_a R |V1| theta_av)^{-1}, 1/(V^2 s)
  double exp_cap = 700.0; ///< overflow guard on c2 u^2

  /// Derived constants for a given bound and reference temperature. The
  /// penalty shape y = c2 u_st^2 = 40 rises about e^0.8 per percent of u_st
  /// near the bound, which keeps optimized controls within a percent of it
  /// while leaving f(u) << u^2 over most of the admissible band.
  static CostConfig make(const SystemParams& p, const RadialMode& radial, double u_st,
                         double theta_av_ref, double gamma) {
    const auto rf = RadialFactors::make(radial, p);
    CostConfig c;
    c.gamma = gamma;
    c.u_st = std::abs(u_st);
    c.theta_av_ref = theta_av_ref;
    const double y = 40.0;
    c.c2 = y / (c.u_st * c.u_st);
    c.c1 = 10.5 * c.u_st * c.u_st / (std::exp(y) - y - 1.0);
    c.eps_band = 0.06 * c.u_st;
    c.c_theta = 2.0 * kPi * rf.Ir / (p.cyl_volume() * theta_av_ref * theta_av_ref);
    c.c_u = 1.0 / (p.rho_a * p.c_a * p.resistance * p.cyl_volume() * theta_av_ref);
    return c;
  }
};

/// Exponential penalty f(u) = c1 (e^{c2 u^2} - c2 u^2 - 1); even, f(0) = 0,
/// strictly increasing in |u|. The exponent is capped at exp_cap (saturated
/// flag reported through the optional pointer).
inline double penalty_f(double u, const CostConfig& cfg, bool* saturated = nullptr) {
  double x = cfg.c2 * u * u;
  const bool sat = x > cfg.exp_cap;
  if (sat) x = cfg.exp_cap;
  if (saturated) *saturated = sat;
  if (x < 1e-3) {
    // series for e^x - x - 1: direct evaluation loses all digits here
    return cfg.c1 * (x * x) * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)));
  }
  return cfg.c1 * (std::exp(x) - x - 1.0);
}

/// Grid check of the penalty-shape conditions: f/u^2 small inside the band,
/// large outside the bound.
struct PenaltyReport {
  struct Condition {
    bool pass = false;
    double worst_ratio = 0.0;
    double worst_u = 0.0;
  };
  Condition inner;  ///< f/u^2 <= 1e-3 for |u| <= eps
  Condition mid;    ///< f/u^2 <= 0.2 for eps <= |u| <= u_st - eps
  Condition outer;  ///< f/u^2 >= 10 for |u| >= u_st
  bool all_pass() const { return inner.pass && mid.pass && outer.pass; }
};

inline PenaltyReport validate_penalty_constants(const CostConfig& cfg) {
  PenaltyReport rep;
  const int n = 1000;
  auto ratio = [&](double u) { return penalty_f(u, cfg) / (u * u); };

  rep.inner.pass = true;
  rep.inner.worst_ratio = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double u = cfg.eps_band * i / n;
    const double r = ratio(u);
    if (r > rep.inner.worst_ratio) {
      rep.inner.worst_ratio = r;
      rep.inner.worst_u = u;
    }
  }
  rep.inner.pass = rep.inner.worst_ratio <= 1e-3;

  rep.mid.worst_ratio = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = cfg.eps_band + (cfg.u_st - 2.0 * cfg.eps_band) * i / n;
    const double r = ratio(u);
    if (r > rep.mid.worst_ratio) {
      rep.mid.worst_ratio = r;
      rep.mid.worst_u = u;
    }
  }
  rep.mid.pass = rep.mid.worst_ratio <= 0.2;

  rep.outer.worst_ratio = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const double u = cfg.u_st + (3.0 * cfg.u_st - cfg.u_st) * i / n;
    const double r = ratio(u);
    if (r < rep.outer.worst_ratio) {
      rep.outer.worst_ratio = r;
      rep.outer.worst_u = u;
    }
  }
  rep.outer.pass = rep.outer.worst_ratio >= 10.0;
  return rep;
}

/// Terminal deviation cost F_d = c_theta ||theta(T)||^2 with the V1 norm
/// computed from exact axial antiderivatives of the mode products; the radial
/// factor of the volume integral lives inside c_theta.
inline double terminal_cost(const ModalState& terminal, const CostConfig& cfg) {
  const auto& b = *terminal.basis;
  double axial = 0.0;
  for (int i = 0; i < b.K; ++i)
    for (int j = 0; j < b.K; ++j)
      axial += terminal.coeffs[i] * b.gram_v1[i][j] * terminal.coeffs[j];
  return cfg.c_theta * std::max(0.0, axial);
}

inline double terminal_cost(const Trajectory& traj, const CostConfig& cfg) {
  return terminal_cost(traj.terminal, cfg);
}

/// Penalty integral F_p = c_u sum_i f(u_i) (t_{i+1} - t_i); exact for
/// piecewise-constant controls.
inline double penalty_integral(const PiecewiseControl& control, const CostConfig& cfg) {
  double acc = 0.0;
  for (std::size_t i = 0; i < control.pieces(); ++i)
    acc += penalty_f(control.values[i], cfg) *
           (control.breakpoints[i + 1] - control.breakpoints[i]);
  return cfg.c_u * acc;
}

struct CostResult {
  double F = 0.0;
  double Fd = 0.0;
  double Fp = 0.0;
  double terminal_ratio = 0.0;   ///< ||theta(T)|| / ||theta(0)|| in L2(V1)
  double max_abs_u = 0.0;
  double reexpansion_residual = 0.0;
  ModalState terminal;
};

/// Full cost of a control: simulates the modal system and combines the
/// weighted terminal norm with the penalty integral.
inline CostResult total_cost(const PiecewiseControl& control, const ModalState& init,
                             const CostConfig& cfg, const SystemParams& p,
                             BasisCache& cache) {
  auto traj = simulate(control, init, p, /*sample_dt=*/0.0, cache);
  CostResult r;
  r.Fd = terminal_cost(traj.terminal, cfg);
  r.Fp = penalty_integral(control, cfg);
  r.F = std::pow(10.0, cfg.gamma) * r.Fd + r.Fp;
  r.terminal_ratio = traj.initial_norm > 0.0
                         ? traj.terminal.basis->norm_v1(traj.terminal.coeffs) / traj.initial_norm
                         : 0.0;
  r.max_abs_u = 0.0;
  for (double v : control.values) r.max_abs_u = std::max(r.max_abs_u, std::abs(v));
  r.reexpansion_residual = traj.reexpansion_residual;
  r.terminal = traj.terminal;
  return r;
}

}  // namespace tecopt
