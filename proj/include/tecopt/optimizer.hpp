#pragma once

#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "tecopt/errors.hpp"
#include "tecopt/objective.hpp"

namespace tecopt {

/// Gradient-descent knobs for the fixed-horizon problem.
struct DescentConfig {
  int n_pieces = 5;
  double step = 1e-2;        ///< dimensionless step scale epsilon
  double fd_step = 1e-4;     ///< forward-difference delta, V
  int max_iters = 500;
  double rel_tol = 1e-8;     ///< relative improvement stop threshold on F
  std::vector<double> init_control;  ///< empty means all zeros (natural cooling)
};

/// Forward-difference gradient of the total cost; the n+1 evaluations run
/// concurrently (analytic forward solves, shared basis cache).
inline std::vector<double> grad_fd(const PiecewiseControl& control, const ModalState& init,
                                   const CostConfig& cfg, const SystemParams& p,
                                   BasisCache& cache, double delta, double* F0_out = nullptr) {
  auto base_fut = std::async(std::launch::async, [&] {
    return total_cost(control, init, cfg, p, cache).F;
  });
  std::vector<std::future<double>> futs;
  futs.reserve(control.pieces());
  for (std::size_t l = 0; l < control.pieces(); ++l) {
    futs.push_back(std::async(std::launch::async, [&, l] {
      PiecewiseControl c = control;
      c.values[l] += delta;
      return total_cost(c, init, cfg, p, cache).F;
    }));
  }
  const double F0 = base_fut.get();
  if (F0_out) *F0_out = F0;
  std::vector<double> g(control.pieces());
  for (std::size_t l = 0; l < control.pieces(); ++l) g[l] = (futs[l].get() - F0) / delta;
  return g;
}

struct DescentResult {
  PiecewiseControl control;
  double F = 0.0;
  double Fd = 0.0;
  double Fp = 0.0;
  double terminal_ratio = 0.0;
  double max_abs_u = 0.0;
  int iters = 0;           ///< accepted descent steps
  bool converged = false;  ///< stopped on rel_tol or a vanishing gradient
  std::vector<double> f_history;  ///< accepted F values, initial point first
};

/// Minimizes F over piecewise-constant controls by finite-difference gradient
/// descent with a backtracking step (halved until F decreases, up to 30
/// times). The accepted-F sequence is strictly decreasing.
inline DescentResult descend(double T, double gamma, const std::vector<double>& init_control,
                             const DescentConfig& dcfg, CostConfig cfg, const ModalState& init,
                             const SystemParams& p, BasisCache& cache) {
  if (!(T > 0)) throw std::invalid_argument("descend: T must be > 0");
  cfg.gamma = gamma;

  std::vector<double> u0 = init_control;
  if (u0.empty()) u0.assign(dcfg.n_pieces, 0.0);

  DescentResult res;
  res.control = PiecewiseControl::uniform(T, u0);
  CostResult cur = total_cost(res.control, init, cfg, p, cache);
  if (!std::isfinite(cur.F))
    throw NumericalError("descend: non-finite cost at the initial control");
  res.f_history.push_back(cur.F);

  for (int it = 0; it < dcfg.max_iters; ++it) {
    double F0 = 0.0;
    const auto g = grad_fd(res.control, init, cfg, p, cache, dcfg.fd_step, &F0);
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    if (gmax < 1e-14) {
      res.converged = true;
      break;
    }
    double scale = std::max(cfg.u_st, res.control.values.empty() ? 0.0 : 0.0);
    for (double v : res.control.values) scale = std::max(scale, std::abs(v));
    double step = dcfg.step * scale / gmax;

    bool accepted = false;
    PiecewiseControl trial = res.control;
    CostResult trial_cost;
    for (int half = 0; half < 30; ++half) {
      for (std::size_t l = 0; l < trial.values.size(); ++l)
        trial.values[l] = res.control.values[l] - step * g[l];
      trial_cost = total_cost(trial, init, cfg, p, cache);
      if (std::isfinite(trial_cost.F) && trial_cost.F < cur.F) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.converged = true;
      break;
    }
    const double rel = (cur.F - trial_cost.F) / std::max(cur.F, 1e-300);
    res.control = trial;
    cur = trial_cost;
    res.iters = it + 1;
    res.f_history.push_back(cur.F);
    if (rel < dcfg.rel_tol) {
      res.converged = true;
      break;
    }
  }
  res.F = cur.F;
  res.Fd = cur.Fd;
  res.Fp = cur.Fp;
  res.terminal_ratio = cur.terminal_ratio;
  res.max_abs_u = cur.max_abs_u;
  return res;
}

/// One horizon of the decreasing-T sweep.
struct SweepEntry {
  double T = 0.0;
  double F = 0.0;
  double Fd = 0.0;
  double Fp = 0.0;
  double max_abs_u = 0.0;
  double terminal_ratio = 0.0;
  bool admissible = false;
  int iters = 0;
  std::vector<double> control;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  std::optional<double> T_min_estimate;  ///< smallest admissible T_j, if any
};

/// Decreasing-horizon sweep T_j = T_{j-1} - dT, warm-started from the previous
/// optimum. A horizon is admissible when max|u| <= u_st (1 + 1e-2) and the
/// terminal ratio is within eps_terminal. Stops at the first inadmissible
/// horizon after at least one admissible one.
inline SweepResult sweep_Tmin(double T0, double dT, double gamma, double eps_terminal,
                              const DescentConfig& dcfg, const CostConfig& cfg,
                              const ModalState& init, const SystemParams& p,
                              BasisCache& cache) {
  if (!(T0 > dT && dT > 0)) throw std::invalid_argument("sweep_Tmin: need T0 > dT > 0");
  SweepResult out;
  std::vector<double> warm = dcfg.init_control;
  bool seen_admissible = false;
  for (double T = T0; T > dT; T -= dT) {
    const auto r = descend(T, gamma, warm, dcfg, cfg, init, p, cache);
    SweepEntry e;
    e.T = T;
    e.F = r.F;
    e.Fd = r.Fd;
    e.Fp = r.Fp;
    e.max_abs_u = r.max_abs_u;
    e.terminal_ratio = r.terminal_ratio;
    e.admissible = (r.max_abs_u <= cfg.u_st * 1.01) && (r.terminal_ratio <= eps_terminal);
    e.iters = r.iters;
    e.control = r.control.values;
    out.entries.push_back(e);
    if (e.admissible) {
      seen_admissible = true;
      out.T_min_estimate = T;
    } else if (seen_admissible) {
      break;
    }
    warm = r.control.values;
  }
  return out;
}

}  // namespace tecopt
