#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "tecopt/dynamics.hpp"
#include "tecopt/errors.hpp"
#include "tecopt/params.hpp"
#include "tecopt/spectral.hpp"

namespace tecopt {

/// Axisymmetric node grid for the finite-difference solver. Radial nodes are
/// clustered toward r1; axial nodes are uniform per region with +-z0 as grid
/// nodes. Field values are stored z-major: theta[j * nr_nodes + i].
struct FieldGrid {
  std::vector<double> r;      ///< size nr_nodes, 0 .. r1
  std::vector<double> z;      ///< -z1 .. z1, contains -z0 and z0 exactly
  int iz_bot = 0;             ///< index of z = -z0
  int iz_top = 0;             ///< index of z = +z0
  std::vector<double> theta;  ///< K, relative to theta0

  int nr() const { return static_cast<int>(r.size()); }
  int nz() const { return static_cast<int>(z.size()); }
  double& at(int i, int j) { return theta[static_cast<std::size_t>(j) * r.size() + i]; }
  double at(int i, int j) const { return theta[static_cast<std::size_t>(j) * r.size() + i]; }
};

struct OracleOptions {
  int nr = 40;       ///< radial intervals
  int nz = 400;      ///< total axial intervals (PE gets n_pe of them)
  int n_pe = 16;     ///< axial intervals across the PE (>= 8 advised)
  double dt = 0.05;  ///< time step, s
  double radial_stretch = 1.6;  ///< > 1 clusters radial nodes toward r1
};

inline FieldGrid make_grid(const SystemParams& p, const OracleOptions& opt = {}) {
  if (opt.nr < 4 || opt.n_pe < 2 || opt.nz < opt.n_pe + 4)
    throw std::invalid_argument("make_grid: grid too coarse");
  FieldGrid g;
  g.r.resize(opt.nr + 1);
  for (int i = 0; i <= opt.nr; ++i) {
    const double s = static_cast<double>(i) / opt.nr;
    g.r[i] = p.r1 * (1.0 - std::pow(1.0 - s, opt.radial_stretch));
  }
  g.r.front() = 0.0;
  g.r.back() = p.r1;

  const int ncyl = (opt.nz - opt.n_pe) / 2;
  g.z.reserve(2 * ncyl + opt.n_pe + 1);
  for (int j = 0; j <= ncyl; ++j)
    g.z.push_back(-p.z1 + (p.z1 - p.z0) * j / ncyl);
  for (int j = 1; j <= opt.n_pe; ++j)
    g.z.push_back(-p.z0 + 2.0 * p.z0 * j / opt.n_pe);
  for (int j = 1; j <= ncyl; ++j)
    g.z.push_back(p.z0 + (p.z1 - p.z0) * j / ncyl);
  g.iz_bot = ncyl;
  g.iz_top = ncyl + opt.n_pe;
  g.z[g.iz_bot] = -p.z0;
  g.z[g.iz_top] = p.z0;
  g.theta.assign(g.r.size() * g.z.size(), 0.0);
  return g;
}

namespace detail {

/// Finite-volume discretization of the IBVP for one control value:
/// M dtheta/dt = L theta + F. Cylinders carry the full axisymmetric
/// Laplacian with the lateral Robin condition; the PE conducts axially only
/// and carries the uniform Joule source; the interface half-cells receive the
/// Peltier surface term sigma (theta + theta0), a source at +z0 and a sink at
/// -z0. All angular factors of 2 pi are dropped consistently.
struct OracleOperator {
  Eigen::VectorXd mass;  // diagonal of M
  Eigen::SparseMatrix<double> L;
  Eigen::VectorXd F;
  std::vector<double> w_r;   // radial cell weights (r dr)
  std::vector<double> hz;    // axial cell heights

  OracleOperator(const FieldGrid& g, double u, const SystemParams& p) {
    const int nr = g.nr();
    const int nz = g.nz();
    const int n = nr * nz;
    const double sigma = p.seebeck * u / (p.resistance * p.face_area());
    const double joule = u * u / (p.resistance * p.pe_volume());

    w_r.assign(nr, 0.0);
    std::vector<double> r_half(nr + 1, 0.0);
    r_half[0] = 0.0;
    for (int i = 1; i < nr; ++i) r_half[i] = 0.5 * (g.r[i - 1] + g.r[i]);
    r_half[nr] = g.r[nr - 1];
    for (int i = 0; i < nr; ++i)
      w_r[i] = 0.5 * (r_half[i + 1] * r_half[i + 1] - r_half[i] * r_half[i]);

    hz.assign(nz, 0.0);
    for (int j = 0; j < nz; ++j) {
      const double lo = (j == 0) ? g.z[0] : 0.5 * (g.z[j - 1] + g.z[j]);
      const double hi = (j == nz - 1) ? g.z[nz - 1] : 0.5 * (g.z[j] + g.z[j + 1]);
      hz[j] = hi - lo;
    }

    mass = Eigen::VectorXd::Zero(n);
    F = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n) * 5);
    auto idx = [nr](int i, int j) { return j * nr + i; };
    auto add = [&](int a, int b, double v) { trips.emplace_back(a, b, v); };

    for (int j = 0; j < nz; ++j) {
      const bool pe_interior = (j > g.iz_bot && j < g.iz_top);
      const bool is_interface = (j == g.iz_bot || j == g.iz_top);
      for (int i = 0; i < nr; ++i) {
        const int k = idx(i, j);
        // split the axial cell into material halves
        const double h_dn = (j == 0) ? 0.0 : 0.5 * (g.z[j] - g.z[j - 1]);
        const double h_up = (j == nz - 1) ? 0.0 : 0.5 * (g.z[j + 1] - g.z[j]);
        double crho_dn, crho_up;
        if (is_interface) {
          crho_dn = (j == g.iz_top) ? p.c_p * p.rho_p : p.c_a * p.rho_a;
          crho_up = (j == g.iz_top) ? p.c_a * p.rho_a : p.c_p * p.rho_p;
        } else if (pe_interior) {
          crho_dn = crho_up = p.c_p * p.rho_p;
        } else {
          crho_dn = crho_up = p.c_a * p.rho_a;
        }
        mass[k] = (crho_dn * h_dn + crho_up * h_up) * w_r[i];

        // axial conduction
        if (j > 0) {
          const double lam = (j <= g.iz_bot || j > g.iz_top) ? p.lambda_a : p.lambda_p;
          const double cond = lam * w_r[i] / (g.z[j] - g.z[j - 1]);
          add(k, k, -cond);
          add(k, idx(i, j - 1), cond);
        }
        if (j < nz - 1) {
          const double lam = (j < g.iz_bot || j >= g.iz_top) ? p.lambda_a : p.lambda_p;
          const double cond = lam * w_r[i] / (g.z[j + 1] - g.z[j]);
          add(k, k, -cond);
          add(k, idx(i, j + 1), cond);
        }

        // radial conduction over the cylinder part of the cell only
        double h_cyl = 0.0;
        if (j < g.iz_bot || j > g.iz_top) h_cyl = h_dn + h_up;
        if (j == g.iz_bot) h_cyl = h_dn;
        if (j == g.iz_top) h_cyl = h_up;
        if (h_cyl > 0.0) {
          if (i > 0) {
            const double cond = p.lambda_a * r_half[i] * h_cyl / (g.r[i] - g.r[i - 1]);
            add(k, k, -cond);
            add(k, idx(i - 1, j), cond);
          }
          if (i < nr - 1) {
            const double cond = p.lambda_a * r_half[i + 1] * h_cyl / (g.r[i + 1] - g.r[i]);
            add(k, k, -cond);
            add(k, idx(i + 1, j), cond);
          }
          if (i == nr - 1) {  // lateral Robin through the outer face
            add(k, k, -p.alpha * p.r1 * h_cyl);
            F[k] += p.alpha * p.r1 * h_cyl * p.theta_A;
          }
        }

        // PE half-cells: Joule source
        double h_pe = 0.0;
        if (pe_interior) h_pe = h_dn + h_up;
        if (j == g.iz_bot) h_pe = h_up;
        if (j == g.iz_top) h_pe = h_dn;
        if (h_pe > 0.0) F[k] += joule * w_r[i] * h_pe;

        // Peltier surface term, source at +z0, sink at -z0
        if (is_interface) {
          const double s = (j == g.iz_top) ? sigma : -sigma;
          add(k, k, s * w_r[i]);
          F[k] += s * w_r[i] * p.theta0;
        }
      }
    }
    L.resize(n, n);
    L.setFromTriplets(trips.begin(), trips.end());
  }
};

}  // namespace detail

/// Crank-Nicolson stepper for a fixed control value and time step; the system
/// matrix is factorized once at construction.
class OracleStepper {
 public:
  OracleStepper(const FieldGrid& grid, double u, double dt, const SystemParams& p)
      : op_(grid, u, p), dt_(dt) {
    if (!(dt > 0)) throw std::invalid_argument("OracleStepper: dt must be > 0");
    const auto n = op_.L.rows();
    Eigen::SparseMatrix<double> M(n, n);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(n);
    for (Eigen::Index i = 0; i < n; ++i) trips.emplace_back(i, i, op_.mass[i] / dt);
    M.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseMatrix<double> Aimp = M - 0.5 * op_.L;
    Aexp_ = M + 0.5 * op_.L;
    solver_.compute(Aimp);
    if (solver_.info() != Eigen::Success)
      throw NumericalError("OracleStepper: factorization failed (dt=" + std::to_string(dt) + ")");
  }

  void step(FieldGrid& grid) const {
    Eigen::Map<Eigen::VectorXd> x(grid.theta.data(), static_cast<Eigen::Index>(grid.theta.size()));
    Eigen::VectorXd rhs = Aexp_ * x + op_.F;
    Eigen::VectorXd xn = solver_.solve(rhs);
    if (solver_.info() != Eigen::Success)
      throw NumericalError("OracleStepper: linear solve failed");
    x = xn;
  }

  const detail::OracleOperator& op() const { return op_; }

 private:
  detail::OracleOperator op_;
  double dt_;
  Eigen::SparseMatrix<double> Aexp_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> solver_;
};

/// One implicit step (theta-method, weight 0.5) of the full IBVP.
inline FieldGrid fd_step(const FieldGrid& grid, double u, double dt, const SystemParams& p) {
  OracleStepper st(grid, u, dt, p);
  FieldGrid out = grid;
  st.step(out);
  return out;
}

/// Grid quadrature weights over V1 (or V2) and diagnostics helpers.
inline double grid_norm_v1(const FieldGrid& g, bool top = true) {
  const int nr = g.nr();
  double acc = 0.0;
  std::vector<double> w_r(nr, 0.0);
  std::vector<double> r_half(nr + 1, 0.0);
  for (int i = 1; i < nr; ++i) r_half[i] = 0.5 * (g.r[i - 1] + g.r[i]);
  r_half[nr] = g.r[nr - 1];
  for (int i = 0; i < nr; ++i)
    w_r[i] = 0.5 * (r_half[i + 1] * r_half[i + 1] - r_half[i] * r_half[i]);
  const int j_lo = top ? g.iz_top : 0;
  const int j_hi = top ? g.nz() - 1 : g.iz_bot;
  for (int j = j_lo; j <= j_hi; ++j) {
    const double lo = (j == j_lo) ? g.z[j_lo] : 0.5 * (g.z[j - 1] + g.z[j]);
    const double hi = (j == j_hi) ? g.z[j_hi] : 0.5 * (g.z[j] + g.z[j + 1]);
    for (int i = 0; i < nr; ++i) acc += g.at(i, j) * g.at(i, j) * w_r[i] * (hi - lo);
  }
  return std::sqrt(2.0 * kPi * std::max(0.0, acc));
}

inline double grid_average(const FieldGrid& g, bool top = true) {
  const int nr = g.nr();
  std::vector<double> w_r(nr, 0.0);
  std::vector<double> r_half(nr + 1, 0.0);
  for (int i = 1; i < nr; ++i) r_half[i] = 0.5 * (g.r[i - 1] + g.r[i]);
  r_half[nr] = g.r[nr - 1];
  for (int i = 0; i < nr; ++i)
    w_r[i] = 0.5 * (r_half[i + 1] * r_half[i + 1] - r_half[i] * r_half[i]);
  const int j_lo = top ? g.iz_top : 0;
  const int j_hi = top ? g.nz() - 1 : g.iz_bot;
  double num = 0.0, den = 0.0;
  for (int j = j_lo; j <= j_hi; ++j) {
    const double lo = (j == j_lo) ? g.z[j_lo] : 0.5 * (g.z[j - 1] + g.z[j]);
    const double hi = (j == j_hi) ? g.z[j_hi] : 0.5 * (g.z[j] + g.z[j + 1]);
    for (int i = 0; i < nr; ++i) {
      num += g.at(i, j) * w_r[i] * (hi - lo);
      den += w_r[i] * (hi - lo);
    }
  }
  return num / den;
}

inline double grid_face_jump(const FieldGrid& g) {
  const int nr = g.nr();
  std::vector<double> w_r(nr, 0.0);
  std::vector<double> r_half(nr + 1, 0.0);
  for (int i = 1; i < nr; ++i) r_half[i] = 0.5 * (g.r[i - 1] + g.r[i]);
  r_half[nr] = g.r[nr - 1];
  for (int i = 0; i < nr; ++i)
    w_r[i] = 0.5 * (r_half[i + 1] * r_half[i + 1] - r_half[i] * r_half[i]);
  double top = 0.0, bot = 0.0, den = 0.0;
  for (int i = 0; i < nr; ++i) {
    top += g.at(i, g.iz_top) * w_r[i];
    bot += g.at(i, g.iz_bot) * w_r[i];
    den += w_r[i];
  }
  return (top - bot) / den;
}

struct OracleSample {
  double t = 0.0;
  double u = 0.0;
  double norm_v1 = 0.0;
  double theta_av = 0.0;
  double jump = 0.0;
};

struct OracleResult {
  std::vector<OracleSample> samples;
  std::vector<double> snapshot_times;
  std::vector<FieldGrid> snapshots;
  FieldGrid final_grid;
};

/// Time loop over fd_step honoring control breakpoints exactly; snapshots are
/// stored at the requested times (rounded to whole steps).
inline OracleResult fd_solve(const PiecewiseControl& control, const FieldGrid& init, double dt,
                             const SystemParams& p, double sample_dt = 1.0,
                             const std::vector<double>& snapshot_times = {}) {
  control.validate();
  OracleResult out;
  FieldGrid grid = init;
  double t = 0.0;

  auto record = [&](double u_active) {
    OracleSample s;
    s.t = t;
    s.u = u_active;
    s.norm_v1 = grid_norm_v1(grid);
    s.theta_av = grid_average(grid);
    s.jump = grid_face_jump(grid);
    out.samples.push_back(s);
  };
  auto want_snapshot = [&](double tt) {
    for (double st : snapshot_times)
      if (std::abs(st - tt) < 0.5 * dt) return true;
    return false;
  };

  record(control.values.front());
  if (want_snapshot(0.0)) {
    out.snapshot_times.push_back(0.0);
    out.snapshots.push_back(grid);
  }
  double next_sample = sample_dt;

  for (std::size_t piece = 0; piece < control.pieces(); ++piece) {
    const double u = control.values[piece];
    const double t_end = control.breakpoints[piece + 1];
    const int nsteps = std::max(1, static_cast<int>(std::llround((t_end - t) / dt)));
    const double dt_eff = (t_end - t) / nsteps;
    OracleStepper stepper(grid, u, dt_eff, p);
    for (int s = 0; s < nsteps; ++s) {
      stepper.step(grid);
      t += dt_eff;
      if (sample_dt > 0 && (t >= next_sample - 1e-9 || s == nsteps - 1)) {
        record(u);
        while (next_sample <= t + 1e-9) next_sample += sample_dt;
      }
      if (want_snapshot(t)) {
        out.snapshot_times.push_back(t);
        out.snapshots.push_back(grid);
      }
    }
  }
  out.final_grid = grid;
  return out;
}

/// Synthesizes a modal state on the oracle grid.
inline void synthesize_on_grid(const ModalState& state, FieldGrid& grid, const SystemParams& p) {
  const auto& b = *state.basis;
  std::vector<double> radial(grid.nr());
  for (int i = 0; i < grid.nr(); ++i)
    radial[i] = std::cyl_bessel_j(0, b.rf.mu * grid.r[i] / p.r1);
  for (int j = 0; j < grid.nz(); ++j) {
    double axial = 0.0;
    for (int k = 0; k < b.K; ++k)
      axial += state.coeffs[k] * b.modes[k].value(grid.z[j], p.z0);
    for (int i = 0; i < grid.nr(); ++i) grid.at(i, j) = axial * radial[i];
  }
}

struct CompareReport {
  struct Row {
    double t = 0.0;
    double rel_l2_v1 = 0.0;    ///< ||spec - fd|| / ||fd|| over V1
    double norm_spec = 0.0;
    double norm_fd = 0.0;
  };
  std::vector<Row> rows;
  double max_rel = 0.0;
  double mean_rel = 0.0;
};

/// Field-level comparison of a spectral trajectory against oracle snapshots
/// taken at the same times.
inline CompareReport compare(const Trajectory& spec, const OracleResult& fd,
                             const SystemParams& p) {
  CompareReport rep;
  if (fd.snapshots.empty()) throw std::invalid_argument("compare: oracle has no snapshots");
  for (std::size_t s = 0; s < fd.snapshots.size(); ++s) {
    const double t = fd.snapshot_times[s];
    const ModalState* match = nullptr;
    for (const auto& st : spec.states)
      if (std::abs(st.time - t) < 1e-6 * std::max(1.0, t)) {
        match = &st;
        break;
      }
    if (!match)
      throw std::invalid_argument("compare: no spectral sample at t=" + std::to_string(t));
    FieldGrid synth = fd.snapshots[s];
    synthesize_on_grid(*match, synth, p);
    FieldGrid diff = synth;
    for (std::size_t i = 0; i < diff.theta.size(); ++i)
      diff.theta[i] = synth.theta[i] - fd.snapshots[s].theta[i];
    CompareReport::Row row;
    row.t = t;
    row.norm_spec = grid_norm_v1(synth);
    row.norm_fd = grid_norm_v1(fd.snapshots[s]);
    row.rel_l2_v1 = row.norm_fd > 0 ? grid_norm_v1(diff) / row.norm_fd : 0.0;
    rep.rows.push_back(row);
  }
  for (const auto& r : rep.rows) {
    rep.max_rel = std::max(rep.max_rel, r.rel_l2_v1);
    rep.mean_rel += r.rel_l2_v1 / rep.rows.size();
  }
  return rep;
}

}  // namespace tecopt
