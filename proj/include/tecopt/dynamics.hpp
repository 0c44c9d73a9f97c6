#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "tecopt/errors.hpp"
#include "tecopt/params.hpp"
#include "tecopt/piecewise_ode.hpp"
#include "tecopt/radial.hpp"
#include "tecopt/spectral.hpp"

namespace tecopt {

/// Axial profile of the steady state theta_st = J0(mu r/r1) psi_st(z) for a
/// constant control: hyperbolic pair in the cylinders (plus a constant lift
/// from a nonzero ambient), quadratic polynomial in the PE.
struct SteadyProfile {
  double u = 0.0;
  RadialMode radial{};
  RegionSolution cyl_bot{};               ///< [-z1,-z0], q = (mu/r1)^2
  RegionSolution cyl_top{};               ///< [z0, z1]
  std::array<double, 3> pe_poly{};        ///< c0 + c1 z + c2 z^2 on [-z0, z0]
  double ambient_lift = 0.0;              ///< constant particular part in the cylinders

  double value(double z) const {
    if (z < cyl_bot.z_hi) return cyl_bot.value(z) + ambient_lift;
    if (z > cyl_top.z_lo) return cyl_top.value(z) + ambient_lift;
    return pe_poly[0] + pe_poly[1] * z + pe_poly[2] * z * z;
  }
  double deriv(double z) const {
    if (z < cyl_bot.z_hi) return cyl_bot.deriv(z);
    if (z > cyl_top.z_lo) return cyl_top.deriv(z);
    return pe_poly[1] + 2.0 * pe_poly[2] * z;
  }
};

namespace detail {

/// Solves a small dense system in place by Gaussian elimination with partial
/// pivoting. Throws NumericalError on a (numerically) singular matrix.
template <int N>
std::array<double, N> solve_dense(std::array<std::array<double, N>, N> A,
                                  std::array<double, N> b) {
  for (int col = 0; col < N; ++col) {
    int piv = col;
    for (int r = col + 1; r < N; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (A[piv][col] == 0.0) throw NumericalError("solve_dense: singular system");
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    for (int r = col + 1; r < N; ++r) {
      const double f = A[r][col] / A[col][col];
      for (int c = col; c < N; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  std::array<double, N> x{};
  for (int r = N - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < N; ++c) s -= A[r][c] * x[c];
    x[r] = s / A[r][r];
  }
  return x;
}

}  // namespace detail

/// Time-independent solution under the single-radial-mode ansatz: a 6x6
/// linear solve for the cylinder pair coefficients and the PE linear part.
/// Uniform-in-r sources are projected onto J0 with coefficient beta.
inline SteadyProfile steady_profile(double u, const SystemParams& p, RadialMode radial = {}) {
  if (!std::isfinite(u)) throw std::invalid_argument("steady_profile: u must be finite");
  if (radial.mu == 0.0) radial = radial_roots(0, 1, p)[0];
  const auto rf = RadialFactors::make(radial, p);

  const double h = p.cylinder_length();
  const double k = radial.mu / p.r1;
  const double q = k * k;
  const double sigma = p.seebeck * u / (p.resistance * p.face_area());
  const double c2 = -rf.beta * u * u / (2.0 * p.lambda_p * p.resistance * p.pe_volume());
  const double lift = p.r1 * p.alpha * p.theta_A * rf.j0_mu / (p.lambda_a * rf.Ir * q);
  const auto fp = fundamental_pair(q, h);
  const double z0 = p.z0;

  // unknowns x = (a2, b2, c0, c1, a1, b1); cylinder refs at -z1 and z0
  std::array<std::array<double, 6>, 6> A{};
  std::array<double, 6> rhs{};
  // psi'(-z1) = 0
  A[0] = {0, 1, 0, 0, 0, 0};
  rhs[0] = 0.0;
  // continuity at -z0
  A[1] = {fp.c, fp.s, -1, z0, 0, 0};
  rhs[1] = c2 * z0 * z0 - lift;
  // flux at -z0: -lambda_a psi'(-z0^-) = sigma (psi(-z0) + beta theta0) - lambda_p psi'(-z0^+)
  A[2] = {-p.lambda_a * q * fp.s, -p.lambda_a * fp.c, -sigma, sigma * z0 + p.lambda_p, 0, 0};
  rhs[2] = sigma * (c2 * z0 * z0 + rf.beta * p.theta0) + 2.0 * p.lambda_p * c2 * z0;
  // continuity at z0
  A[3] = {0, 0, -1, -z0, 1, 0};
  rhs[3] = c2 * z0 * z0 - lift;
  // flux at z0
  A[4] = {0, 0, 0, p.lambda_p, -sigma, -p.lambda_a};
  rhs[4] = sigma * (lift + rf.beta * p.theta0) - 2.0 * p.lambda_p * c2 * z0;
  // psi'(z1) = 0
  A[5] = {0, 0, 0, 0, q * fp.s, fp.c};
  rhs[5] = 0.0;

  const auto x = detail::solve_dense<6>(A, rhs);

  SteadyProfile sp;
  sp.u = u;
  sp.radial = radial;
  sp.cyl_bot = {-p.z1, -p.z0, q, x[0], x[1]};
  sp.pe_poly = {x[2], x[3], c2};
  sp.cyl_top = {p.z0, p.z1, q, x[4], x[5]};
  sp.ambient_lift = lift;
  return sp;
}

/// V1 average of a steady profile: radial disk mean of J0 times the axial
/// mean of psi over [z0, z1].
inline double average_temperature(const SteadyProfile& sp, const SystemParams& p) {
  const auto rf = RadialFactors::make(sp.radial, p);
  const double h = p.cylinder_length();
  return rf.disk_avg * (sp.cyl_top.integral() + sp.ambient_lift * h) / h;
}

/// V1 average of a modal state.
inline double average_temperature(const ModalState& state) {
  return state.basis->theta_av_v1(state.coeffs);
}

/// Face-averaged temperature jump [theta~] of a modal state, K.
inline double face_jump(const ModalState& state) {
  return state.basis->face_jump(state.coeffs);
}

/// Finds the constant control whose steady state has the target V1 average,
/// by bracketing the mismatch on [-10, 10] V. Among multiple roots the one
/// with the smallest |u| is returned.
inline double find_ust(double target_theta_av, const SystemParams& p, RadialMode radial = {}) {
  if (radial.mu == 0.0) radial = radial_roots(0, 1, p)[0];
  auto theta_av_of = [&](double u) {
    return average_temperature(steady_profile(u, p, radial), p);
  };
  const double u_lo = -10.0, u_hi = 10.0;
  const int n = 4000;
  double best_u = 0.0, best_mismatch = std::numeric_limits<double>::infinity();
  double lo_seen = std::numeric_limits<double>::infinity();
  double hi_seen = -lo_seen;
  double prev_u = u_lo, prev_g = theta_av_of(u_lo) - target_theta_av;
  for (int i = 0; i <= n; ++i) {
    const double uu = u_lo + (u_hi - u_lo) * i / n;
    const double g = theta_av_of(uu) - target_theta_av;
    lo_seen = std::min(lo_seen, g + target_theta_av);
    hi_seen = std::max(hi_seen, g + target_theta_av);
    if (i > 0 && prev_g * g <= 0.0) {
      double a = prev_u, b = uu, ga = prev_g;
      for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
        const double mid = 0.5 * (a + b);
        const double gm = theta_av_of(mid) - target_theta_av;
        if (ga * gm <= 0.0) {
          b = mid;
        } else {
          a = mid;
          ga = gm;
        }
      }
      const double root = 0.5 * (a + b);
      const double mism = std::abs(theta_av_of(root) - target_theta_av);
      if (std::abs(root) < std::abs(best_u) || best_mismatch == std::numeric_limits<double>::infinity()) {
        best_u = root;
        best_mismatch = mism;
      }
    }
    prev_u = uu;
    prev_g = g;
  }
  if (best_mismatch > 1e-6) {
    throw NumericalError("find_ust: target " + std::to_string(target_theta_av) +
                         " K unreachable on [-10, 10] V; achieved range [" +
                         std::to_string(lo_seen) + ", " + std::to_string(hi_seen) + "] K");
  }
  return best_u;
}

/// Projects a steady profile onto a basis (shared radial factor, so only the
/// axial weighted overlap is integrated).
inline std::vector<double> project_steady(const SteadyProfile& sp,
                                          const AxialBasis& basis) {
  std::vector<double> th(basis.K, 0.0);
  for (int i = 0; i < basis.K; ++i) {
    double acc = 0.0;
    for (int r = 0; r < 3; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < 64; ++j) {
        dot += basis.nodes[r].w[j] * basis.mode_node_vals[i][r][j] *
               sp.value(basis.nodes[r].z[j]);
      }
      acc += basis.nodes[r].crho * dot;
    }
    th[i] = 2.0 * kPi * basis.rf.Ir * acc;
  }
  return th;
}

/// Constant forcing of the modal ODE d(theta)/dt = A theta + G, defined
/// through the analytic steady state: G = -A theta_ss(u), which makes the
/// steady state an exact fixed point of the propagation.
inline std::vector<double> forcing_vector(double u, const AxialBasis& basis,
                                          const SystemParams& p) {
  const auto sp = steady_profile(u, p, basis.radial);
  auto th = project_steady(sp, basis);
  std::vector<double> G(basis.K);
  for (int i = 0; i < basis.K; ++i) G[i] = -basis.modes[i].nu * th[i];
  return G;
}

/// Exact propagation over dt at constant u:
/// theta_k(t+dt) = e^{nu_k dt} theta_k + (G_k/nu_k)(e^{nu_k dt} - 1).
inline ModalState propagate(const ModalState& state, double dt,
                            const std::vector<double>& G) {
  ModalState out = state;
  const auto& b = *state.basis;
  for (int k = 0; k < b.K; ++k) {
    const double nu = b.modes[k].nu;
    const double e = std::exp(nu * dt);
    if (nu != 0.0) {
      out.coeffs[k] = e * state.coeffs[k] + G[k] / nu * (e - 1.0);
    } else {
      out.coeffs[k] = state.coeffs[k] + G[k] * dt;
    }
  }
  out.time = state.time + dt;
  return out;
}

/// Basis + steady data for one control value; built once and shared.
struct BasisBundle {
  std::shared_ptr<const AxialBasis> basis;
  SteadyProfile steady;
  std::vector<double> theta_ss;  ///< projection of the steady profile
  std::vector<double> G;         ///< -A theta_ss
};

/// Thread-safe cache of bases keyed by control value quantized at 1e-9 V.
class BasisCache {
 public:
  BasisCache(SystemParams p, int K = 4, RadialMode radial = {})
      : p_(validate_params(p)), K_(K), radial_(radial) {
    if (radial_.mu == 0.0) radial_ = radial_roots(0, 1, p_)[0];
  }

  std::shared_ptr<const BasisBundle> get(double u) {
    const long long key = quantize(u);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = map_.find(key);
      if (it != map_.end()) return it->second;
    }
    auto bundle = std::make_shared<BasisBundle>();
    bundle->basis = axial_basis(u, p_, K_, radial_);
    bundle->steady = steady_profile(u, p_, radial_);
    bundle->theta_ss = project_steady(bundle->steady, *bundle->basis);
    bundle->G.resize(K_);
    for (int i = 0; i < K_; ++i)
      bundle->G[i] = -bundle->basis->modes[i].nu * bundle->theta_ss[i];
    std::lock_guard<std::mutex> lock(mutex_);
    // long optimizer runs touch each perturbed value once; bound the footprint
    if (map_.size() >= max_entries_) map_.clear();
    auto [it, inserted] = map_.emplace(key, std::move(bundle));
    return it->second;
  }

  const SystemParams& params() const { return p_; }
  const RadialMode& radial() const { return radial_; }
  int K() const { return K_; }
  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return map_.size();
  }

 private:
  static long long quantize(double u) { return std::llround(u * 1e9); }

  SystemParams p_;
  int K_;
  RadialMode radial_;
  std::size_t max_entries_ = 4000;
  mutable std::mutex mutex_;
  std::unordered_map<long long, std::shared_ptr<const BasisBundle>> map_;
};

struct TrajectorySample {
  double t = 0.0;
  double u = 0.0;        ///< active effective control, V
  double u0 = 0.0;       ///< feedforward input reconstructed through the dead zone, V
  double U_total = 0.0;  ///< u0 + S [theta~], V
  double norm_v1 = 0.0;  ///< ||theta||_{L2(V1)}, K m^{3/2}
  double norm_rel = 0.0; ///< norm_v1 / initial norm
  double theta_av = 0.0; ///< V1 average, K
  double jump = 0.0;     ///< PE face jump [theta~], K
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<ModalState> states;       ///< state at each sample
  double initial_norm = 0.0;            ///< V1 norm of the supplied initial state
  double reexpansion_residual = 0.0;    ///< accumulated residual energy fractions
  ModalState terminal;
};

/// Piecewise-constant simulation: closed-form propagation on each piece with
/// re-expansion into the next basis at every breakpoint. sample_dt <= 0
/// records breakpoints only.
inline Trajectory simulate(const PiecewiseControl& control, const ModalState& init,
                           const SystemParams& p, double sample_dt, BasisCache& cache) {
  control.validate();
  (void)p;

  Trajectory traj;
  traj.initial_norm = init.basis->norm_v1(init.coeffs);

  ModalState state = init;
  state.time = 0.0;

  auto record = [&](const ModalState& st, double u_active) {
    TrajectorySample s;
    s.t = st.time;
    s.u = u_active;
    s.u0 = inverse_dead_zone(u_active, cache.params());
    s.jump = st.basis->face_jump(st.coeffs);
    s.U_total = total_voltage(s.u0, s.jump, cache.params());
    s.norm_v1 = st.basis->norm_v1(st.coeffs);
    s.norm_rel = traj.initial_norm > 0 ? s.norm_v1 / traj.initial_norm : 0.0;
    s.theta_av = st.basis->theta_av_v1(st.coeffs);
    traj.samples.push_back(s);
    traj.states.push_back(st);
  };

  for (std::size_t piece = 0; piece < control.pieces(); ++piece) {
    const double u = control.values[piece];
    const double t_lo = control.breakpoints[piece];
    const double t_hi = control.breakpoints[piece + 1];
    auto bundle = cache.get(u);

    if (state.basis != bundle->basis) {
      auto re = reexpand(state, bundle->basis);
      traj.reexpansion_residual += re.residual_energy;
      state = re.state;
      state.time = t_lo;
    }
    if (piece == 0) record(state, u);

    const ModalState piece_start = state;
    if (sample_dt > 0.0) {
      // interior samples at multiples of sample_dt
      for (double t = std::ceil((t_lo + 1e-12) / sample_dt) * sample_dt; t < t_hi - 1e-9;
           t += sample_dt) {
        if (t <= t_lo + 1e-12) continue;
        state = propagate(piece_start, t - t_lo, bundle->G);
        record(state, u);
      }
    }
    state = propagate(piece_start, t_hi - t_lo, bundle->G);
    record(state, u);
  }
  traj.terminal = state;
  return traj;
}

}  // namespace tecopt
