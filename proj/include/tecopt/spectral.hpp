#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "tecopt/errors.hpp"
#include "tecopt/params.hpp"
#include "tecopt/piecewise_ode.hpp"
#include "tecopt/quadrature.hpp"
#include "tecopt/radial.hpp"

namespace tecopt {

/// One axial eigenfunction psi_k of the u-dependent interface problem,
/// stored region by region over [-z1,-z0], [-z0,z0], [z0,z1].
struct AxialMode {
  int k = 0;
  double xi2 = 0.0;  ///< signed xi_k^2 (negative means exponential axial profile)
  double nu = 0.0;   ///< decay rate nu_k = -lambda_a (mu^2 + xi^2)/(c_a rho_a r1^2), 1/s
  std::array<RegionSolution, 3> regions{};
  double norm = 1.0;  ///< weighted norm after normalization (1 by construction)

  double value(double z, double z0) const {
    const int r = z < -z0 ? 0 : (z <= z0 ? 1 : 2);
    return regions[r].value(z);
  }
};

namespace detail {

/// Propagates (psi, psi') = (1, 0) from -z1 through the three regions for a
/// trial eigenvalue s = xi^2 and control u; returns the regions and psi'(z1).
/// The interface jumps read the Peltier feedback term sigma = S u/(R |A_p|)
/// literally from the flux condition, with d/dz on both faces.
struct Shoot {
  std::array<RegionSolution, 3> regions;
  double end_slope;
};

inline Shoot shoot(double s, double u, const SystemParams& p, const RadialMode& radial) {
  const double h = p.cylinder_length();
  const double mu = radial.mu;
  const double nu = -p.lambda_a * (mu * mu + s) / (p.c_a * p.rho_a * p.r1 * p.r1);
  const double qa = -s / (p.r1 * p.r1);
  const double qp = p.c_p * p.rho_p * nu / p.lambda_p;
  const double sigma = p.seebeck * u / (p.resistance * p.face_area());

  Shoot sh;
  double psi = 1.0, dpsi = 0.0;
  sh.regions[0] = {-p.z1, -p.z0, qa, psi, dpsi};
  psi = sh.regions[0].value(-p.z0);
  dpsi = sh.regions[0].deriv(-p.z0);
  // -lambda_a psi'(-z0^-) = sigma psi(-z0) - lambda_p psi'(-z0^+)
  dpsi = (sigma * psi + p.lambda_a * dpsi) / p.lambda_p;
  sh.regions[1] = {-p.z0, p.z0, qp, psi, dpsi};
  psi = sh.regions[1].value(p.z0);
  dpsi = sh.regions[1].deriv(p.z0);
  // -lambda_a psi'(z0^+) = sigma psi(z0) - lambda_p psi'(z0^-)
  dpsi = (p.lambda_p * dpsi - sigma * psi) / p.lambda_a;
  sh.regions[2] = {p.z0, p.z1, qa, psi, dpsi};
  sh.end_slope = sh.regions[2].deriv(p.z1);
  (void)h;
  return sh;
}

}  // namespace detail

/// Transfer-matrix residual whose zeros in s = xi^2 are the axial eigenvalues.
/// Total function of s, analytic across s = 0.
inline double characteristic_residual(double xi2, double u, const SystemParams& p,
                                      const RadialMode& radial) {
  return detail::shoot(xi2, u, p, radial).end_slope;
}

/// Truncated axial basis for one control value, with cached quadrature nodes
/// and the exact V1 Gram matrix used by the terminal cost.
struct AxialBasis {
  double u = 0.0;
  int K = 4;
  RadialMode radial{};
  RadialFactors rf{};
  SystemParams params{};
  std::vector<AxialMode> modes;  ///< sorted by descending nu (slowest decay first)

  /// Gauss nodes per region: positions, mapped weights, c*rho weight.
  struct RegionNodes {
    std::array<double, 64> z{};
    std::array<double, 64> w{};
    double crho = 0.0;
  };
  std::array<RegionNodes, 3> nodes{};
  std::vector<std::array<std::array<double, 64>, 3>> mode_node_vals;  ///< [mode][region][node]

  std::vector<std::vector<double>> gram_v1;  ///< int_{z0}^{z1} psi_i psi_j dz (axial only)
  std::vector<double> mean_v1;               ///< int_{z0}^{z1} psi_i dz
  std::vector<double> face_top, face_bot;    ///< psi_i(+-z0)

  /// L2(V1) norm of a coefficient vector (full volume norm, radial factor included).
  double norm_v1(const std::vector<double>& th) const {
    double s = 0.0;
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) s += th[i] * gram_v1[i][j] * th[j];
    return std::sqrt(std::max(0.0, 2.0 * kPi * rf.Ir * s));
  }

  /// V1 average temperature of a coefficient vector, K.
  double theta_av_v1(const std::vector<double>& th) const {
    double s = 0.0;
    for (int i = 0; i < K; ++i) s += th[i] * mean_v1[i];
    return rf.disk_avg * s / params.cylinder_length();
  }

  /// Face-averaged temperature jump [theta~] = theta~(z0) - theta~(-z0), K.
  double face_jump(const std::vector<double>& th) const {
    double s = 0.0;
    for (int i = 0; i < K; ++i) s += th[i] * (face_top[i] - face_bot[i]);
    return rf.disk_avg * s;
  }
};

/// State in a basis: coefficients of the truncated eigenfunction expansion.
struct ModalState {
  std::vector<double> coeffs;
  std::shared_ptr<const AxialBasis> basis;
  double time = 0.0;
};

/// Builds the K lowest axial modes for constant control u. The eigenvalue
/// scan covers xi^2 in [-50, (K pi r1/h)^2 * 4]; each sign change is refined
/// by bisection, and modes are normalized to unit weighted norm
/// N_k = int_V c rho Xi_k^2 dV = 1.
inline std::shared_ptr<const AxialBasis> axial_basis(double u, const SystemParams& p,
                                                     int K = 4, RadialMode radial = {}) {
  if (K < 1) throw std::invalid_argument("axial_basis: K must be >= 1");
  if (!std::isfinite(u)) throw std::invalid_argument("axial_basis: u must be finite");
  if (radial.mu == 0.0) radial = radial_roots(0, 1, p)[0];

  auto basis = std::make_shared<AxialBasis>();
  basis->u = u;
  basis->K = K;
  basis->radial = radial;
  basis->rf = RadialFactors::make(radial, p);
  basis->params = p;

  const double h = p.cylinder_length();
  const double s_lo = -50.0;
  const double s_hi = 4.0 * std::pow(K * kPi * p.r1 / h, 2);
  // 4x the nominal 1e4-point scan: the two slowest eigenvalues can sit closer
  // than the coarse cell width and a missed sign change silently skips a mode.
  const int n_scan = 40000;

  auto resid = [&](double s) { return characteristic_residual(s, u, p, radial); };

  std::vector<double> roots;
  double prev_s = s_lo, prev_f = resid(s_lo);
  for (int i = 1; i <= n_scan && static_cast<int>(roots.size()) < K; ++i) {
    const double s = s_lo + (s_hi - s_lo) * i / n_scan;
    const double f = resid(s);
    if (prev_f == 0.0) {
      roots.push_back(prev_s);
    } else if (prev_f * f < 0.0) {
      double a = prev_s, b = s, fa = prev_f;
      for (int it = 0; it < 200 && (b - a) > 1e-13 * (1.0 + std::abs(a)); ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = resid(mid);
        if (fa * fm <= 0.0) {
          b = mid;
        } else {
          a = mid;
          fa = fm;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_s = s;
    prev_f = f;
  }
  if (static_cast<int>(roots.size()) < K) {
    throw NumericalError("axial_basis: found only " + std::to_string(roots.size()) + " of " +
                         std::to_string(K) + " modes for u=" + std::to_string(u) +
                         " in xi^2 window [" + std::to_string(s_lo) + ", " +
                         std::to_string(s_hi) + "]");
  }
  const double cell = (s_hi - s_lo) / n_scan;
  for (std::size_t i = 1; i < roots.size(); ++i) {
    if (roots[i] - roots[i - 1] < cell) {
      throw NumericalError("axial_basis: eigenvalues " + std::to_string(roots[i - 1]) + " and " +
                           std::to_string(roots[i]) + " closer than scan resolution at u=" +
                           std::to_string(u));
    }
  }

  // nodes per region
  const std::array<std::pair<double, double>, 3> spans = {
      {{-p.z1, -p.z0}, {-p.z0, p.z0}, {p.z0, p.z1}}};
  for (int r = 0; r < 3; ++r) {
    for (std::size_t j = 0; j < 64; ++j) {
      basis->nodes[r].z[j] = GaussLegendre64::node(j, spans[r].first, spans[r].second);
      basis->nodes[r].w[j] = GaussLegendre64::weight(j, spans[r].first, spans[r].second);
    }
    basis->nodes[r].crho = (r == 1) ? p.c_p * p.rho_p : p.c_a * p.rho_a;
  }

  for (int k = 0; k < K; ++k) {
    auto sh = detail::shoot(roots[k], u, p, radial);
    AxialMode m;
    m.k = k;
    m.xi2 = roots[k];
    m.nu = -p.lambda_a * (radial.mu * radial.mu + roots[k]) / (p.c_a * p.rho_a * p.r1 * p.r1);
    m.regions = sh.regions;
    double n2 = 0.0;
    for (int r = 0; r < 3; ++r)
      n2 += basis->nodes[r].crho * product_integral(m.regions[r], m.regions[r]);
    n2 *= 2.0 * kPi * basis->rf.Ir;
    const double scale = 1.0 / std::sqrt(n2);
    for (auto& reg : m.regions) {
      reg.a *= scale;
      reg.b *= scale;
    }
    m.norm = 1.0;
    basis->modes.push_back(m);
  }

  basis->mode_node_vals.resize(K);
  for (int k = 0; k < K; ++k)
    for (int r = 0; r < 3; ++r)
      for (std::size_t j = 0; j < 64; ++j)
        basis->mode_node_vals[k][r][j] = basis->modes[k].regions[r].value(basis->nodes[r].z[j]);

  basis->gram_v1.assign(K, std::vector<double>(K, 0.0));
  for (int i = 0; i < K; ++i)
    for (int j = i; j < K; ++j) {
      const double v = product_integral(basis->modes[i].regions[2], basis->modes[j].regions[2]);
      basis->gram_v1[i][j] = basis->gram_v1[j][i] = v;
    }
  basis->mean_v1.resize(K);
  basis->face_top.resize(K);
  basis->face_bot.resize(K);
  for (int i = 0; i < K; ++i) {
    basis->mean_v1[i] = basis->modes[i].regions[2].integral();
    basis->face_top[i] = basis->modes[i].regions[2].value(p.z0);
    basis->face_bot[i] = basis->modes[i].regions[0].value(-p.z0);
  }
  return basis;
}

/// Weighted projection of a temperature field theta(r, z) onto the basis:
/// Theta_i = <c rho field, Xi_i> / <c rho Xi_i, Xi_i>.
template <typename Field>
ModalState project(Field&& field, std::shared_ptr<const AxialBasis> basis) {
  const auto& b = *basis;
  const SystemParams& p = b.params;
  // radial projection of the field at each axial node: int_0^r1 field J0 r dr
  std::array<std::array<double, 64>, 3> fhat{};
  for (int r = 0; r < 3; ++r) {
    for (std::size_t j = 0; j < 64; ++j) {
      const double z = b.nodes[r].z[j];
      fhat[r][j] = gauss64(
          [&](double rr) {
            return field(rr, z) * std::cyl_bessel_j(0, b.rf.mu * rr / p.r1) * rr;
          },
          0.0, p.r1);
    }
  }
  ModalState st;
  st.basis = basis;
  st.coeffs.assign(b.K, 0.0);
  for (int i = 0; i < b.K; ++i) {
    double acc = 0.0;
    for (int r = 0; r < 3; ++r)
      for (std::size_t j = 0; j < 64; ++j)
        acc += b.nodes[r].crho * b.nodes[r].w[j] * fhat[r][j] * b.mode_node_vals[i][r][j];
    st.coeffs[i] = 2.0 * kPi * acc / b.modes[i].norm;
  }
  return st;
}

struct ReexpandResult {
  ModalState state;
  double residual_energy = 0.0;  ///< fraction of weighted energy lost, in [0, 1]
};

/// Re-expands a state over a different basis (same radial mode) via weighted
/// overlap integrals of the axial parts; radial and angular factors cancel.
inline ReexpandResult reexpand(const ModalState& state, std::shared_ptr<const AxialBasis> target) {
  const auto& src = *state.basis;
  const auto& tgt = *target;
  if (src.radial.n != tgt.radial.n || src.radial.m != tgt.radial.m)
    throw std::invalid_argument("reexpand: bases must share the radial mode");

  ReexpandResult out;
  out.state.basis = target;
  out.state.time = state.time;
  out.state.coeffs.assign(tgt.K, 0.0);

  double e_src = 0.0;
  for (double c : state.coeffs) e_src += c * c;  // weighted-orthonormal basis

  for (int i = 0; i < tgt.K; ++i) {
    double acc = 0.0;
    for (int j = 0; j < src.K; ++j) {
      double ov = 0.0;
      for (int r = 0; r < 3; ++r) {
        double dot = 0.0;
        for (std::size_t n = 0; n < 64; ++n)
          dot += tgt.nodes[r].w[n] * tgt.mode_node_vals[i][r][n] * src.mode_node_vals[j][r][n];
        ov += tgt.nodes[r].crho * dot;
      }
      acc += 2.0 * kPi * tgt.rf.Ir * ov * state.coeffs[j];
    }
    out.state.coeffs[i] = acc;
  }
  double e_tgt = 0.0;
  for (double c : out.state.coeffs) e_tgt += c * c;
  out.residual_energy = (e_src > 0.0) ? std::clamp(1.0 - e_tgt / e_src, 0.0, 1.0) : 0.0;
  return out;
}

/// Characteristic decay times tau_k = -1/nu_k, slowest first.
inline std::vector<double> decay_times(const AxialBasis& basis) {
  std::vector<double> taus;
  taus.reserve(basis.modes.size());
  for (const auto& m : basis.modes) taus.push_back(-1.0 / m.nu);
  return taus;
}

}  // namespace tecopt
