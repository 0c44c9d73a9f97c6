#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "tecopt/errors.hpp"

namespace tecopt {

inline constexpr double kPi = 3.14159265358979323846;

/// Physical description of the two-cylinder/Peltier stack. All temperatures
/// in the API are measured relative to the reference temperature theta0;
/// theta0 itself enters only through the Peltier interface term.
struct SystemParams {
  double lambda_a = 254.4;  ///< cylinder thermal conductivity, W/(m K)
  double lambda_p = 0.517;  ///< PE thermal conductivity, W/(m K)
  double rho_a = 2700.0;    ///< cylinder density, kg/m^3
  double rho_p = 3000.0;    ///< PE density, kg/m^3
  double c_a = 896.0;       ///< cylinder specific heat, J/(kg K)
  double c_p = 500.0;       ///< PE specific heat, J/(kg K)
  double alpha = 8.4;       ///< lateral heat-transfer coefficient, W/(m^2 K)
  double r1 = 0.031;        ///< cylinder radius, m
  double z0 = 0.00195;      ///< PE half-thickness, m
  double z1 = 0.10195;      ///< outer axial coordinate, m
  double seebeck = 0.0427;  ///< Seebeck coefficient S, V/K
  double resistance = 6.03; ///< PE ohmic resistance R, Ohm
  double u_plus = 1.115;    ///< upper dead-zone threshold, V
  double u_minus = -1.29;   ///< lower dead-zone threshold, V
  double theta_A = 0.0;     ///< ambient temperature relative to theta0, K
  double theta0 = 293.0;    ///< absolute reference temperature, K

  double cylinder_length() const { return z1 - z0; }
  double face_area() const { return kPi * r1 * r1; }            ///< |A_p|, m^2
  double pe_volume() const { return 2.0 * z0 * face_area(); }   ///< |V_p|, m^3
  double cyl_volume() const { return cylinder_length() * face_area(); }  ///< |V_1| = |V_2|

  /// Volumetric heat capacity c*rho at axial position z, J/(m^3 K).
  double crho(double z) const {
    return (z > -z0 && z < z0) ? c_p * rho_p : c_a * rho_a;
  }

  double biot() const { return alpha * r1 / lambda_a; }
  /// Cylinder thermal diffusivity, m^2/s.
  double diffusivity_a() const { return lambda_a / (c_a * rho_a); }
};

/// Throws std::invalid_argument naming the first violated invariant.
inline const SystemParams& validate_params(const SystemParams& p) {
  auto req = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  };
  req(p.lambda_a > 0, "lambda_a must be > 0");
  req(p.lambda_p > 0, "lambda_p must be > 0");
  req(p.rho_a > 0, "rho_a must be > 0");
  req(p.rho_p > 0, "rho_p must be > 0");
  req(p.c_a > 0, "c_a must be > 0");
  req(p.c_p > 0, "c_p must be > 0");
  req(p.alpha > 0, "alpha must be > 0");
  req(p.r1 > 0, "r1 must be > 0");
  req(p.resistance > 0, "R must be > 0");
  req(p.theta0 > 0, "theta0 must be > 0");
  req(p.z0 > 0, "z0 must be > 0");
  req(p.z0 < p.z1, "z0 must be < z1");
  req(p.u_minus < 0, "u_minus must be < 0");
  req(p.u_plus > 0, "u_plus must be > 0");
  req(std::isfinite(p.theta_A), "theta_A must be finite");
  return p;
}

/// Dead-zone map of the input voltage u0 to the effective control u.
/// Piecewise linear, 1-Lipschitz, zero exactly on [u_minus, u_plus].
inline double dead_zone(double u0, const SystemParams& p) {
  if (u0 < p.u_minus) return u0 - p.u_minus;
  if (u0 > p.u_plus) return u0 - p.u_plus;
  return 0.0;
}

/// Right inverse of dead_zone; u = 0 maps to the least-energy preimage 0.
inline double inverse_dead_zone(double u, const SystemParams& p) {
  if (u < 0.0) return u + p.u_minus;
  if (u > 0.0) return u + p.u_plus;
  return 0.0;
}

/// Total voltage supplied to the PE: feedforward input plus the measured
/// face-jump feedback, U = u0 + S * [theta~].
inline double total_voltage(double u0, double jump, const SystemParams& p) {
  return u0 + p.seebeck * jump;
}

/// Piecewise-constant control: value values[i] on [breakpoints[i], breakpoints[i+1]).
struct PiecewiseControl {
  std::vector<double> breakpoints;  ///< t_0 = 0 < t_1 < ... < t_N = T, s
  std::vector<double> values;       ///< u^(0) ... u^(N-1), V

  std::size_t pieces() const { return values.size(); }
  double horizon() const { return breakpoints.back(); }

  double value_at(double t) const {
    for (std::size_t i = 1; i + 1 < breakpoints.size(); ++i) {
      if (t < breakpoints[i]) return values[i - 1];
    }
    return values.back();
  }

  /// N equal pieces on [0, T].
  static PiecewiseControl uniform(double T, const std::vector<double>& vals) {
    PiecewiseControl c;
    const std::size_t n = vals.size();
    if (n == 0) throw std::invalid_argument("control must have N >= 1 pieces");
    if (!(T > 0)) throw std::invalid_argument("horizon must be > 0");
    c.values = vals;
    c.breakpoints.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
      c.breakpoints[i] = T * static_cast<double>(i) / static_cast<double>(n);
    return c;
  }

  void validate() const {
    if (values.empty() || breakpoints.size() != values.size() + 1)
      throw std::invalid_argument("control must have N >= 1 pieces and N+1 breakpoints");
    if (breakpoints.front() != 0.0)
      throw std::invalid_argument("control must start at t = 0");
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
      if (!(breakpoints[i] < breakpoints[i + 1]))
        throw std::invalid_argument("control breakpoints must be strictly increasing");
    for (double v : values)
      if (!std::isfinite(v))
        throw std::invalid_argument("control values must be finite");
  }
};

}  // namespace tecopt
