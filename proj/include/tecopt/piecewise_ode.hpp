#pragma once

#include <cmath>
#include <utility>

#include "tecopt/quadrature.hpp"

namespace tecopt {

/// Normalized fundamental pair of psi'' = q psi:
///   C(q, x): C(0) = 1, C'(0) = 0;   S(q, x): S(0) = 0, S'(0) = 1.
/// For q < 0 these are cos/sin, for q > 0 cosh/sinh, for q = 0 the pair {1, x}.
/// They satisfy C' = q S, S' = C and C^2 - q S^2 = 1, so region transfer
/// matrices stay analytic in q across sign changes.
struct FundamentalPair {
  double c;
  double s;
};

inline FundamentalPair fundamental_pair(double q, double x) {
  if (q > 0.0) {
    const double k = std::sqrt(q);
    return {std::cosh(k * x), std::sinh(k * x) / k};
  }
  if (q < 0.0) {
    const double k = std::sqrt(-q);
    return {std::cos(k * x), std::sin(k * x) / k};
  }
  return {1.0, x};
}

/// psi(z) = a C(q, z - z_lo) + b S(q, z - z_lo) on [z_lo, z_hi].
struct RegionSolution {
  double z_lo = 0.0;
  double z_hi = 0.0;
  double q = 0.0;
  double a = 0.0;
  double b = 0.0;

  double length() const { return z_hi - z_lo; }

  double value(double z) const {
    const auto f = fundamental_pair(q, z - z_lo);
    return a * f.c + b * f.s;
  }
  double deriv(double z) const {
    const auto f = fundamental_pair(q, z - z_lo);
    return a * q * f.s + b * f.c;
  }

  /// Exact integral of psi over the region: antiderivatives of C and S are
  /// S and (C - 1)/q (x^2/2 when q = 0).
  double integral() const {
    const double x = length();
    const auto f = fundamental_pair(q, x);
    const double int_c = f.s;
    const double int_s = (q != 0.0) ? (f.c - 1.0) / q : 0.5 * x * x;
    return a * int_c + b * int_s;
  }
};

namespace detail {

/// Exact same-q product integral over [0, x]:
///   int C^2 = (x + S C)/2,  int C S = S^2/2,  int S^2 = (S C - x)/(2q).
inline double same_q_product(const RegionSolution& f, const RegionSolution& g) {
  const double x = f.length();
  const double q = f.q;
  const auto p = fundamental_pair(q, x);
  const double icc = 0.5 * (x + p.s * p.c);
  const double ics = 0.5 * p.s * p.s;
  const double iss = (q != 0.0) ? (p.s * p.c - x) / (2.0 * q) : x * x * x / 3.0;
  return f.a * g.a * icc + (f.a * g.b + f.b * g.a) * ics + f.b * g.b * iss;
}

}  // namespace detail

/// Exact integral of f*g over their (shared) region. Distinct q use the
/// Lagrange identity int f g = [f' g - f g']/(q_f - q_g); nearly equal q fall
/// back to quadrature to avoid cancellation in the bracket.
inline double product_integral(const RegionSolution& f, const RegionSolution& g) {
  const double dq = f.q - g.q;
  const double len = f.length();
  const double scale = std::abs(f.q) + std::abs(g.q) + 1.0 / (len * len);
  if (dq == 0.0) return detail::same_q_product(f, g);
  if (std::abs(dq) > 1e-7 * scale) {
    double bracket = 0.0;
    for (auto [z, sgn] : {std::pair{f.z_hi, 1.0}, std::pair{f.z_lo, -1.0}}) {
      bracket += sgn * (f.deriv(z) * g.value(z) - f.value(z) * g.deriv(z));
    }
    return bracket / dq;
  }
  return gauss64([&](double z) { return f.value(z) * g.value(z); }, f.z_lo, f.z_hi);
}

}  // namespace tecopt
