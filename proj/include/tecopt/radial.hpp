#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tecopt/errors.hpp"
#include "tecopt/params.hpp"

namespace tecopt {

/// Radial eigenmode J_n(mu_{n,m} r / r1) cos(n phi) of the lateral Robin problem.
struct RadialMode {
  int n = 0;        ///< angular order
  int m = 0;        ///< radial index, 0-based
  double mu = 0.0;  ///< dimensionless root mu_{n,m}
};

/// Lateral boundary residual whose positive zeros are mu_{n,m}:
///   alpha J_n(mu) + (lambda_a / r1) (n J_n(mu) - mu J_{n+1}(mu)).
inline double radial_residual(int n, double mu, const SystemParams& p) {
  const double jn = std::cyl_bessel_j(n, mu);
  const double jn1 = std::cyl_bessel_j(n + 1, mu);
  return p.alpha * jn + (p.lambda_a / p.r1) * (n * jn - mu * jn1);
}

/// The m_max smallest positive roots for angular order n, each bracketed by a
/// scan of step 1e-3 and refined by bisection to |residual| < 1e-12 scale.
inline std::vector<RadialMode> radial_roots(int n, int m_max, const SystemParams& p) {
  if (n < 0 || m_max < 1) throw std::invalid_argument("radial_roots: need n >= 0, m_max >= 1");
  std::vector<RadialMode> out;
  const double step = 1e-3;
  const double mu_end = (m_max + n + 3) * kPi + 10.0;
  double lo = 1e-12;  // a Biot-shifted root can sit arbitrarily close to 0
  double f_lo = radial_residual(n, lo, p);
  for (double hi = 2 * step; hi < mu_end && static_cast<int>(out.size()) < m_max; hi += step) {
    const double f_hi = radial_residual(n, hi, p);
    if (f_lo == 0.0) {
      out.push_back({n, static_cast<int>(out.size()), lo});
    } else if (f_lo * f_hi < 0.0) {
      double a = lo, b = hi, fa = f_lo;
      for (int it = 0; it < 200 && (b - a) > 1e-15 * (1.0 + b); ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = radial_residual(n, mid, p);
        if (fa * fm <= 0.0) {
          b = mid;
        } else {
          a = mid;
          fa = fm;
        }
      }
      out.push_back({n, static_cast<int>(out.size()), 0.5 * (a + b)});
    }
    lo = hi;
    f_lo = f_hi;
  }
  if (static_cast<int>(out.size()) < m_max) {
    throw NumericalError("radial_roots: scan window exhausted for n=" + std::to_string(n) +
                         " before finding " + std::to_string(m_max) + " roots");
  }
  return out;
}

/// Radial integrals of the retained mode, n = 0 only. These carry the r
/// weight of the volume element:
///   Ir  = int_0^r1 r J0(mu r/r1)^2 dr = (r1^2/2)(J0(mu)^2 + J1(mu)^2)
///   I1  = int_0^r1 r J0(mu r/r1) dr  = r1^2 J1(mu)/mu
struct RadialFactors {
  double mu;
  double Ir;
  double I1;
  double beta;      ///< <1,J0>/<J0,J0> projection of a uniform source
  double disk_avg;  ///< disk average of J0 = 2 J1(mu)/mu
  double j0_mu;     ///< J0(mu), lateral-surface value of the radial factor

  static RadialFactors make(const RadialMode& radial, const SystemParams& p) {
    if (radial.n != 0)
      throw std::invalid_argument("RadialFactors: only the n = 0 family is supported");
    const double mu = radial.mu;
    const double j0 = std::cyl_bessel_j(0, mu);
    const double j1 = std::cyl_bessel_j(1, mu);
    RadialFactors f{};
    f.mu = mu;
    f.j0_mu = j0;
    f.Ir = 0.5 * p.r1 * p.r1 * (j0 * j0 + j1 * j1);
    f.I1 = (mu > 0) ? p.r1 * p.r1 * j1 / mu : 0.5 * p.r1 * p.r1;
    f.beta = f.I1 / f.Ir;
    f.disk_avg = 2.0 * f.I1 / (p.r1 * p.r1);
    return f;
  }
};

}  // namespace tecopt
