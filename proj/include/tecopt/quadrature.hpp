#pragma once

#include <array>
#include <cstddef>

namespace tecopt {

/// 64-point Gauss-Legendre rule on [-1, 1], stored as the positive half
/// (nodes are symmetric about 0).
struct GaussLegendre64 {
  static constexpr std::size_t half = 32;
  static constexpr std::array<std::array<double, 2>, half> pos = {{
      {0.024350292663424429, 0.048690957009139751},
      {0.072993121787799042, 0.048575467441503456},
      {0.12146281929612056, 0.048344762234802954},
      {0.1696444204239928, 0.047999388596458317},
      {0.21742364374000708, 0.047540165714830301},
      {0.26468716220876742, 0.04696818281621},
      {0.31132287199021097, 0.046284796581314375},
      {0.35722015833766813, 0.045491627927418114},
      {0.40227015796399163, 0.044590558163756545},
      {0.44636601725346409, 0.043583724529323464},
      {0.48940314570705296, 0.042473515123653598},
      {0.53127946401989457, 0.041262563242623486},
      {0.571895646202634, 0.03995374113272035},
      {0.61115535517239328, 0.038550153178615591},
      {0.64896547125465731, 0.037055128540240151},
      {0.68523631305423327, 0.035472213256882323},
      {0.71988185017161077, 0.033805161837141787},
      {0.75281990726053194, 0.032057928354851453},
      {0.78397235894334139, 0.030234657072402495},
      {0.81326531512279754, 0.028339672614259702},
      {0.84062929625258032, 0.026377469715054627},
      {0.86599939815409277, 0.024352702568710853},
      {0.88931544599511414, 0.022270173808383007},
      {0.91052213707850282, 0.020134823153530094},
      {0.92956917213193957, 0.017951715775697302},
      {0.94641137485840277, 0.015726030476025082},
      {0.96100879965205377, 0.013463047896718231},
      {0.97332682778991098, 0.011168139460131466},
      {0.98333625388462598, 0.008846759826364391},
      {0.99101337147674429, 0.0065044579689796543},
      {0.99634011677195522, 0.0041470332605629233},
      {0.99930504173577217, 0.0017832807216942152},
  }};

  /// Node i in [0, 64) mapped to [a, b].
  static double node(std::size_t i, double a, double b) {
    const double x = i < half ? -pos[half - 1 - i][0] : pos[i - half][0];
    return 0.5 * (a + b) + 0.5 * (b - a) * x;
  }
  static double weight(std::size_t i, double a, double b) {
    const double w = i < half ? pos[half - 1 - i][1] : pos[i - half][1];
    return 0.5 * (b - a) * w;
  }
};

/// Integrates f over [a, b] with the 64-point rule.
template <typename F>
double gauss64(F&& f, double a, double b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < 64; ++i) {
    acc += GaussLegendre64::weight(i, a, b) * f(GaussLegendre64::node(i, a, b));
  }
  return acc;
}

}  // namespace tecopt
