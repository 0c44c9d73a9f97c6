#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tecopt/objective.hpp"
#include "tecopt/quadrature.hpp"

using namespace tecopt;
using Catch::Approx;

namespace {
const SystemParams kP{};

struct Setup {
  RadialMode radial;
  double u_st;
  CostConfig cfg;
  Setup() {
    radial = radial_roots(0, 1, kP)[0];
    u_st = find_ust(5.5, kP, radial);
    cfg = CostConfig::make(kP, radial, u_st, 5.5, 5.0);
  }
};
const Setup& setup() {
  static Setup s;
  return s;
}
}  // namespace

TEST_CASE("penalty basics") {
  const auto& cfg = setup().cfg;
  CHECK(penalty_f(0.0, cfg) == 0.0);
  CHECK(penalty_f(1.3, cfg) == penalty_f(-1.3, cfg));
  double prev = 0.0;
  for (double u = 0.05; u <= 2.5; u += 0.05) {
    const double f = penalty_f(u, cfg);
    CHECK(f > prev);
    prev = f;
  }
  // dominance margin at the bound
  CHECK(penalty_f(cfg.u_st, cfg) / (cfg.u_st * cfg.u_st) >= 10.0);
}

TEST_CASE("penalty small-u expansion is quartic") {
  const auto& cfg = setup().cfg;
  const double u = 1e-3;
  const double x = cfg.c2 * u * u;
  const double quartic = cfg.c1 * cfg.c2 * cfg.c2 * u * u * u * u / 2.0;
  // leading quartic term with its first correction, e^x - x - 1 = x^2/2 (1 + x/3 + ...)
  CHECK(penalty_f(u, cfg) == Approx(quartic * (1.0 + x / 3.0)).epsilon(1e-6));
  CHECK(penalty_f(u, cfg) == Approx(quartic).epsilon(1e-5));
}

TEST_CASE("penalty saturates instead of overflowing") {
  const auto& cfg = setup().cfg;
  bool sat = false;
  const double f = penalty_f(100.0, cfg, &sat);
  CHECK(sat);
  CHECK(std::isfinite(f));
  bool sat2 = true;
  penalty_f(0.5, cfg, &sat2);
  CHECK_FALSE(sat2);
}

TEST_CASE("default penalty constants pass all shape conditions") {
  const auto rep = validate_penalty_constants(setup().cfg);
  INFO("inner worst " << rep.inner.worst_ratio << " mid worst " << rep.mid.worst_ratio
                      << " outer worst " << rep.outer.worst_ratio);
  CHECK(rep.inner.pass);
  CHECK(rep.mid.pass);
  CHECK(rep.outer.pass);
  CHECK(rep.all_pass());
}

TEST_CASE("degenerate penalty constants fail the report") {
  CostConfig weak = setup().cfg;
  weak.c2 = 1e-6;  // nearly quartic everywhere: no outer dominance
  CHECK_FALSE(validate_penalty_constants(weak).outer.pass);

  CostConfig loud = setup().cfg;
  loud.c1 = 1e6;  // violates f << u^2 inside the band
  CHECK_FALSE(validate_penalty_constants(loud).mid.pass);
}

TEST_CASE("penalty integral is exact for piecewise-constant controls") {
  const auto& cfg = setup().cfg;
  auto zero = PiecewiseControl::uniform(100.0, {0.0, 0.0});
  CHECK(penalty_integral(zero, cfg) == 0.0);

  const double a = 1.1;
  auto single = PiecewiseControl::uniform(250.0, {a});
  CHECK(penalty_integral(single, cfg) == Approx(cfg.c_u * penalty_f(a, cfg) * 250.0).epsilon(1e-14));

  auto five = PiecewiseControl::uniform(250.0, {a, 0.0, 0.0, 0.0, 0.0});
  CHECK(penalty_integral(five, cfg) ==
        Approx(cfg.c_u * penalty_f(a, cfg) * 50.0).epsilon(1e-14));
  // permutation invariance
  auto perm = PiecewiseControl::uniform(250.0, {0.0, 0.0, a, 0.0, 0.0});
  CHECK(penalty_integral(perm, cfg) == Approx(penalty_integral(five, cfg)).epsilon(1e-14));
}

TEST_CASE("terminal cost of the zero state vanishes") {
  BasisCache cache(kP);
  ModalState z;
  z.basis = cache.get(0.0)->basis;
  z.coeffs.assign(4, 0.0);
  CHECK(terminal_cost(z, setup().cfg) == 0.0);
}

TEST_CASE("one-mode terminal cost agrees with 2D quadrature of the field") {
  BasisCache cache(kP);
  auto basis = cache.get(0.0)->basis;
  ModalState st;
  st.basis = basis;
  st.coeffs = {1.0, 0.0, 0.0, 0.0};
  const double fd_modal = terminal_cost(st, setup().cfg);
  // independent 2D quadrature of the synthesized field over V1
  const auto& m0 = basis->modes[0];
  const double radial_int = gauss64(
      [&](double r) {
        const double j = std::cyl_bessel_j(0, basis->rf.mu * r / kP.r1);
        return j * j * r;
      },
      0.0, kP.r1);
  const double axial_int =
      gauss64([&](double z) { return m0.value(z, kP.z0) * m0.value(z, kP.z0); }, kP.z0, kP.z1);
  const double volume_int = 2.0 * kPi * radial_int * axial_int;
  const double expect = volume_int / (kP.cyl_volume() * 5.5 * 5.5);
  CHECK(fd_modal == Approx(expect).epsilon(1e-8));
}

TEST_CASE("terminal cost scale is order one for the initial steady state") {
  BasisCache cache(kP);
  auto bundle = cache.get(setup().u_st);
  ModalState st;
  st.basis = bundle->basis;
  st.coeffs = bundle->theta_ss;
  const double fd = terminal_cost(st, setup().cfg);
  CHECK(fd > 0.1);
  CHECK(fd < 10.0);
}

TEST_CASE("total cost decomposes and respects monotonicity in |u|") {
  BasisCache cache(kP);
  auto bundle = cache.get(setup().u_st);
  ModalState init;
  init.basis = bundle->basis;
  init.coeffs = bundle->theta_ss;

  CostConfig cfg = setup().cfg;
  cfg.gamma = 4.0;
  auto zero = PiecewiseControl::uniform(600.0, {0.0, 0.0, 0.0, 0.0, 0.0});
  auto r0 = total_cost(zero, init, cfg, kP, cache);
  CHECK(r0.Fp == 0.0);
  CHECK(r0.F == Approx(1e4 * r0.Fd).epsilon(1e-14));
  CHECK(r0.F >= 0.0);

  // raising every |u| strictly raises the penalty part
  auto bumped = PiecewiseControl::uniform(600.0, {0.9, -0.9, 0.9, -0.9, 0.9});
  auto rb = total_cost(bumped, init, cfg, kP, cache);
  CHECK(rb.Fp > r0.Fp);
  CHECK(rb.max_abs_u == Approx(0.9));

  // re-evaluation of the same control is bit-identical
  auto rb2 = total_cost(bumped, init, cfg, kP, cache);
  CHECK(rb.F == rb2.F);
}

TEST_CASE("swapping pieces changes the terminal cost but not the penalty") {
  BasisCache cache(kP);
  auto bundle = cache.get(setup().u_st);
  ModalState init;
  init.basis = bundle->basis;
  init.coeffs = bundle->theta_ss;
  CostConfig cfg = setup().cfg;

  auto ab = PiecewiseControl::uniform(400.0, {-1.5, 0.0});
  auto ba = PiecewiseControl::uniform(400.0, {0.0, -1.5});
  auto rab = total_cost(ab, init, cfg, kP, cache);
  auto rba = total_cost(ba, init, cfg, kP, cache);
  CHECK(rab.Fp == Approx(rba.Fp).epsilon(1e-14));
  CHECK(rab.Fd != rba.Fd);
}
