#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "garz/diagnostics.hpp"
#include "garz/riemann.hpp"

using namespace garz;

namespace {

const FluxFamily& default_family() {
  static const FluxFamily F(make_default_model(1.0, 0.25, 0.2));
  return F;
}

const FluxFamily& flat_family() {
  static const FluxFamily F(make_default_model(1.0, 0.0, 0.2));
  return F;
}

// Random data, redrawn until V(rho_r, w_r) lies in the attainable range of
// the w_l phase.
RiemannData admissible(std::mt19937_64& gen, const FluxFamily& F) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    RiemannData d{0.2 + 0.8 * u(gen), u(gen), 0.2 + 0.8 * u(gen), u(gen)};
    const double v = F.velocity(d.rho_r, d.w_r);
    if (v <= F.velocity(0.2, d.w_l) && v >= F.velocity(1.0, d.w_l)) return d;
  }
}

/// Profile sampled on a space-time grid, each slab held at its midpoint time.
Trajectory sampled_profile(const RiemannSolution& sol, double x_min, double x_max, int nx, int nt,
                           double T) {
  Trajectory traj;
  traj.mesh.x_min = x_min;
  traj.mesh.x_max = x_max;
  traj.mesh.n_cells = nx;
  traj.mesh.lambda = T / nt / traj.mesh.dx();
  const double dt = traj.mesh.dt();
  const auto& d = sol.data();
  for (int n = 0; n <= nt; ++n) {
    GridState s{n * dt, std::vector<double>(nx), std::vector<double>(nx)};
    const double tm = n == 0 ? 0.0 : (n + 0.5) * dt;
    for (int j = 0; j < nx; ++j) {
      const double x = traj.mesh.cell_center(j);
      const ProfileState p = n == 0 ? (x < 0.0 ? ProfileState{d.rho_l, d.w_l} : ProfileState{d.rho_r, d.w_r})
                                    : sol.evaluate(x / tm);
      s.u[j] = p.rho;
      s.w[j] = p.w;
    }
    traj.states.push_back(std::move(s));
  }
  return traj;
}

}  // namespace

TEST(Riemann, ScenarioOneIsShockPlusContact) {
  const auto sol = solve_riemann(default_family(), {0.3, 1.0, 0.5, 0.2});
  EXPECT_STREQ(wave_name(sol.wave1()), "shock");
  EXPECT_TRUE(sol.has_contact());
  // V(rho, 1) = 1 - rho must equal V(0.5, 0.2) = 0.5 (1 - 0.8 * 0.25 * (0.3/0.8)^2).
  const double target = 0.5 * (1.0 - 0.8 * 0.25 * std::pow(0.3 / 0.8, 2));
  EXPECT_NEAR(sol.contact_speed(), target, 1e-12);
  EXPECT_NEAR(sol.rho_mid(), 1.0 - target, 1e-12);
  const double sigma = std::get<Shock>(sol.wave1()).speed;
  // RH for f = rho (1 - rho): sigma = 1 - rho_l - rho_mid.
  EXPECT_NEAR(sigma, 1.0 - 0.3 - sol.rho_mid(), 1e-12);
}

TEST(Riemann, ScenarioTwoIsRarefactionPlusContact) {
  const auto sol = solve_riemann(default_family(), {0.8, 1.0, 0.5, 0.2});
  EXPECT_STREQ(wave_name(sol.wave1()), "rarefaction");
  EXPECT_TRUE(sol.has_contact());
  const auto r = std::get<Rarefaction>(sol.wave1());
  EXPECT_NEAR(r.speed_lo, 1.0 - 2.0 * 0.8, 1e-12);
  EXPECT_NEAR(r.speed_hi, 1.0 - 2.0 * sol.rho_mid(), 1e-12);
}

TEST(Riemann, ConstantData) {
  const auto sol = solve_riemann(default_family(), {0.4, 0.6, 0.4, 0.6});
  EXPECT_STREQ(wave_name(sol.wave1()), "none");
  EXPECT_FALSE(sol.has_contact());
  EXPECT_EQ(sol.rho_mid(), 0.4);
}

TEST(Riemann, EqualWReducesToScalarProblem) {
  const auto sol = solve_riemann(default_family(), {0.3, 0.5, 0.7, 0.5});
  EXPECT_EQ(sol.rho_mid(), 0.7);
  EXPECT_STREQ(wave_name(sol.wave1()), "shock");
}

TEST(Riemann, FlatModelContactCarriesOnlyW) {
  std::mt19937_64 gen(1);
  for (int s = 0; s < 200; ++s) {
    const auto d = admissible(gen, flat_family());
    const auto sol = solve_riemann(flat_family(), d);
    EXPECT_NEAR(sol.rho_mid(), d.rho_r, 1e-11);
    EXPECT_NEAR(sol.contact_speed(), 1.0 - d.rho_r, 1e-11);
  }
}

TEST(Riemann, LogisticRarefactionInterior) {
  const auto sol = solve_riemann(flat_family(), {0.8, 0.5, 0.3, 0.5});
  for (double xi : {-0.5, -0.2, 0.0, 0.3}) EXPECT_NEAR(sol.evaluate(xi).rho, (1.0 - xi) / 2.0, 1e-12);
  EXPECT_EQ(sol.evaluate(-0.7).rho, 0.8);
  EXPECT_EQ(evaluate_profile(sol, 0.5).rho, 0.3);
}

TEST(Riemann, ProfileEnds) {
  const auto sol = solve_riemann(default_family(), {0.3, 1.0, 0.5, 0.2});
  const auto l = sol.evaluate(-10.0), r = sol.evaluate(10.0);
  EXPECT_EQ(l.rho, 0.3);
  EXPECT_EQ(l.w, 1.0);
  EXPECT_EQ(r.rho, 0.5);
  EXPECT_EQ(r.w, 0.2);
  const auto mid = sol.evaluate(sol.contact_speed() - 1e-9);
  EXPECT_NEAR(mid.rho, sol.rho_mid(), 1e-10);
  EXPECT_EQ(mid.w, 1.0);
}

TEST(Riemann, ExtremeDataStillHaveIntermediateState) {
  // V(eps, w) does not depend on w and V(1, w) = 0, so every target velocity
  // is attainable in the w_l phase.
  const auto sol = solve_riemann(default_family(), {1.0, 0.0, 0.2, 1.0});
  EXPECT_NEAR(sol.rho_mid(), 0.2, 1e-11);
  EXPECT_STREQ(wave_name(sol.wave1()), "rarefaction");
  EXPECT_THROW(solve_riemann(default_family(), {0.1, 0.0, 0.5, 1.0}), DomainError);
  EXPECT_THROW(solve_riemann(default_family(), {0.3, 1.2, 0.5, 1.0}), DomainError);
}

TEST(Riemann, RandomDataInvariants) {
  const auto& F = default_family();
  std::mt19937_64 gen(99);
  for (int s = 0; s < 10000; ++s) {
    const auto d = admissible(gen, F);
    const auto sol = solve_riemann(F, d);
    EXPECT_NEAR(F.velocity(sol.rho_mid(), d.w_l), F.velocity(d.rho_r, d.w_r), 1e-10);
    if (const auto* sh = std::get_if<Shock>(&sol.wave1())) {
      EXPECT_GT(sol.rho_mid(), d.rho_l);
      EXPECT_LE(sh->speed, sol.contact_speed() + 1e-10);
      EXPECT_GE(F.dflux(d.rho_l, d.w_l), sh->speed - 1e-10);
      EXPECT_LE(F.dflux(sol.rho_mid(), d.w_l), sh->speed + 1e-10);
    } else if (const auto* rf = std::get_if<Rarefaction>(&sol.wave1())) {
      EXPECT_LT(sol.rho_mid(), d.rho_l);
      EXPECT_LE(rf->speed_lo, rf->speed_hi);
      EXPECT_LE(rf->speed_hi, sol.contact_speed() + 1e-10);
    }
  }
}

TEST(Riemann, RarefactionProfileMonotone) {
  const auto sol = solve_riemann(default_family(), {0.8, 1.0, 0.5, 0.2});
  const auto r = std::get<Rarefaction>(sol.wave1());
  double prev = sol.evaluate(r.speed_lo).rho;
  EXPECT_NEAR(prev, 0.8, 1e-10);
  for (int i = 1; i <= 100; ++i) {
    const double rho = sol.evaluate(r.speed_lo + (r.speed_hi - r.speed_lo) * i / 100.0).rho;
    EXPECT_LE(rho, prev + 1e-14);
    prev = rho;
  }
  EXPECT_NEAR(prev, sol.rho_mid(), 1e-10);
}

TEST(Riemann, ProfileSatisfiesWeakForm) {
  const auto& F = default_family();
  std::mt19937_64 gen(5);
  for (int s = 0; s < 4; ++s) {
    const auto d = admissible(gen, F);
    const auto sol = solve_riemann(F, d);
    const auto traj = sampled_profile(sol, -2.0, 2.0, 2000, 200, 1.0);
    for (const auto& phi : make_test_functions(s, 5, -2.0, 2.0, 1.0))
      EXPECT_LE(std::abs(weak_form_residual(traj, F, phi)), 1e-3);
  }
}

TEST(OracleError, ExactStateHasNoError) {
  const auto& F = default_family();
  const auto sol = solve_riemann(F, {0.4, 0.7, 0.4, 0.7});
  MeshConfig m{-1, 1, 100, 0.1, 0.5};
  GridState s{0.5, std::vector<double>(100, 0.4), std::vector<double>(100, 0.7)};
  EXPECT_LE(oracle_l1_error(s, m, sol).total(), 1e-14);
}
