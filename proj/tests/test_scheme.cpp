#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "garz/diagnostics.hpp"
#include "garz/run.hpp"
#include "garz/scheme.hpp"

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

// Classical Godunov flux of rho (1 - rho), written case by case.
double textbook_godunov(double a, double b) {
  auto f = [](double r) { return r * (1.0 - r); };
  if (a <= b) return std::min(f(a), f(b));
  if (b < 0.5 && 0.5 < a) return 0.25;
  return std::max(f(a), f(b));
}

InitialData riemann_init(double rl, double wl, double rr, double wr) {
  return InitialData{PiecewiseConstant{{0.0}, {rl, rr}}, PiecewiseConstant{{0.0}, {wl, wr}}};
}

}  // namespace

TEST(Mesh, MaxStableLambda) {
  EXPECT_NEAR(max_stable_lambda(flat_family()), 1.0 / (5.0 * 1.05), 1e-12);
  const FluxFamily wide(make_default_model(1.0, 0.0, 0.6));
  EXPECT_NEAR(max_stable_lambda(wide), 1.0 / (2.0 * 1.05), 1e-12);
}

TEST(Mesh, CflBoundary) {
  const auto& F = default_family();
  const double lam = max_stable_lambda(F);
  EXPECT_NO_THROW(make_mesh(F, -1, 1, 100, 0.5, lam));
  try {
    make_mesh(F, -1, 1, 100, 0.5, lam * 1.01);
    FAIL() << "expected CflViolation";
  } catch (const CflViolation& e) {
    EXPECT_NE(std::string(e.what()).find("CFL"), std::string::npos);
  }
  EXPECT_NEAR(make_mesh(F, -1, 1, 100, 0.5).lambda, 0.9 * lam, 1e-15);
}

TEST(Mesh, ConfigChecks) {
  const auto& F = default_family();
  EXPECT_THROW(make_mesh(F, 1, -1, 100, 0.5), ConfigError);
  EXPECT_THROW(make_mesh(F, -1, 1, 3, 0.5), ConfigError);
  EXPECT_THROW(make_mesh(F, -1, 1, 100, -0.5), ConfigError);
}

TEST(Discretize, ConstantAndAlignedBreakpoints) {
  const auto& F = default_family();
  const auto mesh = make_mesh(F, 0, 1, 10, 0.1);
  const auto s = discretize({PiecewiseConstant::constant(0.5), PiecewiseConstant::constant(1.0)}, mesh, 0.2);
  for (std::size_t j = 0; j < 10; ++j) {
    EXPECT_EQ(s.u[j], 0.5);
    EXPECT_EQ(s.w[j], 1.0);
  }
  EXPECT_EQ(s.t, 0.0);
  const auto r = discretize(riemann_init(0.3, 0.0, 0.6, 1.0), make_mesh(F, -1, 1, 8, 0.1), 0.2);
  for (std::size_t j = 0; j < 8; ++j) {
    EXPECT_EQ(r.u[j], j < 4 ? 0.3 : 0.6);
    EXPECT_EQ(r.w[j], j < 4 ? 0.0 : 1.0);
  }
}

TEST(Discretize, MidCellBreakpointAverages) {
  const auto mesh = make_mesh(default_family(), 0, 1, 4, 0.1);
  // Cell 1 is [0.25, 0.5); the jump sits a quarter cell in.
  const InitialData init{PiecewiseConstant::constant(0.5), PiecewiseConstant{{0.3125}, {0.0, 1.0}}};
  const auto s = discretize(init, mesh, 0.2);
  EXPECT_NEAR(s.w[1], 0.75, 1e-15);
  EXPECT_EQ(s.w[0], 0.0);
  EXPECT_EQ(s.w[2], 1.0);
}

TEST(Discretize, SampledDensity) {
  const auto mesh = make_mesh(default_family(), 0, 1, 4, 0.1);
  const InitialData init{std::function<double(double)>([](double x) { return 0.3 + 0.4 * x; }),
                         PiecewiseConstant::constant(0.5)};
  const auto s = discretize(init, mesh, 0.2);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(s.u[j], 0.3 + 0.4 * mesh.cell_center(j), 1e-14);
}

TEST(Discretize, VacuumRejected) {
  const auto mesh = make_mesh(default_family(), 0, 1, 4, 0.1);
  EXPECT_THROW(discretize(riemann_init(0.1, 0.0, 0.5, 1.0), mesh, 0.2), VacuumError);
  const InitialData sampled{std::function<double(double)>([](double x) { return x; }),
                            PiecewiseConstant::constant(0.5)};
  EXPECT_THROW(discretize(sampled, mesh, 0.2), VacuumError);
  EXPECT_THROW(discretize(riemann_init(0.3, 0.0, 0.5, 1.5), mesh, 0.2), ConfigError);
}

TEST(Step, ConstantStateIsFixedPoint) {
  const auto& F = default_family();
  const auto mesh = make_mesh(F, -1, 1, 50, 0.1);
  GridState s{0.0, std::vector<double>(50, 0.6), std::vector<double>(50, 0.3)};
  const auto next = step(s, F, mesh);
  for (std::size_t j = 0; j < 50; ++j) {
    EXPECT_EQ(next.u[j], 0.6);
    EXPECT_EQ(next.w[j], 0.3);
  }
  EXPECT_NEAR(next.t, mesh.dt(), 1e-16);
}

TEST(Step, FlatModelAdvectsWAtFlowSpeed) {
  const auto& F = flat_family();
  const auto mesh = make_mesh(F, -1, 1, 80, 0.1);
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GridState s{0.0, std::vector<double>(80, 0.4), {}};
  for (int j = 0; j < 80; ++j) s.w.push_back(u(gen));
  const auto r = step_detailed(s, F, mesh);
  const double speed = 1.0 - 0.4;
  for (std::size_t j = 0; j < 80; ++j) {
    EXPECT_NEAR(r.next.u[j], 0.4, 1e-15);
    EXPECT_NEAR(r.speed[j], speed, 1e-15);
    const double wl = j == 0 ? s.w[0] : s.w[j - 1];
    const double th = mesh.lambda * speed;
    EXPECT_NEAR(r.next.w[j], (1.0 - th) * s.w[j] + th * wl, 1e-15);
  }
}

TEST(Step, MatchesTextbookGodunovForUniformW) {
  const auto& F = flat_family();
  const auto mesh = make_mesh(F, 0, 1, 60, 0.1);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  GridState s{0.0, {}, std::vector<double>(60, 0.7)};
  for (int j = 0; j < 60; ++j) s.u.push_back(u(gen));
  const auto next = step(s, F, mesh);
  for (long j = 0; j < 60; ++j) {
    const double left = textbook_godunov(ghost_u(s.u, j - 1), s.u[j]);
    const double right = textbook_godunov(s.u[j], ghost_u(s.u, j + 1));
    EXPECT_NEAR(next.u[j], s.u[j] - mesh.lambda * (right - left), 1e-15);
  }
}

TEST(Step, MonotoneInDensityForFixedW) {
  const auto& F = default_family();
  const auto mesh = make_mesh(F, 0, 1, 40, 0.1);
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    GridState a{0.0, {}, {}}, b;
    for (int j = 0; j < 40; ++j) {
      a.u.push_back(0.2 + 0.7 * u(gen));
      a.w.push_back(u(gen));
    }
    b = a;
    for (auto& x : b.u) x = std::min(1.0, x + 0.1 * u(gen));
    const auto na = step(a, F, mesh), nb = step(b, F, mesh);
    for (std::size_t j = 0; j < 40; ++j) EXPECT_LE(na.u[j], nb.u[j] + 1e-15);
  }
}

TEST(Step, InvariantSentinel) {
  const auto& F = default_family();
  auto mesh = make_mesh(F, 0, 1, 10, 0.1);
  mesh.lambda = 5.0;  // bypasses validation on purpose
  GridState s{0.0, std::vector<double>(10, 0.25), std::vector<double>(10, 1.0)};
  s.u[5] = 1.0;
  EXPECT_THROW(step(s, F, mesh), InvariantViolation);
}

TEST(Run, ZeroEndTimeReturnsInitialState) {
  const auto& F = default_family();
  const auto mesh = make_mesh(F, -1, 1, 40, 0.0);
  const auto init = riemann_init(0.3, 1.0, 0.5, 0.2);
  const auto r = run(init, F, mesh, {0.0});
  ASSERT_EQ(r.snapshots.size(), 1u);
  EXPECT_EQ(r.snapshots[0].u, discretize(init, mesh, 0.2).u);
  EXPECT_EQ(r.report.n_steps, 0);
}

TEST(Run, ConstantDataSnapshotsIdentical) {
  const auto& F = default_family();
  const auto mesh = make_mesh(F, -1, 1, 40, 0.3);
  const InitialData init{PiecewiseConstant::constant(0.45), PiecewiseConstant::constant(0.8)};
  const auto r = run(init, F, mesh, {0.0, 0.1, 0.3});
  for (const auto& s : r.snapshots) {
    EXPECT_EQ(s.u, r.snapshots[0].u);
    EXPECT_EQ(s.w, r.snapshots[0].w);
  }
  for (double tv_n : r.report.tv_w_history) EXPECT_EQ(tv_n, 0.0);
}

TEST(Run, SnapshotsRoundDown) {
  const auto& F = default_family();
  const auto mesh = make_mesh(F, -1, 1, 40, 0.5);
  const auto r = run(riemann_init(0.3, 1.0, 0.5, 0.2), F, mesh, {0.5 * mesh.dt(), 2.0 * mesh.dt()});
  EXPECT_EQ(r.snapshots[0].t, 0.0);
  EXPECT_NEAR(r.snapshots[1].t, 2.0 * mesh.dt(), 1e-15);
  EXPECT_THROW(run(riemann_init(0.3, 1.0, 0.5, 0.2), F, mesh, {0.6}), ConfigError);
}

TEST(Run, ScenarioPropertiesHold) {
  const auto& F = default_family();
  const auto mesh = make_mesh(F, -1, 1, 200, 0.5);
  const auto init = riemann_init(0.3, 1.0, 0.5, 0.2);
  const auto r = run(init, F, mesh, {0.5});
  const auto& rep = r.report;
  EXPECT_GE(rep.u_bounds.first, 0.2 - 1e-12);
  EXPECT_LE(rep.u_bounds.second, 1.0 + 1e-12);
  EXPECT_GE(rep.w_bounds.first, 0.2);
  EXPECT_LE(rep.w_bounds.second, 1.0);
  EXPECT_EQ(rep.tv_increase_violations, 0);
  EXPECT_EQ(rep.time_modulus_violations, 0);
  EXPECT_LE(rep.mass_defect, 1e-12 * 200 * rep.n_steps);
  EXPECT_LE(rep.rhow_defect, 1e-12);
  EXPECT_EQ(rep.entropy_violation_count, 0);
  EXPECT_FALSE(rep.boundary_warning);
  for (std::size_t n = 1; n < rep.tv_w_history.size(); ++n)
    EXPECT_LE(rep.tv_w_history[n], rep.tv_w_history[n - 1] + 1e-12);
}
