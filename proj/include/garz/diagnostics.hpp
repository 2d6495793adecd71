#pragma once

// Certificates computed on a running or finished simulation: invariant
// bounds, TV history, conservation defects, discrete entropy inequalities,
// front tracking of w-jumps and entropy-solution residuals against smooth
// test functions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "garz/errors.hpp"
#include "garz/grid.hpp"
#include "garz/interface.hpp"
#include "garz/model.hpp"
#include "garz/scheme.hpp"

namespace garz {

inline constexpr double kRoundoffSlack = 1e-12;

inline double tv(const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t j = 1; j < w.size(); ++j) s += std::abs(w[j] - w[j - 1]);
  return s;
}

/// Uniform k-grid {0, 1/(n-1), ..., 1}.
inline std::vector<double> k_grid(int n) {
  std::vector<double> ks(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ks[static_cast<std::size_t>(i)] = n == 1 ? 0.0 : detail::grid_point(i, n);
  return ks;
}

/// Uniformly spaced states t^n = n dt, n = 0..N, on one mesh.
struct Trajectory {
  MeshConfig mesh;
  std::vector<GridState> states;

  double dt() const { return mesh.dt(); }
  double final_time() const { return states.empty() ? 0.0 : states.back().t; }
  std::size_t n_steps() const { return states.empty() ? 0 : states.size() - 1; }
};

// ---------------------------------------------------------------------------
// Discrete entropy inequality of a single step

struct EntropyStepAudit {
  long violations = 0;
  double worst = 0.0;  // largest violation magnitude
  double slack = 0.0;  // sum of slack * dx over cells and k
};

/// Checks, for each cell and each k,
///   |u_j^{n+1} - k| <= |u_j^n - k| - lambda (Phi_{j+1/2} - Phi_{j-1/2})
///                      + lambda |F_{j+1/2}(k,k) - F_{j-1/2}(k,k)|
/// with Phi_{j+1/2} = F_{j+1/2}(u_j v k, u_{j+1} v k) - F_{j+1/2}(u_j ^ k, u_{j+1} ^ k).
inline EntropyStepAudit audit_entropy_step(const std::vector<FluxSlice>& slices,
                                           const GridState& old, const GridState& next,
                                           double lambda, double dx,
                                           const std::vector<double>& ks) {
  EntropyStepAudit a;
  const std::size_t n = old.size();
  std::vector<double> phi(n + 1), fkk(n + 1);
  for (double k : ks) {
    for (std::size_t i = 0; i <= n; ++i) {
      const double ul = ghost_u(old.u, static_cast<long>(i) - 1);
      const double ur = ghost_u(old.u, static_cast<long>(i));
      phi[i] = interface_flux_at(slices, i, std::max(ul, k), std::max(ur, k)) -
               interface_flux_at(slices, i, std::min(ul, k), std::min(ur, k));
      fkk[i] = interface_flux_at(slices, i, k, k);
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double rhs = std::abs(old.u[j] - k) - lambda * (phi[j + 1] - phi[j]) +
                         lambda * std::abs(fkk[j + 1] - fkk[j]);
      const double s = rhs - std::abs(next.u[j] - k);
      a.slack += s * dx;
      if (s < -kRoundoffSlack) {
        ++a.violations;
        a.worst = std::max(a.worst, -s);
      }
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// Test functions

/// Product of compactly supported C-infinity bumps exp(-1/(1-s^2)) in t and x.
struct TestFunction {
  double t0 = 0.0;
  double x0 = 0.0;
  double rt = 1.0;
  double rx = 1.0;

  static double bump(double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }
  static double bump_prime(double s) {
    if (!(std::abs(s) < 1.0)) return 0.0;
    const double q = 1.0 - s * s;
    return bump(s) * (-2.0 * s / (q * q));
  }

  double operator()(double t, double x) const { return bump((t - t0) / rt) * bump((x - x0) / rx); }
  double dt(double t, double x) const {
    return bump_prime((t - t0) / rt) / rt * bump((x - x0) / rx);
  }
  double dx(double t, double x) const {
    return bump((t - t0) / rt) * bump_prime((x - x0) / rx) / rx;
  }
  double t_lo() const { return t0 - rt; }
  double t_hi() const { return t0 + rt; }
  double x_lo() const { return x0 - rx; }
  double x_hi() const { return x0 + rx; }
};

namespace detail {
inline double unit_draw(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}
}  // namespace detail

/// Seeded family of bumps supported inside [x_min, x_max] x (-inf, T]. Time
/// supports may start before t = 0 so the initial-datum term is exercised.
inline std::vector<TestFunction> make_test_functions(std::uint64_t seed, int count, double x_min,
                                                     double x_max, double T) {
  std::mt19937_64 gen(seed);
  const double width = x_max - x_min;
  std::vector<TestFunction> out;
  for (int i = 0; i < count; ++i) {
    TestFunction phi;
    phi.rx = width * (0.1 + 0.15 * detail::unit_draw(gen));
    phi.x0 = x_min + phi.rx + (width - 2.0 * phi.rx) * (0.2 + 0.6 * detail::unit_draw(gen));
    phi.rt = T * (0.3 + 0.15 * detail::unit_draw(gen));
    phi.t0 = (T * 0.98 - phi.rt) * detail::unit_draw(gen);
    out.push_back(phi);
  }
  return out;
}

namespace detail {

inline void check_support(const Trajectory& traj, const TestFunction& phi) {
  const auto& m = traj.mesh;
  if (phi.x_lo() < m.x_min || phi.x_hi() > m.x_max)
    throw SupportError("test function support leaves the spatial domain");
  if (phi.t_hi() > traj.final_time() + 1e-12)
    throw SupportError("test function support extends past the simulated time");
  if (traj.states.size() < 2) throw SupportError("trajectory has no time steps");
}

// Visits (t^n, x_j, state n, cell j) for every slab and cell meeting the
// support of phi.
template <class Visit>
void for_each_cell_in_support(const Trajectory& traj, const TestFunction& phi, Visit&& visit) {
  const auto& m = traj.mesh;
  const double dt = traj.dt();
  const double dx = m.dx();
  const int j_lo = std::max(0, static_cast<int>(std::floor((phi.x_lo() - m.x_min) / dx)) - 1);
  const int j_hi = std::min(m.n_cells - 1, static_cast<int>(std::ceil((phi.x_hi() - m.x_min) / dx)) + 1);
  for (std::size_t n = 0; n + 1 < traj.states.size(); ++n) {
    const double t = traj.states[n].t;
    if (t + dt <= phi.t_lo() || t >= phi.t_hi()) continue;
    for (int j = j_lo; j <= j_hi; ++j) visit(t, m.cell_center(j), n, static_cast<std::size_t>(j));
  }
}

}  // namespace detail

/// Quadrature of
///   int int (rho w phi_t + f(rho, w) w phi_x) dx dt + int rho_0 w_0 phi(0, x) dx
/// with the trajectory held piecewise constant per cell and step: phi_t is
/// integrated exactly over each step at the cell center and phi_x exactly
/// over each cell at the step midpoint.
inline double weak_form_residual(const Trajectory& traj, const FluxFamily& F,
                                 const TestFunction& phi) {
  detail::check_support(traj, phi);
  const double dt = traj.dt(), dx = traj.mesh.dx();
  double acc = 0.0;
  detail::for_each_cell_in_support(traj, phi, [&](double t, double x, std::size_t n, std::size_t j) {
    const double u = traj.states[n].u[j], w = traj.states[n].w[j];
    const double tm = t + 0.5 * dt;
    acc += u * w * (phi(t + dt, x) - phi(t, x)) * dx +
           F.flux(u, w) * w * (phi(tm, x + 0.5 * dx) - phi(tm, x - 0.5 * dx)) * dt;
  });
  const auto& s0 = traj.states.front();
  for (std::size_t j = 0; j < s0.size(); ++j) {
    const double x = traj.mesh.cell_center(static_cast<int>(j));
    acc += s0.u[j] * s0.w[j] * phi(0.0, x) * traj.mesh.dx();
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Front tracking

/// Discrete shadow of one w-discontinuity curve y_m(t).
struct Front {
  double level = 0.5;     // (a_{m-1} + a_m) / 2
  double w_left0 = 0.0;   // plateau values on either side at t = 0
  double w_right0 = 0.0;
  std::vector<double> t;  // t^n
  std::vector<double> y;  // y_m(t^n)
  std::vector<double> w_minus, w_plus;  // cell traces on either side
  std::vector<double> u_minus, u_plus;

  double slope() const { return t.size() < 2 ? 0.0 : (y.back() - y.front()) / (t.back() - t.front()); }
};

inline constexpr double kTraceTol = 1e-3;

/// Follows each initial breakpoint of w0 through the trajectory: the front
/// sits where w crosses the mid level between the adjacent plateau values,
/// searched in a window of (L/eps) lambda + 2 cells around its previous cell.
/// trace_offset >= 0 reads traces that many cells outside the crossing pair;
/// a negative value walks out to the plateaus.
inline std::vector<Front> track_fronts(const Trajectory& traj, const InitialData& init,
                                       const FluxFamily& F, int trace_offset = -1) {
  const auto& m = traj.mesh;
  const auto& w0 = init.w0;
  const double dx = m.dx();
  const double dt = traj.dt();
  const int n = m.n_cells;
  const int window =
      static_cast<int>(std::ceil(F.lipschitz_bound() / F.epsilon() * m.lambda)) + 2;
  const double max_move = (F.max_velocity() + 1.0) * dt + 2.0 * dx;

  std::vector<Front> fronts;
  std::vector<int> cells;
  std::vector<double> origins;
  for (std::size_t b = 0; b < w0.breakpoints.size(); ++b) {
    const double d = w0.breakpoints[b];
    if (w0.values[b] == w0.values[b + 1] || d <= m.x_min || d >= m.x_max) continue;
    Front f;
    f.w_left0 = w0.values[b];
    f.w_right0 = w0.values[b + 1];
    f.level = 0.5 * (f.w_left0 + f.w_right0);
    fronts.push_back(f);
    origins.push_back(d);
    cells.push_back(std::clamp(static_cast<int>(std::floor((d - m.cell_center(0)) / dx)), 0, n - 2));
  }

  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const GridState& s = traj.states[k];
    for (std::size_t fi = 0; fi < fronts.size(); ++fi) {
      Front& f = fronts[fi];
      const double dir = f.w_right0 > f.w_left0 ? 1.0 : -1.0;
      const double ref = f.y.empty() ? origins[fi] : f.y.back();
      int best = -1;
      double best_y = 0.0;
      for (int i = std::max(0, cells[fi] - window); i <= std::min(n - 2, cells[fi] + window); ++i) {
        const double g0 = s.w[i] - f.level;
        const double g1 = s.w[i + 1] - f.level;
        if (dir * (g1 - g0) <= 0.0) continue;
        if (!((g0 <= 0.0 && g1 > 0.0) || (g0 >= 0.0 && g1 < 0.0) || (g0 < 0.0 && g1 >= 0.0) ||
              (g0 > 0.0 && g1 <= 0.0)))
          continue;
        const double y = m.cell_center(i) + dx * g0 / (g0 - g1);
        if (best < 0 || std::abs(y - ref) < std::abs(best_y - ref)) {
          best = i;
          best_y = y;
        }
      }
      if (best < 0)
        throw FrontLost("front " + std::to_string(fi) + " lost at t=" + std::to_string(s.t));
      // The polyline starts at the breakpoint itself.
      const double y = k == 0 ? origins[fi] : best_y;
      if (!f.y.empty() && std::abs(y - f.y.back()) > max_move)
        throw FrontLost("front " + std::to_string(fi) + " jumped " +
                        std::to_string(std::abs(y - f.y.back())) + " at t=" + std::to_string(s.t));
      cells[fi] = best;
      f.t.push_back(s.t);
      f.y.push_back(y);
      int lm = std::max(0, best - trace_offset);
      int rm = std::min(n - 1, best + 1 + trace_offset);
      if (trace_offset < 0) {
        // Walk out of the smeared transition zone: stop once w is within
        // kTraceTol * |jump| of the neighbouring plateau.
        const double tol = kTraceTol * std::abs(f.w_right0 - f.w_left0);
        const int lo = fi > 0 ? (cells[fi - 1] + best) / 2 + 1 : 0;
        const int hi = fi + 1 < fronts.size() ? (best + cells[fi + 1]) / 2 : n - 1;
        lm = best;
        while (lm > lo && std::abs(s.w[lm] - f.w_left0) > tol) --lm;
        rm = best + 1;
        while (rm < hi && std::abs(s.w[rm] - f.w_right0) > tol) ++rm;
      }
      f.w_minus.push_back(s.w[lm]);
      f.w_plus.push_back(s.w[rm]);
      f.u_minus.push_back(s.u[lm]);
      f.u_plus.push_back(s.u[rm]);
    }
    for (std::size_t fi = 1; fi < fronts.size(); ++fi)
      if (!(fronts[fi - 1].y.back() < fronts[fi].y.back()))
        throw FrontLost("fronts " + std::to_string(fi - 1) + " and " + std::to_string(fi) +
                        " collided at t=" + std::to_string(s.t));
  }
  return fronts;
}

/// Full left-hand side of the adapted entropy inequality for one k, with the
/// front term (f_max(k) - f_min(k)) sum_m int |w+ - w-| phi(t, y_m(t)) dt.
inline double entropy_inequality_residual(const Trajectory& traj, const FluxFamily& F,
                                          const TestFunction& phi, double k,
                                          const std::vector<Front>& fronts) {
  detail::check_support(traj, phi);
  const double dt = traj.dt(), dx = traj.mesh.dx();
  double acc = 0.0;
  detail::for_each_cell_in_support(traj, phi, [&](double t, double x, std::size_t n, std::size_t j) {
    const double u = traj.states[n].u[j], w = traj.states[n].w[j];
    const double tm = t + 0.5 * dt;
    acc += std::abs(u - k) * (phi(t + dt, x) - phi(t, x)) * dx +
           kruzhkov_flux(F, u, w, k) * (phi(tm, x + 0.5 * dx) - phi(tm, x - 0.5 * dx)) * dt;
  });
  const auto& s0 = traj.states.front();
  for (std::size_t j = 0; j < s0.size(); ++j) {
    const double x = traj.mesh.cell_center(static_cast<int>(j));
    acc += std::abs(s0.u[j] - k) * phi(0.0, x) * traj.mesh.dx();
  }
  const double gap = F.flux_max(k) - F.flux_min(k);
  for (const Front& f : fronts) {
    for (std::size_t n = 0; n + 1 < f.y.size(); ++n) {
      const double t = f.t[n] + 0.5 * dt;
      const double y = 0.5 * (f.y[n] + f.y[n + 1]);
      acc += gap * std::abs(f.w_plus[n] - f.w_minus[n]) * phi(t, y) * dt;
    }
  }
  return acc;
}

/// Summed slack of the discrete entropy inequalities over steps, cells and
/// the k-grid (weighted by dx). Nonnegative up to roundoff.
inline double entropy_dissipation_budget(const Trajectory& traj, const FluxFamily& F,
                                         int k_points = 11) {
  const auto ks = k_grid(k_points);
  double total = 0.0;
  for (std::size_t n = 0; n + 1 < traj.states.size(); ++n) {
    const auto slices = cell_slices(F, traj.states[n]);
    total += audit_entropy_step(slices, traj.states[n], traj.states[n + 1], traj.mesh.lambda,
                                traj.mesh.dx(), ks)
                 .slack;
  }
  return std::max(0.0, total);
}

/// Time average of the interface remainder R evaluated on the cell traces of
/// a tracked front (u_minus with the w_minus slice, u_plus with w_plus).
inline double front_germ_remainder(const Front& f, const FluxFamily& F) {
  if (f.y.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t n = 0; n < f.y.size(); ++n) {
    const auto p = make_interface(F, f.w_minus[n], f.w_plus[n]);
    acc += remainder(p, f.u_minus[n], f.u_plus[n]);
  }
  return acc / static_cast<double>(f.y.size());
}

// ---------------------------------------------------------------------------
// Report

struct DiagnosticsReport {
  std::pair<double, double> u_bounds{std::numeric_limits<double>::infinity(),
                                     -std::numeric_limits<double>::infinity()};
  std::pair<double, double> w_bounds{std::numeric_limits<double>::infinity(),
                                     -std::numeric_limits<double>::infinity()};
  std::vector<double> tv_w_history;  // entry n is TV(w^n), n = 0..N
  long tv_increase_violations = 0;
  double time_modulus_max_ratio = 0.0;  // max_n sum|w^{n+1}-w^n| dx / ((L/eps) TV(w_0) dt)
  long time_modulus_violations = 0;
  double mass_defect = 0.0;
  double rhow_defect = 0.0;
  long entropy_violation_count = 0;
  double entropy_violation_worst = 0.0;
  double entropy_dissipation_budget = 0.0;
  int n_steps = 0;
  bool boundary_warning = false;

  std::vector<std::vector<double>> ei_residual;  // [test function][k]
  std::vector<double> wf_residual;               // |WF| per test function
  std::vector<Front> fronts;
  std::vector<double> front_germ_remainder;
  std::string fronts_error;
};

/// Accumulates the per-step certificates of a run.
class StepAuditor {
 public:
  StepAuditor(const FluxFamily& F, const MeshConfig& mesh, const GridState& initial, int k_points)
      : F_(&F), mesh_(mesh), ks_(k_points > 0 ? k_grid(k_points) : std::vector<double>{}),
        tv0_(tv(initial.w)) {
    observe_state(initial);
    report_.tv_w_history.push_back(tv0_);
  }

  void observe(const GridState& old, const StepResult& r, const std::vector<FluxSlice>& slices) {
    const GridState& next = r.next;
    const std::size_t n = old.size();
    const double dx = mesh_.dx(), dt = mesh_.dt(), lambda = mesh_.lambda;
    observe_state(next);

    const double tv_next = tv(next.w);
    if (tv_next > report_.tv_w_history.back() + kRoundoffSlack) ++report_.tv_increase_violations;
    report_.tv_w_history.push_back(tv_next);

    double modulus = 0.0;
    for (std::size_t j = 0; j < n; ++j) modulus += std::abs(next.w[j] - old.w[j]) * dx;
    const double bound = F_->lipschitz_bound() / F_->epsilon() * tv0_ * dt;
    if (modulus > bound + kRoundoffSlack) ++report_.time_modulus_violations;
    if (bound > 0.0) report_.time_modulus_max_ratio = std::max(report_.time_modulus_max_ratio, modulus / bound);

    double mass_old = 0.0, mass_new = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      mass_old += old.u[j] * dx;
      mass_new += next.u[j] * dx;
      const double wl = j == 0 ? old.w[0] : old.w[j - 1];
      const double expected =
          old.u[j] * old.w[j] - lambda * (r.flux[j + 1] * old.w[j] - r.flux[j] * wl);
      report_.rhow_defect = std::max(report_.rhow_defect, std::abs(next.u[j] * next.w[j] - expected));
    }
    const double balance = dt * (r.flux.front() - r.flux.back());
    report_.mass_defect = std::max(report_.mass_defect, std::abs(mass_new - mass_old - balance));

    if (!ks_.empty()) {
      const auto a = audit_entropy_step(slices, old, next, lambda, dx, ks_);
      report_.entropy_violation_count += a.violations;
      report_.entropy_violation_worst = std::max(report_.entropy_violation_worst, a.worst);
      report_.entropy_dissipation_budget += a.slack;
    }
    ++report_.n_steps;
  }

  DiagnosticsReport& report() { return report_; }

 private:
  void observe_state(const GridState& s) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      report_.u_bounds.first = std::min(report_.u_bounds.first, s.u[j]);
      report_.u_bounds.second = std::max(report_.u_bounds.second, s.u[j]);
      report_.w_bounds.first = std::min(report_.w_bounds.first, s.w[j]);
      report_.w_bounds.second = std::max(report_.w_bounds.second, s.w[j]);
    }
  }

  const FluxFamily* F_;
  MeshConfig mesh_;
  std::vector<double> ks_;
  double tv0_;
  DiagnosticsReport report_;
};

inline nlohmann::json to_json(const Front& f) {
  return nlohmann::json{{"level", f.level}, {"w_left", f.w_left0}, {"w_right", f.w_right0},
                        {"t", f.t},         {"y", f.y},           {"slope", f.slope()}};
}

inline nlohmann::json to_json(const DiagnosticsReport& r) {
  nlohmann::json fronts = nlohmann::json::array();
  for (const auto& f : r.fronts) fronts.push_back(to_json(f));
  return nlohmann::json{
      {"u_bounds", {r.u_bounds.first, r.u_bounds.second}},
      {"w_bounds", {r.w_bounds.first, r.w_bounds.second}},
      {"tv_w_history", r.tv_w_history},
      {"tv_increase_violations", r.tv_increase_violations},
      {"time_modulus", {{"max_ratio", r.time_modulus_max_ratio}, {"violations", r.time_modulus_violations}}},
      {"mass_defect", r.mass_defect},
      {"rhow_defect", r.rhow_defect},
      {"entropy_violations", {{"count", r.entropy_violation_count}, {"worst", r.entropy_violation_worst}}},
      {"entropy_dissipation_budget", r.entropy_dissipation_budget},
      {"ei_residual", r.ei_residual},
      {"wf_residual", r.wf_residual},
      {"fronts", fronts},
      {"front_germ_remainder", r.front_germ_remainder},
      {"fronts_error", r.fronts_error},
      {"n_steps", r.n_steps},
      {"boundary_warning", r.boundary_warning},
  };
}

}  // namespace garz
