#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "garz/diagnostics.hpp"
#include "garz/grid.hpp"
#include "garz/scheme.hpp"

namespace garz {

struct RunOptions {
  int k_points = 11;            // k-grid of the per-step entropy audit; 0 disables it
  bool residuals = false;       // fronts, EI and WF residuals (keeps the trajectory)
  int n_test_functions = 5;
  std::uint64_t seed = 0;
  int trace_offset = -1;
  bool keep_trajectory = false;
};

struct RunResult {
  std::vector<GridState> snapshots;
  DiagnosticsReport report;
  Trajectory trajectory;  // empty unless kept
};

namespace detail {
inline bool boundary_touched(const GridState& a, const GridState& b) {
  const std::size_t n = a.size();
  for (std::size_t j : {std::size_t{0}, std::size_t{1}, n - 2, n - 1})
    if (std::abs(a.u[j] - b.u[j]) > 1e-12 || std::abs(a.w[j] - b.w[j]) > 1e-12) return true;
  return false;
}
}  // namespace detail

/// Post-processing certificates that need the whole trajectory.
inline void compute_residuals(DiagnosticsReport& report, const Trajectory& traj,
                              const InitialData& init, const FluxFamily& F,
                              const RunOptions& opt) {
  try {
    report.fronts = track_fronts(traj, init, F, opt.trace_offset);
  } catch (const FrontLost& e) {
    report.fronts.clear();
    report.fronts_error = e.what();
  }
  report.front_germ_remainder.clear();
  for (const auto& f : report.fronts) report.front_germ_remainder.push_back(front_germ_remainder(f, F));
  if (traj.n_steps() == 0) return;

  const auto phis = make_test_functions(opt.seed, opt.n_test_functions, traj.mesh.x_min,
                                        traj.mesh.x_max, traj.final_time());
  const auto ks = k_grid(opt.k_points > 0 ? opt.k_points : 11);
  report.wf_residual.clear();
  report.ei_residual.clear();
  for (const auto& phi : phis) {
    report.wf_residual.push_back(std::abs(weak_form_residual(traj, F, phi)));
    std::vector<double> row;
    for (double k : ks) row.push_back(entropy_inequality_residual(traj, F, phi, k, report.fronts));
    report.ei_residual.push_back(std::move(row));
  }
}

/// Marches from the discretised initial datum to t_end. A snapshot time is
/// served by the state at the largest t^n not exceeding it.
inline RunResult run(const InitialData& init, const FluxFamily& F, const MeshConfig& mesh,
                     const std::vector<double>& snapshot_times, const RunOptions& opt = {}) {
  validate_mesh(mesh, F);
  const int n_steps = mesh.n_steps();
  std::vector<int> snap_steps;
  for (double t : snapshot_times) {
    if (t < 0.0 || t > mesh.t_end + 1e-12) throw ConfigError("snapshot time outside [0, t_end]");
    snap_steps.push_back(std::min(mesh.steps_until(t), n_steps));
  }

  RunResult res;
  res.snapshots.resize(snapshot_times.size());
  GridState state = discretize(init, mesh, F.epsilon());
  const GridState initial = state;
  StepAuditor auditor(F, mesh, state, opt.k_points);
  const bool keep = opt.keep_trajectory || opt.residuals;
  if (keep) {
    res.trajectory.mesh = mesh;
    res.trajectory.states.reserve(static_cast<std::size_t>(n_steps) + 1);
    res.trajectory.states.push_back(state);
  }
  auto emit = [&](int n) {
    for (std::size_t i = 0; i < snap_steps.size(); ++i)
      if (snap_steps[i] == n) res.snapshots[i] = state;
  };
  emit(0);
  for (int n = 0; n < n_steps; ++n) {
    const auto slices = cell_slices(F, state);
    StepResult r = step_detailed(state, F, mesh, slices);
    r.next.t = (n + 1) * mesh.dt();
    auditor.observe(state, r, slices);
    state = std::move(r.next);
    if (keep) res.trajectory.states.push_back(state);
    emit(n + 1);
  }
  res.report = std::move(auditor.report());
  res.report.boundary_warning = detail::boundary_touched(initial, state);
  if (opt.residuals) compute_residuals(res.report, res.trajectory, init, F, opt);
  return res;
}

}  // namespace garz
