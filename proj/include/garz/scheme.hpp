#pragma once

// One marching step: interface fluxes, density update, numerical
// characteristics and the upwind averaging of w.

#include <algorithm>
#include <string>
#include <vector>

#include "garz/grid.hpp"
#include "garz/interface.hpp"

namespace garz {

/// Flux slices for cells -1 .. n (outflow ghosts replicate the boundary cells).
inline std::vector<FluxSlice> cell_slices(const FluxFamily& F, const GridState& s) {
  const std::size_t n = s.size();
  std::vector<FluxSlice> out;
  out.reserve(n + 2);
  auto push = [&](double w) {
    // Runs of equal w share alpha(w).
    if (!out.empty() && out.back().w() == w)
      out.push_back(out.back());
    else
      out.emplace_back(F, w);
  };
  push(s.w.front());
  for (double w : s.w) push(w);
  push(s.w.back());
  return out;
}

/// Density in cell j with ghosts, j in [-1, n].
inline double ghost_u(const std::vector<double>& u, long j) {
  const long n = static_cast<long>(u.size());
  return u[static_cast<std::size_t>(std::clamp(j, 0L, n - 1))];
}

/// Interface flux at x_{i-1/2}, i = 0..n, between cells i-1 and i, evaluated
/// at arbitrary densities (ul, ur).
inline double interface_flux_at(const std::vector<FluxSlice>& slices, std::size_t i, double ul,
                                double ur) {
  const InterfacePair p{slices[i], slices[i + 1]};
  return interface_flux(p, ul, ur);
}

/// F_{i-1/2} for i = 0..n at the current densities.
inline std::vector<double> interface_fluxes(const std::vector<FluxSlice>& slices,
                                            const GridState& s) {
  const std::size_t n = s.size();
  std::vector<double> F(n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    F[i] = interface_flux_at(slices, i, ghost_u(s.u, static_cast<long>(i) - 1),
                             ghost_u(s.u, static_cast<long>(i)));
  return F;
}

struct StepResult {
  GridState next;
  std::vector<double> flux;   // F_{j-1/2}, j = 0..n
  std::vector<double> speed;  // s_{j-1/2} = F_{j-1/2} / u_j^{n+1}, j = 0..n-1
};

inline StepResult step_detailed(const GridState& state, const FluxFamily& F,
                                const MeshConfig& mesh, const std::vector<FluxSlice>& slices) {
  const std::size_t n = state.size();
  const double lambda = mesh.lambda;
  const double eps = F.epsilon();

  StepResult r;
  r.flux = interface_fluxes(slices, state);
  r.speed.resize(n);
  r.next.u.resize(n);
  r.next.w.resize(n);
  r.next.t = state.t + mesh.dt();

  for (std::size_t j = 0; j < n; ++j) {
    const double u = state.u[j] - lambda * (r.flux[j + 1] - r.flux[j]);
    if (!(u >= eps - kIdentityTol && u <= 1.0 + kIdentityTol))
      throw InvariantViolation("density " + std::to_string(u) + " left [eps,1] in cell " +
                               std::to_string(j) + " at t=" + std::to_string(state.t));
    r.next.u[j] = u;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double s = r.flux[j] / r.next.u[j];
    const double theta = lambda * s;
    if (!(theta >= -kIdentityTol && theta <= 1.0 + kIdentityTol))
      throw InvariantViolation("lambda*s = " + std::to_string(theta) + " outside [0,1] in cell " +
                               std::to_string(j));
    r.speed[j] = s;
    const double wj = state.w[j];
    const double wl = j == 0 ? state.w[0] : state.w[j - 1];
    // (1 - theta) w_j + theta w_{j-1}, written so the result stays within [w_{j-1}, w_j].
    r.next.w[j] = wj + std::clamp(theta, 0.0, 1.0) * (wl - wj);
  }
  return r;
}

inline StepResult step_detailed(const GridState& state, const FluxFamily& F,
                                const MeshConfig& mesh) {
  return step_detailed(state, F, mesh, cell_slices(F, state));
}

inline GridState step(const GridState& state, const FluxFamily& F, const MeshConfig& mesh) {
  return step_detailed(state, F, mesh).next;
}

}  // namespace garz
