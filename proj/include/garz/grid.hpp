#pragma once

// Mesh, cell-averaged state and initial data.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "garz/errors.hpp"
#include "garz/model.hpp"

namespace garz {

/// Largest lambda = dt/dx allowed by lambda * max{2, 1/eps} * L <= 1.
inline double max_stable_lambda(const FluxFamily& F) {
  return 1.0 / (std::max(2.0, 1.0 / F.epsilon()) * F.lipschitz_bound());
}

enum class Boundary { outflow };

struct MeshConfig {
  double x_min = -1.0;
  double x_max = 1.0;
  int n_cells = 100;
  double lambda = 0.1;
  double t_end = 0.0;
  Boundary boundary = Boundary::outflow;

  double dx() const { return (x_max - x_min) / n_cells; }
  double dt() const { return lambda * dx(); }
  double cell_left(int j) const { return x_min + j * dx(); }
  double cell_center(int j) const { return x_min + (j + 0.5) * dx(); }
  /// Number of steps; t_end is rounded down to the nearest t^n.
  int n_steps() const { return steps_until(t_end); }
  int steps_until(double t) const {
    return static_cast<int>(std::floor(t / dt() * (1.0 + 1e-12) + 1e-9));
  }
};

inline void validate_mesh(const MeshConfig& m, const FluxFamily& F) {
  if (!(m.x_max > m.x_min)) throw ConfigError("mesh: x_max must exceed x_min");
  if (m.n_cells < 4) throw ConfigError("mesh: n_cells must be >= 4");
  if (!(m.lambda > 0.0)) throw ConfigError("mesh: lambda must be > 0");
  if (!(m.t_end >= 0.0)) throw ConfigError("mesh: t_end must be >= 0");
  const double cfl = m.lambda * std::max(2.0, 1.0 / F.epsilon()) * F.lipschitz_bound();
  if (cfl > 1.0 + 1e-12)
    throw CflViolation("CFL condition violated: lambda*max(2,1/eps)*L = " + std::to_string(cfl) +
                       " > 1 (max stable lambda " + std::to_string(max_stable_lambda(F)) + ")");
}

/// Builds and validates a mesh; lambda defaults to 0.9 of the stability limit.
inline MeshConfig make_mesh(const FluxFamily& F, double x_min, double x_max, int n_cells,
                            double t_end, std::optional<double> lambda = std::nullopt) {
  MeshConfig m{x_min, x_max, n_cells, lambda.value_or(0.9 * max_stable_lambda(F)), t_end};
  validate_mesh(m, F);
  return m;
}

struct GridState {
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> w;

  std::size_t size() const { return u.size(); }
};

/// Piecewise-constant function: values[0] left of breakpoints[0], values[m]
/// on [breakpoints[m-1], breakpoints[m]), values.back() right of the last.
struct PiecewiseConstant {
  std::vector<double> breakpoints;
  std::vector<double> values;

  static PiecewiseConstant constant(double v) { return {{}, {v}}; }

  void validate(const char* what) const {
    if (values.size() != breakpoints.size() + 1)
      throw ConfigError(std::string(what) + ": need exactly one more value than breakpoints");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
      if (!(breakpoints[i] > breakpoints[i - 1]))
        throw ConfigError(std::string(what) + ": breakpoints must be strictly increasing");
  }

  double operator()(double x) const {
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    return values[static_cast<std::size_t>(it - breakpoints.begin())];
  }

  /// Exact average over [a, b].
  double average(double a, double b) const {
    double sum = 0.0;
    double left = a;
    for (std::size_t m = 0; m < values.size(); ++m) {
      const double right = m < breakpoints.size() ? std::min(b, breakpoints[m]) : b;
      if (right > left) {
        sum += (right - left) * values[m];
        left = right;
      }
      if (left >= b) break;
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return std::clamp(sum / (b - a), *lo, *hi);
  }

  double min_value() const { return *std::min_element(values.begin(), values.end()); }
  double max_value() const { return *std::max_element(values.begin(), values.end()); }
};

struct InitialData {
  std::variant<PiecewiseConstant, std::function<double(double)>> rho0;
  PiecewiseConstant w0;
};

inline void validate_initial(const InitialData& init, double epsilon) {
  init.w0.validate("w0");
  for (double a : init.w0.values)
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("w0 values must lie in [0,1]");
  if (const auto* pc = std::get_if<PiecewiseConstant>(&init.rho0)) {
    pc->validate("rho0");
    for (double r : pc->values) {
      if (r < epsilon) throw VacuumError("rho0 value " + std::to_string(r) + " below epsilon");
      if (r > 1.0) throw ConfigError("rho0 values must not exceed 1");
    }
  }
}

/// Exact cell averages of the initial datum (sampled rho0 uses 64-point
/// composite midpoint quadrature per cell).
inline GridState discretize(const InitialData& init, const MeshConfig& mesh, double epsilon) {
  validate_initial(init, epsilon);
  const int n = mesh.n_cells;
  GridState s;
  s.t = 0.0;
  s.u.resize(n);
  s.w.resize(n);
  const double dx = mesh.dx();
  for (int j = 0; j < n; ++j) {
    const double a = mesh.cell_left(j);
    const double b = j + 1 == n ? mesh.x_max : mesh.cell_left(j + 1);
    s.w[j] = init.w0.average(a, b);
    if (const auto* pc = std::get_if<PiecewiseConstant>(&init.rho0)) {
      s.u[j] = pc->average(a, b);
    } else {
      const auto& fn = std::get<std::function<double(double)>>(init.rho0);
      constexpr int sub = 64;
      double acc = 0.0;
      for (int q = 0; q < sub; ++q) acc += fn(a + (q + 0.5) * dx / sub);
      s.u[j] = acc / sub;
    }
    if (s.u[j] < epsilon)
      throw VacuumError("initial cell average " + std::to_string(s.u[j]) + " below epsilon in cell " +
                        std::to_string(j));
    if (s.u[j] > 1.0 + kIdentityTol) throw ConfigError("initial density above 1");
  }
  return s;
}

}  // namespace garz
