#pragma once

// Velocity pair and coupled flux f(rho, w) = rho * ((1 - w) Vmin(rho) + w Vmax(rho)).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "garz/errors.hpp"

namespace garz {

inline constexpr double kIdentityTol = 1e-12;
inline constexpr double kStrictMargin = 1e-10;
inline constexpr int kRhoGrid = 4096;
inline constexpr int kWGrid = 65;

struct BuiltinParams {
  double v_f = 1.0;
  double beta = 0.0;
};

/// Velocity laws of the disordered (v_min) and ordered (v_max) regimes plus the
/// vacuum threshold below which the two coincide.
class VelocityModel {
 public:
  using Law = std::function<double(double)>;

  VelocityModel(Law v_min, Law v_max, double epsilon)
      : v_min_(std::move(v_min)), v_max_(std::move(v_max)), epsilon_(epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0,1)");
    if (!v_min_ || !v_max_) throw DomainError("velocity laws must be callable");
  }

  // Built-in family: Vmax = v_f (1 - rho), Vmin = Vmax * (1 - beta q(rho)),
  // q = 0 below epsilon and ((rho - eps)/(1 - eps))^2 above.
  static VelocityModel builtin(double v_f, double beta, double epsilon) {
    if (!(v_f > 0.0) || !std::isfinite(v_f)) throw DomainError("v_f must be > 0");
    if (!(beta >= 0.0 && beta < 1.0)) throw DomainError("beta must lie in [0,1)");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0,1)");
    VelocityModel m;
    m.epsilon_ = epsilon;
    m.params_ = BuiltinParams{v_f, beta};
    return m;
  }

  double v_min(double rho) const {
    if (params_) return params_->v_f * (1.0 - rho) * (1.0 - params_->beta * dip(rho));
    return v_min_(rho);
  }
  double v_max(double rho) const {
    if (params_) return params_->v_f * (1.0 - rho);
    return v_max_(rho);
  }
  double velocity(double rho, double w) const {
    const double lo = v_min(rho);
    return lo + w * (v_max(rho) - lo);
  }

  double epsilon() const { return epsilon_; }
  const std::optional<BuiltinParams>& params() const { return params_; }
  bool is_builtin() const { return params_.has_value(); }

  double dip(double rho) const {
    if (rho <= epsilon_) return 0.0;
    const double s = (rho - epsilon_) / (1.0 - epsilon_);
    return s * s;
  }
  double dip_derivative(double rho) const {
    if (rho <= epsilon_) return 0.0;
    return 2.0 * (rho - epsilon_) / ((1.0 - epsilon_) * (1.0 - epsilon_));
  }

 private:
  VelocityModel() = default;

  Law v_min_;
  Law v_max_;
  double epsilon_ = 0.5;
  std::optional<BuiltinParams> params_;
};

namespace detail {

inline double grid_point(int i, int n) { return static_cast<double>(i) / (n - 1); }

inline double check_unit(double x, const char* what) {
  if (!(x >= -kIdentityTol && x <= 1.0 + kIdentityTol))
    throw DomainError(std::string(what) + " outside [0,1]: " + std::to_string(x));
  return std::clamp(x, 0.0, 1.0);
}

inline double raw_flux(const VelocityModel& m, double rho, double w) {
  // rho * (Vmin + w (Vmax - Vmin)) keeps the vacuum plateau bit-exact in w.
  return rho * m.velocity(rho, w);
}

}  // namespace detail

// Checks every structural assumption on the pair; throws AssumptionViolation
// naming the first that fails.
inline void validate_model(const VelocityModel& m, int rho_grid = kRhoGrid,
                           int w_grid = kWGrid) {
  const int n = rho_grid;
  const double eps = m.epsilon();

  double prev_min = m.v_min(0.0), prev_max = m.v_max(0.0);
  for (int i = 0; i < n; ++i) {
    const double r = detail::grid_point(i, n);
    const double lo = m.v_min(r), hi = m.v_max(r);
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo < -kIdentityTol || hi < -kIdentityTol)
      throw AssumptionViolation("nonnegative velocities", r, std::min(lo, hi));
    if (lo > prev_min + kIdentityTol)
      throw AssumptionViolation("non-increasing Vmin", r, lo - prev_min);
    if (hi > prev_max + kIdentityTol)
      throw AssumptionViolation("non-increasing Vmax", r, hi - prev_max);
    if (lo > hi + kIdentityTol) throw AssumptionViolation("Vmin <= Vmax", r, lo - hi);
    if (r <= eps) {
      const bool equal = m.is_builtin() ? lo == hi : std::abs(lo - hi) <= kIdentityTol;
      if (!equal) throw AssumptionViolation("vacuum plateau Vmin = Vmax below epsilon", r, lo - hi);
    }
    prev_min = lo;
    prev_max = hi;
  }
  if (std::abs(m.v_min(1.0)) > kIdentityTol)
    throw AssumptionViolation("Vmin(1) = 0", 1.0, m.v_min(1.0));
  if (std::abs(m.v_max(1.0)) > kIdentityTol)
    throw AssumptionViolation("Vmax(1) = 0", 1.0, m.v_max(1.0));

  // Strict concavity in rho via second differences, for every sampled w.
  double worst = -std::numeric_limits<double>::infinity();
  double worst_at = 0.0;
  for (int k = 0; k < w_grid; ++k) {
    const double w = detail::grid_point(k, w_grid);
    double f0 = detail::raw_flux(m, 0.0, w);
    double f1 = detail::raw_flux(m, detail::grid_point(1, n), w);
    for (int i = 2; i < n; ++i) {
      const double f2 = detail::raw_flux(m, detail::grid_point(i, n), w);
      const double d2 = f2 - 2.0 * f1 + f0;
      if (d2 > worst) {
        worst = d2;
        worst_at = detail::grid_point(i - 1, n);
      }
      f0 = f1;
      f1 = f2;
    }
  }
  if (!(worst < -kStrictMargin)) throw AssumptionViolation("strict concavity", worst_at, worst);
}

inline VelocityModel make_default_model(double v_f, double beta, double epsilon) {
  VelocityModel m = VelocityModel::builtin(v_f, beta, epsilon);
  validate_model(m);
  return m;
}

/// The validated flux family. Immutable after construction.
class FluxFamily {
 public:
  explicit FluxFamily(VelocityModel model, int rho_grid = kRhoGrid, int w_grid = kWGrid)
      : model_(std::move(model)), rho_grid_(rho_grid), w_grid_(w_grid) {
    validate_model(model_, rho_grid_, w_grid_);
    double sup = 0.0;
    for (int k = 0; k < w_grid_; ++k) {
      const double w = detail::grid_point(k, w_grid_);
      for (int i = 0; i < rho_grid_; ++i)
        sup = std::max(sup, std::abs(dflux(detail::grid_point(i, rho_grid_), w)));
    }
    lipschitz_ = 1.05 * sup;
    for (int i = 0; i < rho_grid_; ++i)
      max_velocity_ = std::max(max_velocity_, model_.v_max(detail::grid_point(i, rho_grid_)));
  }

  const VelocityModel& model() const { return model_; }
  double epsilon() const { return model_.epsilon(); }
  int validation_grid_size() const { return rho_grid_; }

  double flux(double rho, double w) const {
    return detail::raw_flux(model_, detail::check_unit(rho, "rho"), detail::check_unit(w, "w"));
  }
  double flux_min(double rho) const { return flux(rho, 0.0); }
  double flux_max(double rho) const { return flux(rho, 1.0); }
  double velocity(double rho, double w) const {
    return model_.velocity(detail::check_unit(rho, "rho"), detail::check_unit(w, "w"));
  }

  double dflux(double rho, double w) const {
    rho = detail::check_unit(rho, "rho");
    w = detail::check_unit(w, "w");
    if (const auto& p = model_.params()) {
      // f = v_f g h with g = rho (1 - rho), h = 1 - (1 - w) beta q(rho).
      const double g = rho * (1.0 - rho);
      const double h = 1.0 - (1.0 - w) * p->beta * model_.dip(rho);
      const double dh = -(1.0 - w) * p->beta * model_.dip_derivative(rho);
      return p->v_f * ((1.0 - 2.0 * rho) * h + g * dh);
    }
    constexpr double step = 1e-6;
    const double a = std::max(0.0, rho - step);
    const double b = std::min(1.0, rho + step);
    return (detail::raw_flux(model_, b, w) - detail::raw_flux(model_, a, w)) / (b - a);
  }

  /// Unique maximiser alpha(w) of f(., w), by bisection on the sign of dflux.
  double critical_point(double w) const {
    w = detail::check_unit(w, "w");
    double lo = 0.0, hi = 1.0;
    if (!(dflux(lo, w) > 0.0) || !(dflux(hi, w) < 0.0))
      throw RootNotBracketed("critical point not bracketed in [0,1] for w=" + std::to_string(w));
    for (int it = 0; it < 200 && hi - lo > kIdentityTol; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double d = dflux(mid, w);
      if (d == 0.0) return mid;
      (d > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  /// L: grid supremum of |df/drho| inflated by 5%.
  double lipschitz_bound() const { return lipschitz_; }
  /// Supremum of the velocity, attained by Vmax.
  double max_velocity() const { return max_velocity_; }

 private:
  VelocityModel model_;
  int rho_grid_;
  int w_grid_;
  double lipschitz_ = 0.0;
  double max_velocity_ = 0.0;
};

inline double flux(const FluxFamily& F, double rho, double w) { return F.flux(rho, w); }
inline double dflux(const FluxFamily& F, double rho, double w) { return F.dflux(rho, w); }
inline double critical_point(const FluxFamily& F, double w) { return F.critical_point(w); }
inline double lipschitz_bound(const FluxFamily& F) { return F.lipschitz_bound(); }

}  // namespace garz
