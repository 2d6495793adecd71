#pragma once

// Exact two-state Riemann solution: a first-family wave inside the w_l phase
// (shock or rarefaction of f(., w_l)), then a contact moving with the flow
// velocity across which w jumps.

#include <cmath>
#include <string>
#include <utility>
#include <variant>

#include "garz/errors.hpp"
#include "garz/grid.hpp"
#include "garz/model.hpp"

namespace garz {

struct RiemannData {
  double rho_l = 0.5;
  double w_l = 1.0;
  double rho_r = 0.5;
  double w_r = 1.0;
};

struct NoWave {};
struct Shock {
  double speed;
};
struct Rarefaction {
  double speed_lo;
  double speed_hi;
};
using FirstWave = std::variant<NoWave, Shock, Rarefaction>;

inline const char* wave_name(const FirstWave& w) {
  if (std::holds_alternative<Shock>(w)) return "shock";
  if (std::holds_alternative<Rarefaction>(w)) return "rarefaction";
  return "none";
}

struct ProfileState {
  double rho;
  double w;
};

class RiemannSolution {
 public:
  RiemannSolution(const FluxFamily& F, RiemannData data, double rho_mid, FirstWave wave,
                  double contact_speed)
      : family_(&F), data_(data), rho_mid_(rho_mid), wave_(wave), contact_speed_(contact_speed) {}

  const RiemannData& data() const { return data_; }
  double rho_mid() const { return rho_mid_; }
  const FirstWave& wave1() const { return wave_; }
  double contact_speed() const { return contact_speed_; }
  /// True when w or rho actually jumps across the contact.
  bool has_contact() const { return data_.w_l != data_.w_r || rho_mid_ != data_.rho_r; }

  /// Self-similar state at xi = x / t.
  ProfileState evaluate(double xi) const {
    if (xi > contact_speed_) return {data_.rho_r, data_.w_r};
    const double wl = data_.w_l;
    if (const auto* s = std::get_if<Shock>(&wave_)) return {xi < s->speed ? data_.rho_l : rho_mid_, wl};
    if (const auto* r = std::get_if<Rarefaction>(&wave_)) {
      if (xi <= r->speed_lo) return {data_.rho_l, wl};
      if (xi >= r->speed_hi) return {rho_mid_, wl};
      // df/drho decreases in rho; bracket [rho_mid, rho_l].
      double lo = rho_mid_, hi = data_.rho_l;
      for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        (family_->dflux(mid, wl) > xi ? lo : hi) = mid;
      }
      return {0.5 * (lo + hi), wl};
    }
    return {data_.rho_l, wl};
  }

 private:
  const FluxFamily* family_;
  RiemannData data_;
  double rho_mid_;
  FirstWave wave_;
  double contact_speed_;
};

inline RiemannSolution solve_riemann(const FluxFamily& F, const RiemannData& d) {
  const double eps = F.epsilon();
  for (double r : {d.rho_l, d.rho_r})
    if (!(r >= eps && r <= 1.0)) throw DomainError("Riemann densities must lie in [eps,1]");
  for (double w : {d.w_l, d.w_r})
    if (!(w >= 0.0 && w <= 1.0)) throw DomainError("Riemann w values must lie in [0,1]");

  const double target = F.velocity(d.rho_r, d.w_r);
  const double v_hi = F.velocity(eps, d.w_l);
  const double v_lo = F.velocity(1.0, d.w_l);
  if (target > v_hi + kIdentityTol || target < v_lo - kIdentityTol)
    throw NoIntermediateState("velocity " + std::to_string(target) +
                              " not attainable in the w_l phase on [eps,1]");

  double rho_mid;
  if (d.w_l == d.w_r) {
    rho_mid = d.rho_r;
  } else {
    // V(., w_l) is non-increasing; bisection for V(rho_mid, w_l) = target.
    double lo = eps, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > kIdentityTol; ++it) {
      const double mid = 0.5 * (lo + hi);
      (F.velocity(mid, d.w_l) > target ? lo : hi) = mid;
    }
    rho_mid = 0.5 * (lo + hi);
  }

  FirstWave wave = NoWave{};
  if (std::abs(rho_mid - d.rho_l) <= 1e-10) {
    wave = NoWave{};
  } else if (rho_mid > d.rho_l) {
    const double sigma =
        (F.flux(rho_mid, d.w_l) - F.flux(d.rho_l, d.w_l)) / (rho_mid - d.rho_l);
    wave = Shock{sigma};
  } else {
    wave = Rarefaction{F.dflux(d.rho_l, d.w_l), F.dflux(rho_mid, d.w_l)};
  }
  return RiemannSolution(F, d, rho_mid, wave, F.velocity(rho_mid, d.w_l));
}

inline ProfileState evaluate_profile(const RiemannSolution& sol, double xi) {
  return sol.evaluate(xi);
}

struct L1Error {
  double rho = 0.0;
  double w = 0.0;
  double total() const { return rho + w; }
};

/// L1 distance between a grid state and the oracle centred at x0 (cell centres).
inline L1Error oracle_l1_error(const GridState& s, const MeshConfig& mesh,
                               const RiemannSolution& sol, double x0 = 0.0) {
  L1Error e;
  const double dx = mesh.dx();
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double x = mesh.cell_center(static_cast<int>(j)) - x0;
    const ProfileState p =
        s.t > 0.0 ? sol.evaluate(x / s.t)
                  : (x < 0.0 ? ProfileState{sol.data().rho_l, sol.data().w_l}
                             : ProfileState{sol.data().rho_r, sol.data().w_r});
    e.rho += std::abs(s.u[j] - p.rho) * dx;
    e.w += std::abs(s.w[j] - p.w) * dx;
  }
  return e;
}

}  // namespace garz
