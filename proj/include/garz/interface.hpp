#pragma once

// Godunov flux for one concave bell-shaped flux, the two-flux interface flux,
// and the admissibility germ attached to a jump of w.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <vector>

#include "garz/errors.hpp"
#include "garz/model.hpp"

namespace garz {

inline constexpr double kGermTol = 1e-9;

/// Anything callable on [0,1] that also knows its interior maximiser.
template <class S>
concept BellFlux = requires(const S& f, double x) {
  { f(x) } -> std::convertible_to<double>;
  { f.critical_point() } -> std::convertible_to<double>;
};

/// rho -> f(rho, w) for a fixed w, with alpha(w) cached.
class FluxSlice {
 public:
  FluxSlice(const FluxFamily& family, double w)
      : family_(&family), w_(detail::check_unit(w, "w")), alpha_(family.critical_point(w_)) {}

  double operator()(double rho) const { return family_->flux(rho, w_); }
  double derivative(double rho) const { return family_->dflux(rho, w_); }
  double critical_point() const { return alpha_; }
  double peak() const { return (*this)(alpha_); }
  double w() const { return w_; }
  const FluxFamily& family() const { return *family_; }

 private:
  const FluxFamily* family_;
  double w_;
  double alpha_;
};

namespace detail {
inline void check_pair(double a, double b) {
  check_unit(a, "u_left");
  check_unit(b, "u_right");
}
inline double sgn(double x) { return (x > 0.0) - (x < 0.0); }
}  // namespace detail

/// min{ f(u_l ^ alpha), f(alpha v u_r) }.
template <BellFlux Slice>
double godunov_flux(const Slice& f, double u_left, double u_right) {
  detail::check_pair(u_left, u_right);
  const double a = f.critical_point();
  return std::min<double>(f(std::min(u_left, a)), f(std::max(a, u_right)));
}

template <BellFlux Left, BellFlux Right = Left>
struct BasicInterfacePair {
  Left left;
  Right right;
};

using InterfacePair = BasicInterfacePair<FluxSlice>;

inline InterfacePair make_interface(const FluxFamily& F, double w_left, double w_right) {
  return InterfacePair{FluxSlice(F, w_left), FluxSlice(F, w_right)};
}

/// F_int(u_l, u_r) = min{ f_l(u_l ^ alpha_l), f_r(alpha_r v u_r) }.
template <BellFlux L, BellFlux R>
double interface_flux(const BasicInterfacePair<L, R>& p, double u_left, double u_right) {
  detail::check_pair(u_left, u_right);
  return std::min<double>(p.left(std::min(u_left, p.left.critical_point())),
                          p.right(std::max(p.right.critical_point(), u_right)));
}

/// Same flux written through two single-flux Godunov evaluations,
/// min{ G_l(u_l, eps), G_r(1, u_r) }. Agrees with interface_flux whenever
/// eps <= alpha_l.
template <BellFlux L, BellFlux R>
double interface_flux_godunov_form(const BasicInterfacePair<L, R>& p, double u_left,
                                   double u_right, double epsilon) {
  return std::min(godunov_flux(p.left, u_left, epsilon), godunov_flux(p.right, 1.0, u_right));
}

enum class Branch { minus, plus };

/// Solves f(x) = y on the increasing (minus) or decreasing (plus) branch.
template <BellFlux Slice>
double branch_inverse(const Slice& f, double y, Branch branch) {
  const double a = f.critical_point();
  const double top = f(a);
  if (y > top + kIdentityTol || y < -kIdentityTol)
    throw OutOfRange("branch_inverse: level " + std::to_string(y) + " outside [0, max f]");
  y = std::clamp(y, 0.0, top);
  // Bracket [lo, hi] with g(lo) <= 0 <= g(hi) where g increases along the branch.
  double lo = branch == Branch::minus ? 0.0 : 1.0;
  double hi = a;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double v = f(mid);
    if (v == y) return mid;
    (v < y ? lo : hi) = mid;
  }
  // Pick the endpoint that best reproduces the level.
  return std::abs(f(lo) - y) <= std::abs(f(hi) - y) ? lo : hi;
}

/// |F_int - f_l(u_l)| + |F_int - f_r(u_r)|; vanishes exactly on the germ.
template <BellFlux L, BellFlux R>
double remainder(const BasicInterfacePair<L, R>& p, double u_left, double u_right) {
  const double F = interface_flux(p, u_left, u_right);
  return std::abs(F - p.left(u_left)) + std::abs(F - p.right(u_right));
}

enum class SubGerm { none, g1, g2, g3 };

struct GermMembership {
  bool member = false;
  SubGerm which = SubGerm::none;
  double remainder = 0.0;
  explicit operator bool() const { return member; }
};

/// Membership decided by R <= tol. The sub-germ label comes from which branch
/// each trace sits on and is advisory only.
template <BellFlux L, BellFlux R>
GermMembership germ_contains(const BasicInterfacePair<L, R>& p, double u_left, double u_right,
                             double tol = kGermTol) {
  GermMembership out;
  out.remainder = remainder(p, u_left, u_right);
  out.member = out.remainder <= tol;
  if (!out.member) return out;
  const bool left_minus = u_left <= p.left.critical_point();
  const double ar = p.right.critical_point();
  if (left_minus)
    out.which = u_right <= ar ? SubGerm::g1 : SubGerm::g3;
  else if (u_right >= ar)
    out.which = SubGerm::g2;
  return out;
}

/// Kruzhkov entropy flux of a single slice: sgn(a - b) (f(a) - f(b)).
template <BellFlux Slice>
double kruzhkov(const Slice& f, double a, double b) {
  return detail::sgn(a - b) * (f(a) - f(b));
}

inline double kruzhkov_flux(const FluxFamily& F, double rho, double w, double k) {
  return detail::sgn(rho - k) * (F.flux(rho, w) - F.flux(k, w));
}

struct GermPair {
  double k_left;
  double k_right;
  SubGerm which;
};

/// Returns +1 if f_l >= f_r on the validation grid, -1 if f_r >= f_l, 0 otherwise.
template <BellFlux L, BellFlux R>
int slice_ordering(const BasicInterfacePair<L, R>& p, int grid = kRhoGrid) {
  bool left_ge = true, right_ge = true;
  for (int i = 0; i < grid; ++i) {
    const double r = detail::grid_point(i, grid);
    const double d = p.left(r) - p.right(r);
    if (d < -kIdentityTol) left_ge = false;
    if (d > kIdentityTol) right_ge = false;
  }
  if (left_ge) return 1;
  if (right_ge) return -1;
  return 0;
}

/// Enumerates n germ pairs spread over the three sub-germs. The dominating
/// slice is swept, the other one is inverted branch-wise.
template <BellFlux L, BellFlux R>
std::vector<GermPair> germ_sample(const BasicInterfacePair<L, R>& p, std::size_t n) {
  if (n == 0) throw DomainError("germ_sample needs n >= 1");
  const int order = slice_ordering(p);
  if (order == 0) throw OrderingError("germ_sample: neither flux slice dominates the other");

  const double al = p.left.critical_point();
  const double ar = p.right.critical_point();
  const std::size_t n1 = (n + 2) / 3;
  const std::size_t n2 = (n + 1) / 3;
  const std::size_t n3 = n / 3;

  std::vector<GermPair> out;
  out.reserve(n);
  if (order > 0) {
    // f_l >= f_r: parametrise by k_r, invert f_l.
    for (std::size_t i = 0; i < n1; ++i) {
      const double kr = ar * (1.0 - static_cast<double>(i) / n1);
      out.push_back({branch_inverse(p.left, p.right(kr), Branch::minus), kr, SubGerm::g1});
    }
    for (std::size_t i = 0; i < n2; ++i) {
      const double kr = n2 == 1 ? 1.0 : ar + (1.0 - ar) * static_cast<double>(i) / (n2 - 1);
      out.push_back({branch_inverse(p.left, p.right(kr), Branch::plus), kr, SubGerm::g2});
    }
    for (std::size_t i = 0; i < n3; ++i) {
      const double kr = ar + (1.0 - ar) * static_cast<double>(i + 1) / n3;
      out.push_back({branch_inverse(p.left, p.right(kr), Branch::minus), kr, SubGerm::g3});
    }
  } else {
    // f_r >= f_l: parametrise by k_l, invert f_r.
    for (std::size_t i = 0; i < n1; ++i) {
      const double kl = al * (1.0 - static_cast<double>(i) / n1);
      out.push_back({kl, branch_inverse(p.right, p.left(kl), Branch::minus), SubGerm::g1});
    }
    for (std::size_t i = 0; i < n2; ++i) {
      const double kl = n2 == 1 ? 1.0 : al + (1.0 - al) * static_cast<double>(i) / (n2 - 1);
      out.push_back({kl, branch_inverse(p.right, p.left(kl), Branch::plus), SubGerm::g2});
    }
    for (std::size_t i = 0; i < n3; ++i) {
      const double kl = al * static_cast<double>(i) / n3;
      out.push_back({kl, branch_inverse(p.right, p.left(kl), Branch::plus), SubGerm::g3});
    }
  }
  return out;
}

/// mu = |alpha'|_inf * sup|df/drho| + sup|f_max - f_min|, the bound on
/// |F_int(k,k) - f(k, w_l)| per unit jump of w.
inline double consistency_constant(const FluxFamily& F, int w_points = 129) {
  double slope = 0.0;
  double prev = F.critical_point(0.0);
  for (int i = 1; i < w_points; ++i) {
    const double w = detail::grid_point(i, w_points);
    const double a = F.critical_point(w);
    slope = std::max(slope, std::abs(a - prev) * (w_points - 1));
    prev = a;
  }
  double gap = 0.0;
  const int n = F.validation_grid_size();
  for (int i = 0; i < n; ++i) {
    const double r = detail::grid_point(i, n);
    gap = std::max(gap, std::abs(F.flux_max(r) - F.flux_min(r)));
  }
  return 1.05 * slope * F.lipschitz_bound() + gap;
}

}  // namespace garz
